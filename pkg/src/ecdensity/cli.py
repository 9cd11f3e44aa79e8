"""Experiment orchestration: empirical counts vs the predicted density.

Subcommands: count, predict, compare, probe, selftest.  Configuration comes
from a JSON file mirroring ExperimentConfig, overridden by CLI flags.  All
outputs are deterministic for a fixed config regardless of worker count.
"""

from __future__ import annotations

import argparse
import bisect
import json
import multiprocessing
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from .curves import (CurveSpec, ExcludedPrime, is_primitive_cyclic,
                     reduction_record)
from .density import (GENERIC_CURVE_BUDGET, DensityInterval, ErrorBudget,
                      cyclicity_family, density_with_interval, error_envelope,
                      log_integral)
from .galois import (CongruenceCondition, GenericImageModel,
                     InsufficientSamples, image_probe)
from .primes import MAX_SIEVE_LIMIT, CapacityError, sieve_primes

CHUNK = 100_000  # fixed scan chunk so results never depend on worker count


class ConfigError(Exception):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    curve_a: int = 0
    curve_b: int = 0
    points: tuple = ()
    conductor_support: "frozenset | None" = None
    f: int = 1
    residues: "tuple | None" = None  # None means the full unit group mod f
    x_limit: int = 10_000
    checkpoints: tuple = ()
    truncation: int = 10_000
    budget: ErrorBudget = GENERIC_CURVE_BUDGET
    degree_overrides: dict = field(default_factory=dict)
    workers: int = 1
    out: "str | None" = None
    format: str = "csv"

    def __post_init__(self) -> None:
        if self.f < 1:
            raise ConfigError("modulus f must be >= 1")
        if self.x_limit < 2:
            raise ConfigError("x_limit must be >= 2")
        if self.truncation < 1:
            raise ConfigError("truncation must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.format!r}")
        if not self.checkpoints:
            cp = []
            x = 10
            while x <= self.x_limit:
                cp.append(x)
                x *= 10
            if not cp or cp[-1] != self.x_limit:
                cp.append(self.x_limit)
            self.checkpoints = tuple(cp)
        self.checkpoints = tuple(sorted(self.checkpoints))
        if self.checkpoints[-1] > self.x_limit:
            raise ConfigError("checkpoints must not exceed x_limit")
        try:
            self.curve()
            self.condition()
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(str(exc)) from exc

    def curve(self) -> CurveSpec:
        return CurveSpec(self.curve_a, self.curve_b, tuple(self.points),
                         self.conductor_support)

    def condition(self) -> CongruenceCondition:
        if self.residues is None:
            return CongruenceCondition.full(self.f)
        return CongruenceCondition(self.f, frozenset(self.residues))

    def model(self) -> GenericImageModel:
        g = sum(1 for pt in self.points if pt is not None)
        return GenericImageModel(g, dict(self.degree_overrides))


@dataclass
class CountSummary:
    """Per-checkpoint cumulative counts of qualifying and excluded primes."""

    checkpoints: tuple
    counts: tuple
    excluded: tuple
    qualifying_primes: tuple = ()


# ---------------------------------------------------------------------------
# counting


def _scan_chunk(args) -> tuple[list, list]:
    a, b, points, cond_support, f, residues, lo, hi = args
    curve = CurveSpec(a, b, points, cond_support)
    excluded = curve.excluded_primes(f)
    kept, skipped = [], []
    for p in sieve_primes(lo, hi):
        if p in excluded:
            skipped.append(p)
            continue
        if residues is not None and p % f not in residues:
            continue
        rec = reduction_record(curve, p, f)
        if is_primitive_cyclic(rec):
            kept.append(p)
    return kept, skipped


def run_count(config: ExperimentConfig) -> CountSummary:
    """Scan primes up to x_limit and count primitive-cyclic reductions."""
    if config.x_limit > MAX_SIEVE_LIMIT:
        raise CapacityError(f"x_limit {config.x_limit} exceeds {MAX_SIEVE_LIMIT}")
    curve = config.curve()
    cond = config.condition()
    residues = set(cond.residues) if config.f > 1 else None
    chunks = []
    lo = 2
    while lo <= config.x_limit:
        hi = min(lo + CHUNK - 1, config.x_limit)
        chunks.append((curve.a, curve.b, curve.points, curve.conductor_support,
                       config.f, residues, lo, hi))
        lo = hi + 1
    if config.workers > 1 and len(chunks) > 1:
        with multiprocessing.Pool(config.workers) as pool:
            parts = pool.map(_scan_chunk, chunks)
    else:
        parts = [_scan_chunk(c) for c in chunks]
    kept, skipped = [], []
    for k, s in parts:
        kept.extend(k)
        skipped.extend(s)
    counts = tuple(bisect.bisect_right(kept, x) for x in config.checkpoints)
    excluded = tuple(bisect.bisect_right(skipped, x) for x in config.checkpoints)
    return CountSummary(config.checkpoints, counts, excluded, tuple(kept))


# ---------------------------------------------------------------------------
# prediction and comparison


def run_predict(config: ExperimentConfig) -> tuple[DensityInterval, dict]:
    """Evaluate the truncated density series for the configured condition."""
    cond = config.condition()
    meta = {
        "truncation": config.truncation,
        "modulus": config.f,
        "residues": sorted(cond.residues),
        "overrides": {str(q): d for q, d in sorted(config.degree_overrides.items())},
        "probe": "not run; use the probe subcommand to audit the generic model",
    }
    if not cond.residues:
        meta["certificate"] = "zero: empty residue class"
        return DensityInterval(Fraction(0), Fraction(0), config.truncation), meta
    family = cyclicity_family(config.model(), cond)
    interval = density_with_interval(family, config.truncation)
    meta["certificate"] = "truncated series with certified tail"
    return interval, meta


def _fmt_float(v: float) -> str:
    return format(v, ".12g")


def _fmt_fraction(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}"


def run_compare(config: ExperimentConfig) -> list[dict]:
    """Join counts and prediction; one row per checkpoint."""
    summary = run_count(config)
    interval, meta = run_predict(config)
    center = interval.center
    rows = []
    for x, count, excl in zip(summary.checkpoints, summary.counts, summary.excluded):
        li = log_integral(float(x))
        row = {
            "x": x,
            "count": count,
            "excluded": excl,
            "li": li,
            "predicted_center": float(center) * li,
            "predicted_lo": float(interval.low) * li,
            "predicted_hi": float(interval.high) * li,
            "ratio": count / (float(center) * li) if center > 0 else None,
            "envelope": error_envelope(float(x), config.budget),
        }
        rows.append(row)
    return rows


CSV_COLUMNS = ("x", "count", "excluded", "li", "predicted_center",
               "predicted_lo", "predicted_hi", "ratio", "envelope")


def rows_to_csv(rows: list[dict]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        cells = []
        for col in CSV_COLUMNS:
            v = row[col]
            if v is None:
                cells.append("n/a")
            elif isinstance(v, float):
                cells.append(_fmt_float(v))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def rows_to_json(rows: list[dict], interval: DensityInterval, meta: dict) -> str:
    payload = {
        "rows": [
            {k: (_fmt_float(v) if isinstance(v, float) else v) for k, v in row.items()}
            for row in rows
        ],
        "predicted": {
            "center": _fmt_fraction(interval.center),
            "tail": _fmt_fraction(interval.tail),
            "truncation": interval.truncation,
        },
        "meta": meta,
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def run_probe(config: ExperimentConfig, budget: "int | None" = None) -> list:
    """Image-probe verdicts for every prime q <= 13."""
    curve = config.curve()
    verdicts = []
    for q in (2, 3, 5, 7, 11, 13):
        b = budget if budget is not None else max(500, 40 * q * q)
        verdicts.append(image_probe(curve, q, b))
    return verdicts


# ---------------------------------------------------------------------------
# CLI plumbing


def _parse_fraction_pair(text: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"expected 'x,y', got {text!r}")
    return (Fraction(parts[0]), Fraction(parts[1]))


def _load_config(args) -> ExperimentConfig:
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        curve = raw.get("curve", {})
        data["curve_a"] = curve.get("a", 0)
        data["curve_b"] = curve.get("b", 0)
        data["points"] = tuple(
            (Fraction(str(x)), Fraction(str(y))) for x, y in curve.get("points", ())
        )
        if "conductor_support" in curve:
            data["conductor_support"] = frozenset(curve["conductor_support"])
        cond = raw.get("condition", {})
        data["f"] = cond.get("f", 1)
        if "residues" in cond:
            data["residues"] = tuple(cond["residues"])
        for key in ("x_limit", "checkpoints", "truncation", "workers", "out", "format"):
            if key in raw:
                data[key] = tuple(raw[key]) if key == "checkpoints" else raw[key]
        if "degree_overrides" in raw:
            data["degree_overrides"] = {int(q): d for q, d in raw["degree_overrides"].items()}
        if "budget" in raw:
            b = raw["budget"]
            data["budget"] = ErrorBudget(
                Fraction(str(b["alpha"])), Fraction(str(b["beta"])),
                Fraction(str(b.get("gamma", 0))),
                tuple((Fraction(str(ai)), Fraction(str(bi))) for ai, bi in b.get("aux", ())),
            )
    if args.curve:
        a_str, b_str = (args.curve.split(",") + ["", ""])[:2]
        try:
            data["curve_a"], data["curve_b"] = int(a_str), int(b_str)
        except ValueError as exc:
            raise ConfigError(f"bad --curve value {args.curve!r}") from exc
    if args.point:
        data["points"] = tuple(_parse_fraction_pair(t) for t in args.point)
    if args.modulus is not None:
        data["f"] = args.modulus
    if args.residue:
        data["residues"] = tuple(args.residue)
    if args.xlimit is not None:
        data["x_limit"] = args.xlimit
    if args.checkpoints:
        data["checkpoints"] = tuple(int(t) for t in args.checkpoints.split(","))
    if args.truncation is not None:
        data["truncation"] = args.truncation
    if args.override:
        overrides = dict(data.get("degree_overrides", {}))
        for item in args.override:
            q_str, _, d_str = item.partition("=")
            try:
                overrides[int(q_str)] = int(d_str)
            except ValueError as exc:
                raise ConfigError(f"bad --override value {item!r}") from exc
        data["degree_overrides"] = overrides
    if args.workers is not None:
        data["workers"] = args.workers
    if args.out is not None:
        data["out"] = args.out
    if args.format is not None:
        data["format"] = args.format
    try:
        return ExperimentConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _write(path: str, content: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(content)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ecdensity",
        description="Empirical vs predicted density of primitive-cyclic reductions.",
    )
    parser.add_argument("--config", help="JSON config file (flags override it)")
    parser.add_argument("--curve", help="curve coefficients 'a,b'")
    parser.add_argument("--point", action="append", help="rational point 'x,y' (repeatable)")
    parser.add_argument("--modulus", type=int, help="cyclotomic conductor f")
    parser.add_argument("--residue", type=int, action="append",
                        help="allowed residue mod f (repeatable)")
    parser.add_argument("--xlimit", type=int, help="scan primes up to this bound")
    parser.add_argument("--checkpoints", help="comma-separated checkpoint x values")
    parser.add_argument("--truncation", type=int, help="series truncation point y")
    parser.add_argument("--override", action="append",
                        help="degree override 'q=degree' (repeatable)")
    parser.add_argument("--workers", type=int, help="number of scan workers")
    parser.add_argument("--out", help="output path (base path for compare)")
    parser.add_argument("--format", choices=("csv", "json"), help="output format")
    parser.add_argument("--budget", type=int, default=None,
                        help="probe: primes sampled per q")
    parser.add_argument("command", choices=("count", "predict", "compare", "probe", "selftest"))
    return parser


def _cmd_count(config: ExperimentConfig) -> None:
    summary = run_count(config)
    lines = ["x,count,excluded"]
    for x, c, e in zip(summary.checkpoints, summary.counts, summary.excluded):
        lines.append(f"{x},{c},{e}")
    text = "\n".join(lines) + "\n"
    if config.out:
        _write(config.out, text)
    sys.stdout.write(text)


def _cmd_predict(config: ExperimentConfig) -> None:
    interval, meta = run_predict(config)
    payload = {
        "center": _fmt_fraction(interval.center),
        "tail": _fmt_fraction(interval.tail),
        "center_float": _fmt_float(float(interval.center)),
        "low": _fmt_float(float(interval.low)),
        "high": _fmt_float(float(interval.high)),
        "meta": meta,
    }
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if config.out:
        _write(config.out, text)
    sys.stdout.write(text)


def _cmd_compare(config: ExperimentConfig) -> None:
    rows = run_compare(config)
    interval, meta = run_predict(config)
    csv_text = rows_to_csv(rows)
    json_text = rows_to_json(rows, interval, meta)
    if config.out:
        base = config.out
        for suffix in (".csv", ".json"):
            if base.endswith(suffix):
                base = base[: -len(suffix)]
        _write(base + ".csv", csv_text)
        _write(base + ".json", json_text)
    sys.stdout.write(csv_text if config.format == "csv" else json_text)


def _cmd_probe(config: ExperimentConfig, budget) -> None:
    verdicts = run_probe(config, budget)
    payload = [
        {
            "q": v.q,
            "verdict": "consistent-with-surjective" if v.consistent_with_surjective
            else "non-surjective",
            "missing_classes": [list(c) for c in v.missing_classes],
            "samples": v.samples,
        }
        for v in verdicts
    ]
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if config.out:
        _write(config.out, text)
    sys.stdout.write(text)


def _cmd_selftest() -> int:
    from .galois import brute_force_count, delta_CF_k, is_identity_at

    failures = 0

    def check(name: str, ok: bool) -> None:
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        failures += 0 if ok else 1

    check("pi(10^4) = 1229", sum(1 for _ in sieve_primes(2, 10**4)) == 1229)
    curve = CurveSpec(-1, 0)  # y^2 = x^3 - x
    rec = reduction_record(curve, 5)
    check("y^2=x^3-x at p=5 has order 8, shape (2,4)",
          rec.n == 8 and (rec.structure.d1, rec.structure.d2) == (2, 4))
    curve2 = CurveSpec(0, 1)
    rec2 = reduction_record(curve2, 5)
    check("y^2=x^3+1 at p=5 is cyclic of order 6",
          rec2.n == 6 and is_primitive_cyclic(rec2))
    model = GenericImageModel()
    cond = CongruenceCondition(4, frozenset({3}))
    formula = delta_CF_k(model, 2, cond)
    count = brute_force_count(2, 4, lambda m, t, u: is_identity_at(m, t, 2) and u == 3)
    check("delta formula matches enumeration at k=2, f=4",
          formula == Fraction(count, 12))
    return 1 if failures else 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "selftest":
            return _cmd_selftest()
        config = _load_config(args)
        if args.command == "count":
            _cmd_count(config)
        elif args.command == "predict":
            _cmd_predict(config)
        elif args.command == "compare":
            _cmd_compare(config)
        elif args.command == "probe":
            _cmd_probe(config, args.budget)
        return 0
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (CapacityError, InsufficientSamples) as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
