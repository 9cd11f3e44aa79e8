"""Finite-group model of the division-field Galois images.

The splitting field tower is modeled generically: full GL2 over Z/k with a
full translation part (one pair of coordinates per rational point), tied to
the cyclotomic layer only through the determinant.  Per-prime degree
overrides let a non-generic curve (detected by the empirical image probe)
shrink the model.  All density values are exact rationals; a brute-force
enumerator over the explicit model doubles as the oracle for every formula.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import gcd

from .curves import CurveSpec, ExcludedPrime, count_points, reduce_curve
from .primes import CapacityError, factorize, sieve_primes

BRUTE_FORCE_CAPACITY = 10**7


class InsufficientSamples(Exception):
    """The image probe ran out of usable primes before reaching its budget."""


def euler_phi(n: int) -> int:
    phi = n
    for q in set(factorize(n)):
        phi = phi // q * (q - 1)
    return phi


def _require_squarefree(k: int) -> list[int]:
    if k < 1:
        raise ValueError("k must be >= 1")
    factors = factorize(k)
    if len(set(factors)) != len(factors):
        raise ValueError(f"k={k} is not squarefree")
    return factors


def gl2_order(k: int) -> int:
    """#GL2(Z/k) for squarefree k: product of (q^2-1)(q^2-q) over q | k."""
    order = 1
    for q in _require_squarefree(k):
        order *= (q * q - 1) * (q * q - q)
    return order


@dataclass(frozen=True)
class CongruenceCondition:
    """F = Q(zeta_f) together with a set of allowed residues mod f."""

    f: int
    residues: frozenset

    def __post_init__(self) -> None:
        if self.f < 1:
            raise ValueError("f must be >= 1")
        object.__setattr__(self, "residues", frozenset(r % self.f for r in self.residues))
        for r in self.residues:
            if gcd(r, self.f) != 1:
                raise ValueError(f"residue {r} is not coprime to f={self.f}")

    @classmethod
    def trivial(cls) -> "CongruenceCondition":
        return cls(1, frozenset({0}))

    @classmethod
    def full(cls, f: int) -> "CongruenceCondition":
        return cls(f, frozenset(r for r in range(f) if gcd(r, f) == 1))


@dataclass(frozen=True)
class GenericImageModel:
    """Model parameters: number of global points g and per-prime degree overrides."""

    g: int = 0
    degree_overrides: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for q, deg in self.degree_overrides.items():
            generic = q**(2 * self.g) * (q * q - 1) * (q * q - q)
            if generic % deg:
                raise ValueError(
                    f"override degree {deg} at q={q} does not divide the generic degree {generic}"
                )


def generic_degree(model: GenericImageModel, k: int) -> int:
    """[L_k : Q] in the model: product over q | k of the per-prime degrees."""
    deg = 1
    for q in _require_squarefree(k):
        deg *= model.degree_overrides.get(q, q**(2 * model.g) * (q * q - 1) * (q * q - q))
    return deg


def delta_k(model: GenericImageModel, k: int) -> Fraction:
    """delta for the bare splitting condition: 1 / [L_k : Q]."""
    return Fraction(1, generic_degree(model, k))


def delta_CF_k(model: GenericImageModel, k: int, cond: CongruenceCondition) -> Fraction:
    """Density weight of {restriction to L_k trivial, cyclotomic part in C_F}.

    Fixing L_k pins zeta_d for d = gcd(k, f), so the cyclotomic component
    must be 1 mod d; the joint group has order [L_k:Q] * phi(f)/phi(d).
    """
    d = gcd(k, cond.f)
    num = sum(1 for c in cond.residues if c % d == 1 % d)
    den = generic_degree(model, k) * euler_phi(cond.f) // euler_phi(d)
    return Fraction(num, den)


# ---------------------------------------------------------------------------
# explicit enumeration


@lru_cache(maxsize=8)
def _gl2_elements(k: int) -> tuple:
    """All invertible 2x2 matrices over Z/k as (m00, m01, m10, m11) tuples."""
    if k == 1:
        return ((0, 0, 0, 0),)
    out = []
    for m in product(range(k), repeat=4):
        if gcd((m[0] * m[3] - m[1] * m[2]) % k, k) == 1:
            out.append(m)
    return tuple(out)


def _det(m: tuple, k: int) -> int:
    if k == 1:
        return 0
    return (m[0] * m[3] - m[1] * m[2]) % k


class ExplicitGroupModel:
    """Explicit element list for Gal(L_k F / Q) in the generic model.

    Elements are triples (M, t, u): M in GL2(Z/k), a translation vector t in
    (Z/k)^(2g), and a unit u mod f with det M = u mod gcd(k, f).
    """

    def __init__(self, k: int, f: int, g: int = 0):
        _require_squarefree(k)
        if k**4 * euler_phi(f) * k**(2 * g) > BRUTE_FORCE_CAPACITY:
            raise CapacityError(f"explicit model for k={k}, f={f}, g={g} is too large")
        self.k, self.f, self.g = k, f, g
        self.d = gcd(k, f)
        self._units = tuple(u for u in range(f) if gcd(u, f) == 1) if f > 1 else (0,)

    def elements(self):
        k, f, g, d = self.k, self.f, self.g, self.d
        for m in _gl2_elements(k):
            det = _det(m, k)
            for t in product(range(k), repeat=2 * g):
                for u in self._units:
                    if d == 1 or (det - u) % d == 0:
                        yield (m, t, u)

    def order(self) -> int:
        return (
            self.k**(2 * self.g)
            * gl2_order(self.k)
            * euler_phi(self.f)
            // euler_phi(self.d)
        )

    def count(self, predicate) -> int:
        return sum(1 for el in self.elements() if predicate(*el))


def brute_force_count(k: int, f: int, predicate, g: int = 0) -> int:
    """Exact count of model elements (M, t, u) satisfying the predicate."""
    return ExplicitGroupModel(k, f, g).count(predicate)


def restrict_element(m: tuple, t: tuple, q: int) -> tuple:
    """Restriction of a mod-k element to the mod-q layer (CRT projection)."""
    if q == 1:
        return ((0, 0, 0, 0), tuple(0 for _ in t))
    return (tuple(x % q for x in m), tuple(x % q for x in t))


def is_identity_at(m: tuple, t: tuple, q: int) -> bool:
    """True iff the element restricts to the identity on the mod-q layer."""
    if q == 1:
        return True
    mq, tq = restrict_element(m, t, q)
    return mq == (1 % q, 0, 0, 1 % q) and all(x == 0 for x in tq)


# ---------------------------------------------------------------------------
# empirical image probe


@dataclass(frozen=True)
class ProbeVerdict:
    q: int
    consistent_with_surjective: bool
    missing_classes: tuple
    samples: int


def required_frobenius_classes(q: int) -> frozenset:
    """(trace, det) pairs realized by GL2(F_q): every pair with det != 0."""
    return frozenset((t, d) for t in range(q) for d in range(1, q))


def image_probe(curve: CurveSpec, q: int, prime_budget: int,
                scan_limit: int = 2_000_000) -> ProbeVerdict:
    """Test mod-q Frobenius data against the full-matrix-group expectation.

    Samples (a_p mod q, p mod q) over good primes; a class of GL2(F_q) that
    never shows up within the budget is strong evidence (Chebotarev) that
    the mod-q image is a proper subgroup.
    """
    if q > 13:
        raise ValueError("probe supports q <= 13 only")
    if prime_budget < 1:
        raise InsufficientSamples(f"prime budget {prime_budget} is not positive")
    needed = set(required_frobenius_classes(q))
    seen: set = set()
    samples = 0
    for p in sieve_primes(3, scan_limit):
        if samples >= prime_budget:
            break
        if p == q:
            continue
        try:
            rc = reduce_curve(curve, p)
        except ExcludedPrime:
            continue
        _, a_p = count_points(rc)
        seen.add((a_p % q, p % q))
        samples += 1
        if not needed - seen:
            break
    if samples == 0:
        raise InsufficientSamples(f"no usable primes below {scan_limit}")
    missing = tuple(sorted(needed - seen))
    if missing and samples < prime_budget:
        raise InsufficientSamples(
            f"only {samples} usable primes below {scan_limit}, needed {prime_budget}"
        )
    return ProbeVerdict(q, not missing, missing, samples)
