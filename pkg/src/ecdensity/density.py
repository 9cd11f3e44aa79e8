"""Density series with certified tails, Euler products and error envelopes.

Every density value (series terms, partial sums, Euler factors, tails) is an
exact rational; floating point enters only for the logarithmic integral and
the cutoff/envelope formulas, which are trend tools rather than bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import mpmath

from .galois import CongruenceCondition, GenericImageModel, delta_CF_k
from .primes import CapacityError, sieve_primes, squarefree_stream

# li(2); the logarithmic integral is normalized as li(x) = li(2) + int_2^x dt/log t.
LI_AT_2 = 1.0451637801174927848


class InvalidBudget(ValueError):
    """Exponent constants violate the admissibility constraints."""


class InvalidDescriptor(ValueError):
    """Family tail data cannot certify a convergent tail."""


class NotMultiplicative(ValueError):
    """Euler products require a multiplicative family."""


@dataclass
class FamilyDescriptor:
    """Provider of exact-rational series terms delta_k plus tail metadata.

    The tail data promises delta_k <= tail_constant / k**tail_exponent for
    every squarefree k, which is what certifies the truncation intervals.
    """

    delta: Callable[[int], Fraction]
    multiplicative: bool = False
    tail_constant: Fraction = Fraction(1)
    tail_exponent: Fraction = Fraction(3, 2)


@dataclass(frozen=True)
class DensityInterval:
    """Exact truncated value plus a certified bound on the discarded tail."""

    center: Fraction
    tail: Fraction
    truncation: int

    def __post_init__(self) -> None:
        if self.tail < 0:
            raise ValueError("tail bound must be non-negative")

    @property
    def low(self) -> Fraction:
        return self.center - self.tail

    @property
    def high(self) -> Fraction:
        return self.center + self.tail

    @property
    def width(self) -> Fraction:
        return 2 * self.tail

    def contains(self, value) -> bool:
        return self.low <= value <= self.high

    def overlaps(self, other: "DensityInterval") -> bool:
        return self.low <= other.high and other.low <= self.high


@dataclass(frozen=True)
class ErrorBudget:
    """The exponent constants (alpha, beta, gamma) plus auxiliary pairs."""

    alpha: Fraction
    beta: Fraction
    gamma: Fraction = Fraction(0)
    aux: tuple = ()

    def validate(self) -> None:
        a, b, g = Fraction(self.alpha), Fraction(self.beta), Fraction(self.gamma)
        if a <= Fraction(1, 2) or b < 0 or g < 0:
            raise InvalidBudget("need alpha > 1/2 and beta, gamma >= 0")
        if Fraction(1, 2) + (a - Fraction(1, 2)) * (1 + g) / (b + g + 1) >= 1:
            raise InvalidBudget("main error exponent is not < 1")
        for ai, bi in self.aux:
            if Fraction(ai) - Fraction(bi) * (a - Fraction(1, 2)) / (g + b + 1) >= 1:
                raise InvalidBudget(f"auxiliary pair ({ai}, {bi}) is not admissible")


# alpha=3/2, beta=2, gamma=0 with auxiliary pair (1, 1): the elliptic-curve case.
GENERIC_CURVE_BUDGET = ErrorBudget(Fraction(3, 2), Fraction(2), Fraction(0),
                                   ((Fraction(1), Fraction(1)),))


# ---------------------------------------------------------------------------
# series evaluation


def truncated_series(desc: FamilyDescriptor, y: int) -> Fraction:
    """Exact partial sum of mu(k) * delta_k over squarefree k <= y."""
    if y < 1:
        raise ValueError("truncation point must be >= 1")
    total = Fraction(0)
    for term in squarefree_stream(y):
        total += term.mu * desc.delta(term.k)
    return total


def _floor_root(n: int, d: int) -> int:
    """floor(n ** (1/d)) for integers n >= 1, d >= 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    r = round(n ** (1.0 / d))
    while r**d > n:
        r -= 1
    while (r + 1) ** d <= n:
        r += 1
    return r


def _rational_upper_inverse_power(y: int, r: Fraction) -> Fraction:
    """A rational upper bound on y ** (-r) for y >= 1 and rational r > 0."""
    num, den = r.numerator, r.denominator
    root = _floor_root(y**num, den)
    return Fraction(1, max(root, 1))


def tail_bound(desc: FamilyDescriptor, y: int) -> Fraction:
    """Rational upper bound on sum_{k > y} tail_constant / k**tail_exponent.

    Integral comparison plus the first omitted term; monotone in y.
    """
    e = Fraction(desc.tail_exponent)
    c = Fraction(desc.tail_constant)
    if e <= 1:
        raise InvalidDescriptor("tail exponent must exceed 1")
    if c < 0:
        raise InvalidDescriptor("tail constant must be non-negative")
    integral = c / (e - 1) * _rational_upper_inverse_power(y, e - 1)
    first_term = c * _rational_upper_inverse_power(y + 1, e)
    return integral + first_term


def density_with_interval(desc: FamilyDescriptor, y: int) -> DensityInterval:
    """Truncated series plus certified tail: an interval containing the limit."""
    return DensityInterval(truncated_series(desc, y), tail_bound(desc, y), y)


def euler_product(desc: FamilyDescriptor, Q: int) -> DensityInterval:
    """prod_{q <= Q} (1 - delta_q) with an interval for the omitted factors."""
    if not desc.multiplicative:
        raise NotMultiplicative("Euler product needs a multiplicative family")
    prod = Fraction(1)
    for q in sieve_primes(2, Q):
        prod *= 1 - desc.delta(q)
    t = min(tail_bound(desc, Q), Fraction(1))
    # the omitted factors lie in [1 - sum_{q > Q} delta_q, 1]
    half = prod * t / 2
    return DensityInterval(prod - half, half, Q)


def partial_density(l: int, desc: FamilyDescriptor) -> Fraction:
    """sum over k | l of mu(k) * delta_k, for squarefree l."""
    from .primes import factorize

    factors = factorize(l)
    if len(set(factors)) != len(factors):
        raise ValueError(f"l={l} is not squarefree")
    total = Fraction(0)
    for mask in range(1 << len(factors)):
        k, mu = 1, 1
        for i, q in enumerate(factors):
            if mask >> i & 1:
                k *= q
                mu = -mu
        total += mu * desc.delta(k)
    return total


# ---------------------------------------------------------------------------
# positivity and family comparison


@dataclass(frozen=True)
class PositivityVerdict:
    kind: str  # "zero" | "positive" | "inconclusive"
    lower_bound: "Fraction | None" = None
    reason: str = ""


def positivity_check(desc: FamilyDescriptor, emptiness_flags: dict,
                     Q: int = 100) -> PositivityVerdict:
    """Apply the zero criterion and the Euler-product positivity criterion."""
    if any(emptiness_flags.values()):
        empty = sorted(q for q, flag in emptiness_flags.items() if flag)
        return PositivityVerdict("zero", Fraction(0), f"empty class at q={empty[0]}")
    if not desc.multiplicative:
        return PositivityVerdict("inconclusive", None, "family is not multiplicative")
    if Fraction(desc.tail_exponent) <= 1:
        return PositivityVerdict("inconclusive", None, "tail does not converge")
    for q in sieve_primes(2, Q):
        if desc.delta(q) >= 1:
            return PositivityVerdict("inconclusive", None, f"delta at q={q} is >= 1")
    interval = euler_product(desc, Q)
    if interval.low > 0:
        return PositivityVerdict("positive", interval.low, "Euler product lower bound")
    return PositivityVerdict("inconclusive", None, "Euler product bound not positive")


@dataclass(frozen=True)
class GroupLevel:
    """One prime level of an explicit family: elements and a marked class."""

    elements: tuple
    marked: frozenset

    def __post_init__(self) -> None:
        if not set(self.marked) <= set(self.elements):
            raise ValueError("marked class must be a subset of the elements")


@dataclass(frozen=True)
class ComparisonVerdict:
    ok: bool
    violated: "str | None"
    left_count: int = 0
    right_count: int = 0
    index: int = 0


COMPARISON_CAPACITY = 10**6


def compare_families(primary: dict, aux: dict, containment: dict) -> ComparisonVerdict:
    """Check the subfamily comparison hypotheses on explicit data.

    primary/aux map primes to GroupLevel; containment maps each aux prime q'
    to (q, restriction) where restriction sends primary elements at q onto
    aux elements at q'.  On success the counting inequality certifying
    density domination is returned with both counts and the field index.
    """
    if sum(len(g.elements) for g in primary.values()) > COMPARISON_CAPACITY:
        raise CapacityError("comparison family data too large")
    if set(containment) != set(aux):
        return ComparisonVerdict(False, "hypothesis-1: aux prime without containment data")
    targets = {q for q, _ in containment.values()}
    if not targets <= set(primary):
        return ComparisonVerdict(False, "hypothesis-1: containment target missing from primary")
    if targets != set(primary):
        return ComparisonVerdict(False, "hypothesis-1: primary field containing no aux field")
    for qp, (q, restrict) in containment.items():
        level, sub = primary[q], aux[qp]
        image = {restrict(e) for e in level.elements}
        if image != set(sub.elements):
            return ComparisonVerdict(False, f"restriction at q'={qp} is not onto")
        for e in level.elements:
            if restrict(e) in sub.marked and e not in level.marked:
                return ComparisonVerdict(False, f"hypothesis-3: preimage escapes the class at q={q}")
    left = 1
    big = 1
    for level in primary.values():
        left *= len(level.marked)
        big *= len(level.elements)
    right = 1
    small = 1
    for sub in aux.values():
        right *= len(sub.marked)
        small *= len(sub.elements)
    if big % small:
        return ComparisonVerdict(False, "index is not integral")
    index = big // small
    return ComparisonVerdict(left >= index * right, None, left, right, index)


# ---------------------------------------------------------------------------
# cutoffs and envelopes


def cutoff_s(x: float) -> float:
    """The largest index whose splitting condition can still fail below x."""
    if x <= 0:
        raise ValueError("x must be positive")
    return 2.0 * math.sqrt(x)


def cutoff_y(x: float, budget: ErrorBudget) -> float:
    """The main/error split point (x^(alpha-1/2) / log x)^(1/(beta+gamma+1))."""
    budget.validate()
    if x <= math.e:
        raise ValueError("x must exceed e")
    a, b, g = float(budget.alpha), float(budget.beta), float(budget.gamma)
    return (x ** (a - 0.5) / math.log(x)) ** (1.0 / (b + g + 1.0))


def envelope_exponents(budget: ErrorBudget) -> tuple[Fraction, Fraction]:
    """Exact exponent pair (power of x, power of log x) of the error envelope."""
    budget.validate()
    a, b, g = Fraction(budget.alpha), Fraction(budget.beta), Fraction(budget.gamma)
    ratio = (1 + g) / (b + g + 1)
    return Fraction(1, 2) + (a - Fraction(1, 2)) * ratio, 1 - ratio


def error_envelope(x: float, budget: ErrorBudget) -> float:
    """Shape of the remainder: x^e1 * (log x)^e2 with constant 1 (trend only)."""
    e1, e2 = envelope_exponents(budget)
    return x ** float(e1) * math.log(x) ** float(e2)


def tail_term_envelope(x: float, budget: ErrorBudget) -> float:
    """Shape of the truncation-tail contribution: y(x)^(-1/2) * x / log x."""
    return cutoff_y(x, budget) ** -0.5 * x / math.log(x)


def chebotarev_error(x: float, class_size: float, group_size: float,
                     log_disc: float, degree_over_Q: float) -> tuple[float, float]:
    """(main term, error envelope) of the effective equidistribution count.

    The envelope carries an O-constant of 1: it is a shape for trend plots,
    not a proven bound.
    """
    if min(x, class_size, group_size, degree_over_Q) <= 0 or log_disc < 0:
        raise ValueError("inputs must be positive")
    ratio = class_size / group_size
    main = ratio * log_integral(x)
    envelope = ratio * math.sqrt(x) * (log_disc + degree_over_Q * math.log(x))
    return main, envelope


def discriminant_log_bound(n: int, log_dK: float, ramified_primes,
                           degree_over_Q: float) -> float:
    """Upper bound on log of the extension discriminant from ramification data."""
    if n < 1:
        raise ValueError("degree n must be >= 1")
    ram = sum(math.log(p) for p in ramified_primes)
    return n * log_dK + degree_over_Q * (1 - 1 / n) * ram + degree_over_Q * math.log(n)


def log_integral(x: float) -> float:
    """li(x) normalized with li(2) = LI_AT_2; strictly increasing on [2, inf)."""
    if x < 2:
        raise ValueError("log_integral is defined for x >= 2")
    return float(mpmath.li(x))


# ---------------------------------------------------------------------------
# descriptors for the curve-model families


def _tail_constant(model: GenericImageModel) -> Fraction:
    """c with delta_k <= c / k^3 for the model (worst factor is q = 2)."""
    c = Fraction(1)
    specials = {2} | set(model.degree_overrides)
    for q in specials:
        deg = model.degree_overrides.get(q, q**(2 * model.g) * (q * q - 1) * (q * q - q))
        c *= max(Fraction(1), Fraction(q**3, deg))
    return c


def cyclicity_family(model: GenericImageModel,
                     cond: "CongruenceCondition | None" = None) -> FamilyDescriptor:
    """Series family for the primitive-cyclic count under the model.

    Without a congruence condition (or with f = 1) the family is
    multiplicative and its Euler product applies.
    """
    if cond is None:
        cond = CongruenceCondition.trivial()
    return FamilyDescriptor(
        delta=lambda k: delta_CF_k(model, k, cond),
        multiplicative=(cond.f == 1),
        tail_constant=_tail_constant(model),
        tail_exponent=Fraction(3),
    )
