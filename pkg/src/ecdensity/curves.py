"""Reduction of a rational elliptic curve modulo p.

Per prime this computes #E(F_p), the trace a_p, the abelian group structure
Z/d1 x Z/d2 with an explicit basis, the coordinates of the reduced rational
points in that basis, and the invariant factors of the quotient by the
subgroup they generate.  Points are counted naively for small p and by
baby-step giant-step order finding (on the curve and its quadratic twist)
for larger p; the group structure is certified by exhibiting independent
points, never by trusting a sampling heuristic alone.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .primes import factor_counts, factorize

_NAIVE_LIMIT = 2048
_DLOG_BRUTE = 64


class ExcludedPrime(Exception):
    """The prime lies in the excluded set S and must be skipped."""


def _to_fraction(v) -> Fraction:
    if isinstance(v, (Fraction, int)):
        return Fraction(v)
    return Fraction(str(v))


@dataclass
class CurveSpec:
    """y^2 = x^3 + a*x + b over Q with a finite list of rational points."""

    a: int
    b: int
    points: tuple = ()
    conductor_support: frozenset = None

    def __post_init__(self) -> None:
        if 4 * self.a**3 + 27 * self.b**2 == 0:
            raise ValueError("singular curve: 4a^3 + 27b^2 = 0")
        pts = []
        for pt in self.points:
            if pt is None:
                pts.append(None)
                continue
            x, y = _to_fraction(pt[0]), _to_fraction(pt[1])
            if y * y != x**3 + self.a * x + self.b:
                raise ValueError(f"point {pt} is not on the curve")
            pts.append((x, y))
        self.points = tuple(pts)
        if self.conductor_support is None:
            self.conductor_support = frozenset(factorize(abs(self.discriminant)))
        else:
            self.conductor_support = frozenset(self.conductor_support)
        self._excluded: dict[int, frozenset] = {}

    @property
    def discriminant(self) -> int:
        return -16 * (4 * self.a**3 + 27 * self.b**2)

    def denominator_primes(self) -> frozenset:
        primes: set[int] = set()
        for pt in self.points:
            if pt is None:
                continue
            for coord in pt:
                primes.update(factorize(coord.denominator))
        return frozenset(primes)

    def excluded_primes(self, f: int = 1) -> frozenset:
        """The set S: p | 2N, p | f, or p divides a point denominator."""
        cached = self._excluded.get(f)
        if cached is None:
            s = {2} | set(self.conductor_support) | set(self.denominator_primes())
            if f > 1:
                s.update(factorize(f))
            cached = self._excluded[f] = frozenset(s)
        return cached


@dataclass(frozen=True)
class ReducedCurve:
    p: int
    a: int
    b: int


@dataclass
class GroupStructure:
    """E(F_p) ~ Z/d1 x Z/d2 with d1 | d2, basis (P1 of order d1, P2 of order d2)."""

    n: int
    d1: int
    d2: int
    basis: tuple = (None, None)


@dataclass
class ReductionRecord:
    p: int
    n: int
    a_p: int
    structure: GroupStructure
    quotient_invariants: tuple[int, int] = (1, 1)
    residue: int = 0


# ---------------------------------------------------------------------------
# group law


def ec_add(P, Q, a: int, p: int):
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return None
        lam = (3 * x1 * x1 + a) * pow(2 * y1, p - 2, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, p - 2, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return (x3, (lam * (x1 - x3) - y1) % p)


def ec_neg(P, p: int):
    if P is None:
        return None
    return (P[0], (-P[1]) % p)


def ec_mul(k: int, P, a: int, p: int):
    if P is None or k == 0:
        return None
    if k < 0:
        k, P = -k, ec_neg(P, p)
    R = None
    while k:
        if k & 1:
            R = ec_add(R, P, a, p)
        k >>= 1
        if k:
            P = ec_add(P, P, a, p)
    return R


def on_curve(P, a: int, b: int, p: int) -> bool:
    if P is None:
        return True
    x, y = P
    return (y * y - (x * x * x + a * x + b)) % p == 0


# ---------------------------------------------------------------------------
# square roots mod p


def _least_nonresidue(p: int) -> int:
    g = 2
    while pow(g, (p - 1) // 2, p) != p - 1:
        g += 1
    return g


def sqrt_mod(z: int, p: int) -> int:
    """A square root of the quadratic residue z mod odd prime p (Tonelli-Shanks)."""
    z %= p
    if z == 0:
        return 0
    if p % 4 == 3:
        return pow(z, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    c = pow(_least_nonresidue(p), q, p)
    x = pow(z, (q + 1) // 2, p)
    t = pow(z, q, p)
    m = s
    while t != 1:
        t2, i = t * t % p, 1
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        x = x * b % p
        t = t * b * b % p
        c = b * b % p
        m = i
    return x


def _random_point(p: int, a: int, b: int, rng: random.Random):
    while True:
        x = rng.randrange(p)
        z = (x * x % p * x + a * x + b) % p
        if z == 0:
            return (x, 0)
        if pow(z, (p - 1) // 2, p) == 1:
            y = sqrt_mod(z, p)
            return (x, y if rng.randrange(2) else p - y)


# ---------------------------------------------------------------------------
# point counting


def reduce_curve(curve: CurveSpec, p: int, f: int = 1) -> ReducedCurve:
    """Reduce mod p, or raise ExcludedPrime when p is in the excluded set S."""
    if p in curve.excluded_primes(f):
        raise ExcludedPrime(f"p={p} divides 2N, f, or a point denominator")
    if (4 * curve.a**3 + 27 * curve.b**2) % p == 0:
        raise ExcludedPrime(f"p={p} divides the discriminant")
    return ReducedCurve(p, curve.a % p, curve.b % p)


@lru_cache(maxsize=64)
def _sqrt_counts(p: int) -> bytes:
    """tbl[t] = number of y in F_p with y^2 = t."""
    tbl = bytearray(p)
    for y in range(p):
        tbl[y * y % p] += 1
    return bytes(tbl)


def _count_naive(p: int, a: int, b: int) -> int:
    tbl = _sqrt_counts(p)
    n = 1
    for x in range(p):
        n += tbl[(x * x % p * x + a * x + b) % p]
    return n


def _point_order(P, multiple: int, a: int, p: int) -> int:
    """The exact order of P given any multiple of it."""
    o = multiple
    for q in set(factorize(multiple)):
        while o % q == 0 and ec_mul(o // q, P, a, p) is None:
            o //= q
    return o


def _bsgs_annihilator(P, a: int, p: int) -> int:
    """Some m in the Hasse interval [p+1-2sqrt(p), p+1+2sqrt(p)] with m*P = O."""
    t = math.isqrt(4 * p)
    lo = p + 1 - t
    width = 2 * t + 1
    s = math.isqrt(width - 1) + 1
    baby: dict = {}
    R = None
    for i in range(s):
        if R not in baby:
            baby[R] = i
        R = ec_add(R, P, a, p)
    T = ec_neg(ec_mul(lo, P, a, p), p)
    step = ec_neg(ec_mul(s, P, a, p), p)
    for g in range(s + 1):
        if T in baby:
            j = g * s + baby[T]
            if j < width:
                return lo + j
        T = ec_add(T, step, a, p)
    raise ArithmeticError(f"no annihilator in the Hasse interval for p={p}")


def _count_bsgs(p: int, a: int, b: int) -> int:
    """Order of E(F_p) via BSGS on the curve and its quadratic twist (Mestre)."""
    rng = random.Random(f"count:{p}:{a}:{b}")
    t = math.isqrt(4 * p)
    lo, hi = p + 1 - t, p + 1 + t
    g = _least_nonresidue(p)
    twist_a = a * g % p * g % p
    twist_b = b * g % p * g % p * g % p
    exps = [1, 1]  # lcm of sampled point orders on E and on the twist
    for rounds in range(60):
        side = rounds % 2
        aa, bb = (a, b) if side == 0 else (twist_a, twist_b)
        P = _random_point(p, aa, bb, rng)
        m = _bsgs_annihilator(P, aa, p)
        exps[side] = math.lcm(exps[side], _point_order(P, m, aa, p))
        e0, e1 = exps
        start = ((lo + e0 - 1) // e0) * e0
        cands = [n for n in range(start, hi + 1, e0) if (2 * p + 2 - n) % e1 == 0]
        if len(cands) == 1:
            return cands[0]
    return _count_naive(p, a, b)  # unreachable for p > 457, kept as a guard


def count_points(rc: ReducedCurve) -> tuple[int, int]:
    """(#E(F_p), a_p) with a_p = p + 1 - #E(F_p)."""
    p = rc.p
    n = _count_naive(p, rc.a, rc.b) if p < _NAIVE_LIMIT else _count_bsgs(p, rc.a, rc.b)
    return n, p + 1 - n


# ---------------------------------------------------------------------------
# discrete logarithms in cyclic subgroups


def _dlog_prime(R, gamma, q: int, a: int, p: int):
    """x in [0, q) with x*gamma = R, gamma of prime order q; None if no solution."""
    if R is None:
        return 0
    if q <= _DLOG_BRUTE:
        M = gamma
        for j in range(1, q):
            if M == R:
                return j
            M = ec_add(M, gamma, a, p)
        return None
    s = math.isqrt(q - 1) + 1
    baby: dict = {}
    M = None
    for i in range(s):
        if M not in baby:
            baby[M] = i
        M = ec_add(M, gamma, a, p)
    step = ec_neg(ec_mul(s, gamma, a, p), p)
    T = R
    for g in range(s + 1):
        if T in baby:
            x = g * s + baby[T]
            if x < q:
                return x
        T = ec_add(T, step, a, p)
    return None


def _dlog_in_cyclic(R, G, order: int, a: int, p: int):
    """x with x*G = R inside the cyclic group <G> of the given order, else None.

    Pohlig-Hellman over the prime-power factors of the order.
    """
    if R is None:
        return 0
    x, mod = 0, 1
    for q, v in factor_counts(order).items():
        qv = q**v
        cof = order // qv
        Rq = ec_mul(cof, R, a, p)
        Gq = ec_mul(cof, G, a, p)
        gamma = ec_mul(qv // q, Gq, a, p)
        t = 0
        for i in range(v):
            shifted = ec_add(Rq, ec_neg(ec_mul(t, Gq, a, p), p), a, p)
            probe = ec_mul(qv // q ** (i + 1), shifted, a, p)
            digit = _dlog_prime(probe, gamma, q, a, p)
            if digit is None:
                return None
            t += digit * q**i
        g, inv, _ = _egcd(mod, qv)
        x = x + mod * ((t - x) * inv % qv)
        mod *= qv
    x %= order
    return x if ec_mul(x, G, a, p) == R else None


def _egcd(a: int, b: int):
    if b == 0:
        return a, 1, 0
    g, u, v = _egcd(b, a % b)
    return g, v, u - (a // b) * v


# ---------------------------------------------------------------------------
# group structure


@lru_cache(maxsize=200_000)
def _cubic_splits(p: int, a: int, b: int) -> bool:
    """True iff x^3 + a x + b has three roots mod p, i.e. E[2] <= E(F_p)."""

    # x^p == x mod (x^3 + a x + b) iff the (squarefree) cubic splits completely.
    def mulmod(u, v):
        c = [0] * 5
        for i, ui in enumerate(u):
            if ui:
                for j, vj in enumerate(v):
                    c[i + j] = (c[i + j] + ui * vj) % p
        c[2] = (c[2] - c[4] * a) % p
        c[1] = (c[1] - c[4] * b - c[3] * a) % p
        c[0] = (c[0] - c[3] * b) % p
        return (c[0], c[1], c[2])

    result, base, e = (1, 0, 0), (0, 1, 0), p
    while e:
        if e & 1:
            result = mulmod(result, base)
        e >>= 1
        if e:
            base = mulmod(base, base)
    return result == (0, 1, 0)


def _combine_to_order(samples: list, e: int, a: int, p: int):
    """A point of order e from samples whose orders have lcm e."""
    point = None
    for q, v in factor_counts(e).items():
        qv = q**v
        for P, o in samples:
            if o % qv == 0:
                point = ec_add(point, ec_mul(o // qv, P, a, p), a, p)
                break
        else:
            return None
    return point


def _try_certify(rc: ReducedCurve, n: int, e: int, d1: int, samples: list,
                 rng: random.Random):
    """Certify the candidate structure (d1, e) by exhibiting independent points."""
    p, a = rc.p, rc.a
    P2 = _combine_to_order(samples, e, a, p)
    if P2 is None:
        return None
    if d1 == 1:
        return GroupStructure(n, 1, e, (None, P2))
    n_counts = factor_counts(n)
    P1 = None
    for q, aq in factor_counts(d1).items():
        bq = n_counts[q] - aq
        if aq > bq or (p - 1) % q**aq != 0:
            return None
        if q == 2 and not _cubic_splits(p, a, rc.b):
            return None
        qb = q**bq
        qa = q**aq
        Qq = ec_mul(e // qb, P2, a, p)  # order q^bq
        cof = n // (qa * qb)
        R_q = None
        for _ in range(10):
            X = ec_mul(cof, _random_point(p, a, rc.b, rng), a, p)
            # relative order of X w.r.t. <Qq>: smallest j with q^j X in <Qq>
            Y, j = X, 0
            z = _dlog_in_cyclic(Y, Qq, qb, a, p)
            while z is None and j < aq:
                Y = ec_mul(q, Y, a, p)
                j += 1
                z = _dlog_in_cyclic(Y, Qq, qb, a, p)
            if z is None or j < aq:
                continue  # X does not realize the full complement order
            if z % qa:
                continue  # inconsistent with the candidate exponent split
            R = ec_add(X, ec_neg(ec_mul(z // qa, Qq, a, p), p), a, p)
            if ec_mul(qa, R, a, p) is None and ec_mul(qa // q, R, a, p) is not None:
                R_q = R
                break
        if R_q is None:
            return None
        P1 = ec_add(P1, R_q, a, p)
    return GroupStructure(n, d1, e, (P1, P2))


def group_structure(rc: ReducedCurve, n: int) -> GroupStructure:
    """Invariant factors (d1, d2) of E(F_p) with a certified basis."""
    p, a = rc.p, rc.a
    if n == 1:
        return GroupStructure(1, 1, 1, (None, None))
    rng = random.Random(f"structure:{p}:{rc.a}:{rc.b}")
    samples: list = []
    e = 1
    for attempt in range(400):
        P = _random_point(p, a, rc.b, rng)
        o = _point_order(P, n, a, p)
        samples.append((P, o))
        e = math.lcm(e, o)
        if n % e:
            continue
        d1 = n // e
        if e % d1 or (p - 1) % d1:
            continue
        if d1 % 2 == 0 and not _cubic_splits(p, a, rc.b):
            continue  # full 2-torsion impossible; the exponent must grow
        st = _try_certify(rc, n, e, d1, samples, rng)
        if st is not None:
            _check_structure(st, rc)
            return st
    raise ArithmeticError(f"group structure certification stalled at p={p}")


def _check_structure(st: GroupStructure, rc: ReducedCurve) -> None:
    if st.d1 * st.d2 != st.n or st.d2 % st.d1 or (rc.p - 1) % st.d1:
        raise ArithmeticError(f"inconsistent structure {st} at p={rc.p}")


def decompose_point(P, st: GroupStructure, rc: ReducedCurve) -> tuple[int, int]:
    """(u, v) with P = u*P1 + v*P2, 0 <= u < d1, 0 <= v < d2."""
    P1, P2 = st.basis
    p, a = rc.p, rc.a
    if st.d2 == 1:
        return (0, 0)
    for u in range(st.d1):
        R = ec_add(P, ec_neg(ec_mul(u, P1, a, p), p), a, p) if u else P
        v = _dlog_in_cyclic(R, P2, st.d2, a, p)
        if v is not None:
            return (u, v)
    raise ArithmeticError("point does not decompose in the given basis")


def quotient_invariants(st: GroupStructure, images: list) -> tuple[int, int]:
    """Invariant factors (e1, e2), e1 | e2, of (Z/d1 x Z/d2) / <images>.

    Computed from the determinantal divisors of the integer relation matrix
    with rows (d1, 0), (0, d2) and the image coordinate pairs (Smith form).
    """
    rows = [(st.d1, 0), (0, st.d2)] + [(u, v) for u, v in images]
    g1 = 0
    for u, v in rows:
        g1 = math.gcd(g1, math.gcd(u, v))
    g2 = 0
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            minor = rows[i][0] * rows[j][1] - rows[i][1] * rows[j][0]
            g2 = math.gcd(g2, minor)
    if g1 == 0:
        return (1, 1)
    return (g1, g2 // g1)


# ---------------------------------------------------------------------------
# the per-prime pipeline and the splitting criteria


def _reduce_rational(v: Fraction, p: int) -> int:
    return v.numerator * pow(v.denominator, p - 2, p) % p


def reduce_point(pt, p: int):
    if pt is None:
        return None
    return (_reduce_rational(pt[0], p), _reduce_rational(pt[1], p))


def reduction_record(curve: CurveSpec, p: int, f: int = 1) -> ReductionRecord:
    """Full per-prime data: counts, structure, quotient invariants, residue."""
    rc = reduce_curve(curve, p, f)
    n, a_p = count_points(rc)
    st = group_structure(rc, n)
    images = []
    for pt in curve.points:
        red = reduce_point(pt, p)
        if red is not None:
            images.append(decompose_point(red, st, rc))
    inv = quotient_invariants(st, images)
    return ReductionRecord(p, n, a_p, st, inv, p % f)


def is_primitive_cyclic(record: ReductionRecord) -> bool:
    """True iff the quotient by the reduced points is cyclic."""
    return record.quotient_invariants[0] == 1


def splitting_witness(record: ReductionRecord, q: int) -> bool:
    """True iff the quotient contains (Z/q)^2, i.e. q divides e1."""
    return record.quotient_invariants[0] % q == 0


def check_divisibility_relations(record: ReductionRecord, q: int) -> bool:
    """q | p-1, q^2 | #E(F_p) and q | a_p - 2 (must hold whenever the witness does)."""
    p = record.p
    return (
        (p - 1) % q == 0
        and record.n % (q * q) == 0
        and (record.a_p - 2) % q == 0
    )
