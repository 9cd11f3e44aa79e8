"""Independent brute-force oracles for cross-checking the library.

Everything here is deliberately naive and self-contained: its own group
law, its own point enumeration, set-based subgroup and quotient
computations.  Slow but obviously correct on small inputs.
"""

from __future__ import annotations

from math import gcd, isqrt


def trial_factor(n: int) -> dict:
    out = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def o_add(P, Q, a: int, p: int):
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2 and (y1 + y2) % p == 0:
        return None
    if P == Q:
        lam = (3 * x1 * x1 + a) * pow(2 * y1, p - 2, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, p - 2, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return (x3, (lam * (x1 - x3) - y1) % p)


def o_mul(k: int, P, a: int, p: int):
    R = None
    while k:
        if k & 1:
            R = o_add(R, P, a, p)
        P = o_add(P, P, a, p)
        k >>= 1
    return R


def sqrt_table(p: int) -> dict:
    """z -> sorted list of y with y^2 = z mod p."""
    table: dict = {}
    for y in range(p):
        table.setdefault(y * y % p, []).append(y)
    return table


def o_points(a: int, b: int, p: int, table=None) -> list:
    """Every point of the curve, identity first."""
    if table is None:
        table = sqrt_table(p)
    pts: list = [None]
    for x in range(p):
        z = (x * x * x + a * x + b) % p
        for y in table.get(z, ()):
            pts.append((x, y))
    return pts


def o_count(a: int, b: int, p: int) -> int:
    """Point count via Legendre symbols only."""
    n = p + 1
    for x in range(p):
        z = (x * x * x + a * x + b) % p
        if z == 0:
            continue
        n += 1 if pow(z, (p - 1) // 2, p) == 1 else -1
    return n


def o_structure(points: list, a: int, p: int) -> tuple[int, int]:
    """(d1, d2) with d1 | d2 and d1*d2 = n, by counting q^j-torsion."""
    n = len(points)
    half = [None] + [pt for pt in points[1:] if 0 < pt[1] <= (p - 1) // 2]
    axis = [pt for pt in points[1:] if pt[1] == 0]
    def torsion_count(q: int, j: int) -> int:
        # identity, the y = 0 points (order 2, relevant only for q = 2),
        # and the rest in +/- pairs of equal order
        if q == 2 and j == 1:
            return 1 + len(axis)
        c = 1 + (len(axis) if q == 2 else 0)
        c += 2 * sum(1 for pt in half[1:] if o_mul(q**j, pt, a, p) is None)
        return c

    d1 = 1
    for q, vn in trial_factor(n).items():
        if vn < 2 or (p - 1) % q:
            continue
        cap = min(vn // 2, trial_factor(p - 1).get(q, 0))
        aq = 0
        for j in range(1, cap + 1):
            if torsion_count(q, j) == q ** (2 * j):
                aq = j
            else:
                break
        d1 *= q**aq
    return d1, n // d1


def o_subgroup(gens: list, a: int, p: int) -> set:
    """Closure of the generators as a set of points (None = identity)."""
    H = {None}
    frontier = [None]
    while frontier:
        cur = frontier.pop()
        for g in gens:
            nxt = o_add(cur, g, a, p)
            if nxt not in H:
                H.add(nxt)
                frontier.append(nxt)
    return H


def o_quotient_invariants(points: list, images: list, a: int, p: int,
                          d2: int) -> tuple[int, int]:
    """Invariant factors (e1, e2) of E(F_p) / <images>, e1 | e2."""
    H = o_subgroup(images, a, p)
    n = len(points)
    N = n // len(H)
    if N == 1:
        return (1, 1)
    # coset representatives
    seen: set = set()
    reps = []
    for pt in points:
        if pt in seen:
            continue
        reps.append(pt)
        for h in H:
            seen.add(o_add(pt, h, a, p))
    divs = sorted(d for d in range(1, d2 + 1) if d2 % d == 0)
    cap = gcd(d2, N)  # the quotient exponent divides both d2 and its order
    exponent = 1
    for rep in reps:
        for m in divs:
            if o_mul(m, rep, a, p) in H:
                exponent = exponent * m // gcd(exponent, m)
                break
        if exponent == cap:
            break
    return (N // exponent, exponent)


def o_in_multiples(Q, q: int, points: list, a: int, p: int) -> bool:
    """Membership test Q in q*E(F_p) by direct image enumeration."""
    return Q in {o_mul(q, pt, a, p) for pt in points}


def o_li_riemann(x: float, steps: int = 200000) -> float:
    """Logarithmic integral li(x) by midpoint quadrature from 2."""
    import math

    li2 = 1.0451637801174927848
    if x == 2:
        return li2
    if steps % 2:
        steps += 1
    h = (x - 2) / steps
    total = 1.0 / math.log(2) + 1.0 / math.log(x)
    for i in range(1, steps):
        total += (4 if i % 2 else 2) / math.log(2 + i * h)
    return li2 + total * h / 3  # Simpson's rule
