import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecdensity.curves import (CurveSpec, ExcludedPrime, GroupStructure,
                              count_points, decompose_point, ec_add, ec_mul,
                              group_structure, is_primitive_cyclic,
                              quotient_invariants, reduce_curve, reduce_point,
                              reduction_record, splitting_witness, sqrt_mod)
from oracles import o_count, o_points, o_structure, sqrt_table


def test_curve_validation():
    with pytest.raises(ValueError):
        CurveSpec(0, 0)
    with pytest.raises(ValueError):
        CurveSpec(-3, 2)  # 4*(-27) + 27*4 = 0
    with pytest.raises(ValueError):
        CurveSpec(1, 1, ((0, 2),))  # (0, 2) not on y^2 = x^3 + x + 1


def test_excluded_primes():
    curve = CurveSpec(-16, 16, ((0, 4),))
    assert curve.excluded_primes() == frozenset({2, 37})
    assert curve.excluded_primes(4) == frozenset({2, 37})
    assert curve.excluded_primes(15) == frozenset({2, 3, 5, 37})
    with pytest.raises(ExcludedPrime):
        reduce_curve(curve, 37)


def test_denominator_primes_excluded():
    # (1/4, 9/8) lies on y^2 = x^3 + 5x/4... use a concrete rational point:
    # y^2 = x^3 - 2x + 1 contains (1/4, 7/8): 49/64 = 1/64 - 32/64 + 64/64? no.
    # Verified point: on y^2 = x^3 + 17, (1/4, 33/8): 1089/64 = 1/64 + 1088/64.
    from fractions import Fraction

    curve = CurveSpec(0, 17, ((Fraction(1, 4), Fraction(33, 8)),))
    assert 2 in curve.excluded_primes()


def test_sqrt_mod():
    for p in (5, 13, 97, 104729):
        for z in random.Random(p).sample(range(p), min(p, 20)):
            if pow(z, (p - 1) // 2, p) == 1:
                r = sqrt_mod(z, p)
                assert r * r % p == z


def test_group_law_matches_oracle():
    from oracles import o_add

    p, a, b = 101, 3, 7
    pts = o_points(a, b, p)
    rng = random.Random(0)
    for _ in range(200):
        P, Q = rng.choice(pts), rng.choice(pts)
        assert ec_add(P, Q, a, p) == o_add(P, Q, a, p)


def test_count_points_naive_range():
    rng = random.Random(1)
    for p in (5, 7, 11, 101, 499, 1009, 1999):
        table = sqrt_table(p)
        for _ in range(3):
            a, b = rng.randrange(p), rng.randrange(p)
            if (4 * a**3 + 27 * b**2) % p == 0:
                continue
            n, a_p = count_points(reduce_curve(CurveSpec(a, b), p))
            assert n == len(o_points(a, b, p, table))
            assert a_p == p + 1 - n


def test_count_points_bsgs_path():
    # primes above the naive threshold exercise the birthday-free BSGS counter
    for p, a, b in ((4099, 1, 6), (30011, 2, 3), (104729, 5, 7)):
        rc = reduce_curve(CurveSpec(a, b), p)
        n, a_p = count_points(rc)
        assert abs(a_p) <= 2 * p**0.5
        # Lagrange: every sampled point is annihilated by n
        rng = random.Random(42)
        from ecdensity.curves import _random_point

        for _ in range(5):
            P = _random_point(p, a, b, rng)
            assert ec_mul(n, P, a, p) is None


def test_known_record_small():
    rec = reduction_record(CurveSpec(-1, 0), 5)
    assert rec.n == 8 and rec.a_p == -2
    assert (rec.structure.d1, rec.structure.d2) == (2, 4)
    assert rec.quotient_invariants == (2, 4)
    assert not is_primitive_cyclic(rec)
    assert splitting_witness(rec, 2)


def test_structure_matches_oracle():
    rng = random.Random(7)
    for p in (5, 11, 19, 37, 61, 101, 163, 193):
        table = sqrt_table(p)
        for _ in range(4):
            a, b = rng.randrange(1, p), rng.randrange(p)
            if (4 * a**3 + 27 * b**2) % p == 0:
                continue
            rc = reduce_curve(CurveSpec(a, b), p)
            pts = o_points(a, b, p, table)
            st_lib = group_structure(rc, len(pts))
            assert (st_lib.d1, st_lib.d2) == o_structure(pts, a, p)


def test_decompose_point_roundtrip():
    curve = CurveSpec(-1, 0)
    for p in (5, 13, 17, 29, 41):
        rc = reduce_curve(curve, p)
        n, _ = count_points(rc)
        st = group_structure(rc, n)
        rng = random.Random(p)
        from ecdensity.curves import _random_point

        for _ in range(10):
            P = _random_point(p, rc.a, rc.b, rng)
            u, v = decompose_point(P, st, rc)
            R = ec_add(ec_mul(u, st.basis[0], rc.a, p), ec_mul(v, st.basis[1], rc.a, p), rc.a, p)
            assert R == P


def test_quotient_invariants_examples():
    st = GroupStructure(8, 2, 4)
    assert quotient_invariants(st, []) == (2, 4)
    assert quotient_invariants(st, [(1, 2)]) == (1, 4)
    assert quotient_invariants(st, [(0, 2)]) == (2, 2)
    assert quotient_invariants(st, [(0, 1)]) == (1, 2)
    assert quotient_invariants(st, [(1, 0), (0, 1)]) == (1, 1)
    cyclic = GroupStructure(7, 1, 7)
    assert quotient_invariants(cyclic, [(0, 3)]) == (1, 1)


def test_reduce_point_good_reduction():
    from fractions import Fraction

    curve = CurveSpec(0, 17, ((Fraction(1, 4), Fraction(33, 8)),))
    pt = reduce_point(curve.points[0], 5)
    x, y = pt
    assert y * y % 5 == (x**3 + 17) % 5


def _first_points(a, b, p, count):
    pts = []
    for x in range(p):
        z = (x**3 + a * x + b) % p
        if z and pow(z, (p - 1) // 2, p) == 1:
            pts.append((x, sqrt_mod(z, p)))
            if len(pts) == count:
                break
    return pts


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10**6), st.integers(min_value=0, max_value=3))
def test_scalar_mult_linearity(k, idx):
    p, a, b = 1009, 2, 3
    P = _first_points(a, b, p, 4)[idx]
    assert ec_add(ec_mul(k, P, a, p), P, a, p) == ec_mul(k + 1, P, a, p)
