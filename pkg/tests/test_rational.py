import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from factories import random_generic_data
from nodedrat.errors import (
    CollisionError,
    DegenerateIndexError,
    IdentityMapError,
    IndexFormulaError,
    InvalidTripleError,
    LevelExceededError,
    NotFixedError,
    TooFewPointsError,
)
from nodedrat.lab import example2_maps
from nodedrat.poly import Poly, gcd, squarefree_decomposition
from nodedrat.rational import (
    CONSTANT,
    NEITHER,
    POLYNOMIAL,
    FixedPointData,
    Mobius,
    RationalMap,
    dynamical_index,
    fixed_points,
    from_fixed_point_data,
    from_principal_parts,
    is_polynomial_like,
    mobius_conjugate,
    mobius_from_triple,
    principal_part,
)
from nodedrat.roots import aberth, cluster_points, numeric_roots
from nodedrat.scalars import INF, context, decode, encode, exact

Q = exact


# --- scalars and polynomials ---------------------------------------------------------

def test_encode_decode_round_trip():
    ctx = context(256)
    z = ctx.mpc(1, 3) / 7
    assert decode(encode(z)) == z
    assert decode(encode(INF)) is INF
    assert decode(encode(Q((1, -2))), exact_mode=True) == Q((1, -2))
    assert encode(Q("3/4")) == ["3/4", "0"]


def test_poly_arithmetic_exact():
    p = Poly((1, 2, 1))
    q = Poly((1, 1))
    assert p // q == q and (p % q).is_zero()
    assert q ** 2 == p
    assert p.degree == 2 and p(Q(2)) == Q(9)
    assert gcd(p, Poly((-1, 0, 1))) == q


def test_squarefree_decomposition():
    p = Poly.from_roots([Q(1), Q(1), Q(1), Q(2)])
    parts = {m: f for f, m in squarefree_decomposition(p)}
    assert parts[3] == Poly((-1, 1)) and parts[1] == Poly((-2, 1))


def test_aberth_and_multiplicity_clustering():
    ctx = context(256)
    roots = [ctx.mpc(1, 1), ctx.mpc(-2), ctx.mpc(0, 3)]
    p = Poly.from_roots(roots)
    found = aberth(p)
    for r in roots:
        assert min(abs(r - z) for z in found) < 1e-60
    quad = Poly.from_roots([ctx.mpc(0.5, -0.25)] * 4 + [ctx.mpc(2)])
    assert sorted(m for _, m in numeric_roots(quad)) == [1, 4]
    assert cluster_points([0.0, 1e-12, 1.0], 1e-9) == [(0.5e-12, 2), (1.0, 1)]


# --- Moebius maps ------------------------------------------------------------------------

def test_triple_identity():
    assert mobius_from_triple(0, 1, INF).is_identity()


def test_triple_zero_inf_one():
    T = mobius_from_triple(0, INF, 1)
    assert T(Q(0)) == Q(0) and T(INF) == Q(1) and T(Q(1)) is INF
    z = Q(3)
    assert T(z) == z / (z - 1)


def test_triple_recovers_rescaling_chart():
    # (0, s + eps, s) -> (0, 1, INF) is z -> mu z / (z - s) with mu = eps / (s + eps)
    for s in (Q(-2), Q(2)):
        eps = Q("1/1000")
        S = mobius_from_triple(Q(0), s + eps, s)
        mu = eps / (s + eps)
        for z in (Q("3/7"), Q((1, 5))):
            assert S(z) == mu * z / (z - s)


def test_coincident_triple_rejected():
    with pytest.raises(InvalidTripleError):
        mobius_from_triple(1, 1, INF)


def test_conjugation_by_inversion():
    F = RationalMap.make((0, 0, 1))
    G = mobius_conjugate(F, Mobius(0, 1, 1, 0))
    assert G.num == F.num and G.den == F.den
    assert mobius_conjugate(F, Mobius.identity()).num == F.num


def test_conjugation_preserves_indices():
    rng = random.Random(3)
    ctx = context(256)
    for _ in range(100):
        F = from_fixed_point_data(random_generic_data(rng, rng.randint(2, 5)))
        a, b, c, d = (ctx.mpc(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(4))
        T = Mobius(a, b, c, d)
        G = mobius_conjugate(F, T)
        assert G.degree == F.degree
        for z, _ in fixed_points(F):
            w = T(z)
            if w is INF or abs(w) > 1e8:
                continue
            assert abs(dynamical_index(F, z) - dynamical_index(G, w)) < 1e-30


# --- fixed-point data ----------------------------------------------------------------------

def test_from_fixed_point_data_golden():
    data = FixedPointData(((Q(-1), Q(1)), (Q(0), Q(-1)), (Q(1), Q(1))))
    F = from_fixed_point_data(data)
    assert F.num == Poly((0, 2)) and F.den == Poly((1, 0, 1))


@pytest.mark.parametrize("entries, err", [
    (((0, 1), (1, -1), (2, 0.9)), IndexFormulaError),
    (((0, 1), (0, -1), (2, 1)), CollisionError),
    (((0, 1), (1, 0), (2, 0)), DegenerateIndexError),
    (((0, "1/2"), (1, "1/2")), TooFewPointsError),
])
def test_from_fixed_point_data_errors(entries, err):
    with pytest.raises(err):
        from_fixed_point_data(FixedPointData(tuple((Q(p), Q(l)) for p, l in entries)))


def test_round_trip_random_data():
    rng = random.Random(5)
    for _ in range(500):
        data = random_generic_data(rng, rng.randint(2, 8))
        F = from_fixed_point_data(data)
        fps = fixed_points(F)
        assert len(fps) == len(data)
        for p, lam in data.entries:
            z = min((z for z, _ in fps), key=lambda w: abs(w - p))
            assert abs(z - p) < 1e-20 and abs(dynamical_index(F, z) - lam) < 1e-20


def test_fixed_points_examples():
    assert dict(fixed_points(RationalMap.make((0, 0, 1)))) == {Q(0): 1, Q(1): 1, INF: 1}
    assert dict(fixed_points(RationalMap.make((0, 2), (1, 0, 1)))) == {Q(-1): 1, Q(0): 1, Q(1): 1}
    assert dict(fixed_points(RationalMap.make((0, 0, 1), (-1, 2)))) == {Q(0): 1, Q(1): 1, INF: 1}


def test_identity_rejected():
    with pytest.raises(IdentityMapError):
        fixed_points(RationalMap.make((0, 1)))


def test_dynamical_index_examples():
    F = RationalMap.make((0, 0, 1))
    assert dynamical_index(F, Q(1)) == Q(-1)
    assert dynamical_index(F, Q(0)) == Q(1)
    assert dynamical_index(F, INF) == Q(1)
    with pytest.raises(NotFixedError):
        dynamical_index(F, Q(2))


def test_index_formula_numeric_maps():
    rng = random.Random(9)
    ctx = context(256)
    for _ in range(200):
        d = rng.randint(2, 6)
        num = [ctx.mpc(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in range(d + 1)]
        den = [ctx.mpc(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in range(d + 1)]
        F = RationalMap.make(num, den)
        total = sum(dynamical_index(F, z) for z, _ in fixed_points(F))
        assert abs(total - 1) < 1e-40


# --- principal parts -----------------------------------------------------------------------

def test_principal_part_golden():
    F = example2_maps(2)
    pp = principal_part(F, Q(0), Q(1), INF, 3)
    assert pp.coeffs == (Q(-1), Q(1), Q(1)) and not pp.truncated


def test_principal_part_simple_point_is_index():
    F = RationalMap.make((0, 0, 1))
    assert principal_part(F, Q(1), Q(0), INF, 1).coeffs == (dynamical_index(F, Q(1)),)


def test_principal_part_first_coefficient_invariant():
    F = example2_maps(1)
    rng = random.Random(2)
    ctx = context(256)
    seen = set()
    for _ in range(20):
        u = ctx.mpc(rng.uniform(-3, 3), rng.uniform(-3, 3))
        v = ctx.mpc(rng.uniform(-3, 3), rng.uniform(-3, 3))
        pp = principal_part(F.to_numeric(256), ctx.mpc(0), u, v, 3)
        assert abs(pp.coeffs[0] + 1) < 1e-40
        seen.add(round(float(abs(pp.coeffs[1])), 6))
    assert len(seen) > 1          # the higher coefficients depend on (u, v)


def test_principal_part_level_exceeded():
    with pytest.raises(LevelExceededError):
        principal_part(example2_maps(1), Q(0), Q(1), INF, 2)


def test_from_principal_parts_with_free_infinity():
    F = from_principal_parts([(Q(1), (Q("3/10"),)), (Q(0), (Q("3/10"), Q("1/5")))], infinity=True)
    assert dynamical_index(F, INF) == Q("2/5")
    assert principal_part(F, Q(0), Q(1), INF, 2).coeffs == (Q("3/10"), Q("1/5"))


# --- polynomial-like classification ----------------------------------------------------------

def test_polynomial_like_examples():
    assert is_polynomial_like(RationalMap.make((0, 0, 1)))[0] == POLYNOMIAL
    assert is_polynomial_like(RationalMap.make((3,)))[0] == CONSTANT
    assert is_polynomial_like(from_fixed_point_data(random_generic_data(random.Random(1), 3)))[0] == NEITHER


def test_two_z_over_one_plus_z_squared_is_polynomial_conjugate():
    # 1 is totally invariant: F(z) = 1 forces (z - 1)^2 = 0.
    F = RationalMap.make((0, 2), (1, 0, 1))
    kind, T = is_polynomial_like(F)
    assert kind == POLYNOMIAL and T(Q(1)) is INF
    assert mobius_conjugate(F, T).den.degree == 0


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(-9, 9), st.integers(-9, 9)), min_size=3, max_size=5, unique=True),
       st.lists(st.integers(1, 9), min_size=5, max_size=5))
def test_exact_index_sum_property(points, weights):
    pts = [Q(p) for p in points]
    lams = [Q((w, 1)) for w in weights[:len(pts) - 1]]
    lams.append(Q(1) - sum(lams[1:], lams[0]))
    F = from_fixed_point_data(FixedPointData(tuple(zip(pts, lams))))
    assert all(dynamical_index(F, p) == lam for p, lam in zip(pts, lams))
