import random

import pytest

from factories import random_generic_data, random_singular_map
from nodedrat.errors import ConventionError, IdentityMapError, UnstableError
from nodedrat.functions import (
    NodedFunction,
    NormalizationConvention,
    component_index_sums,
    decoration_distance,
    embed_vm,
    reduced_decoration,
    structures_equal,
    validate_noded_function,
)
from nodedrat.lab import example2_target
from nodedrat.rational import (
    FixedPointData,
    Mobius,
    RationalMap,
    fixed_points,
    from_fixed_point_data,
    from_principal_parts,
    mobius_conjugate,
)
from nodedrat.scalars import INF, context, exact
from nodedrat.spheres import Component, Marking, NodedSphere, PartialCrush, Puncture, apply_mobius

Q = exact


def codes(violations):
    return {v.code for v in violations}


def node_pair(shift=0):
    """Two ordinary components glued at INF by a retained node."""
    F1 = from_principal_parts([(Q(0), (Q("1/2"),)), (Q(1), (Q("1/4"),))], infinity=True)
    F2 = from_principal_parts([(Q(0), (Q("1/8"),)), (Q(1), (Q("1/8") + Q(shift),))], infinity=True)
    s = NodedSphere((Component(1, (Puncture(1, Q(0)), Puncture(2, Q(1)), Puncture(10, INF))),
                     Component(2, (Puncture(3, Q(0)), Puncture(4, Q(1)), Puncture(20, INF)))),
                    ((10, 20),))
    return NodedFunction(PartialCrush(s, {1, 2}), Marking(({1}, {2}, {3}, {4})), {1: F1, 2: F2})


def random_translate(nf, rng):
    ctx = context(256)
    Ts = {cid: Mobius(*(ctx.mpc(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(4)))
          for cid in nf.maps}
    maps = {cid: mobius_conjugate(F.to_numeric(256) if F.exact else F, Ts[cid]) for cid, F in nf.maps.items()}
    return NodedFunction(apply_mobius(nf.crush, Ts), nf.marking, maps)


# --- validation -----------------------------------------------------------------------------

def test_degree6_target_valid():
    assert validate_noded_function(example2_target()) == []


def test_node_index_formula():
    assert validate_noded_function(node_pair()) == []
    assert "node-index" in codes(validate_noded_function(node_pair(Q("1/10"))))


def test_fixed_point_off_puncture():
    F = from_fixed_point_data(FixedPointData(((Q(0), Q(2)), (Q(1), Q(-2)), (Q(2), Q(1)))))
    s = NodedSphere((Component(1, (Puncture(1, Q(0)), Puncture(2, Q(1)), Puncture(3, INF))),), ())
    nf = NodedFunction(PartialCrush(s, {1}), Marking(({1}, {2}, {3})), {1: F})
    assert "fixed-point-location" in codes(validate_noded_function(nf))


def test_identity_component_rejected():
    s = NodedSphere((Component(1, (Puncture(1, Q(0)), Puncture(2, Q(1)), Puncture(3, INF))),), ())
    nf = NodedFunction(PartialCrush(s, {1}), Marking(({1}, {2}, {3})), {1: RationalMap.make((0, 1))})
    assert "identity-map" in codes(validate_noded_function(nf))


def test_multiplicity_above_level():
    F = from_principal_parts([(Q(0), (Q(1), Q(1)))], infinity=True)   # double point at 0
    s = NodedSphere((Component(1, (Puncture(1, Q(0)), Puncture(2, Q(1)), Puncture(3, INF))),), ())
    nf = NodedFunction(PartialCrush(s, {1}), Marking(({1}, {2}, {3})), {1: F})
    assert "multiplicity-level" in codes(validate_noded_function(nf))


# --- decorations -------------------------------------------------------------------------------

def test_degree6_decoration_and_sums():
    nf = example2_target()
    deco = reduced_decoration(nf)
    d = deco.as_dict()
    assert d[10] == (Q(-1), Q(-1), Q(1)) and d[20] == (Q(-1), Q(1), Q(1))
    assert d[1] == (Q(2),) and d[3] == (Q(2),)
    assert deco.dimension == 4 + 2 * 3
    assert component_index_sums(nf) == {1: Q(1), 2: Q(1)}


def test_all_simple_decoration_is_index_vector():
    rng = random.Random(8)
    F = from_fixed_point_data(random_generic_data(rng, 4))
    nf = embed_vm(F)
    deco = reduced_decoration(nf)
    assert deco.singular == () and deco.dimension == 5
    assert abs(sum(deco.flat()) - 1) < 1e-60


def test_convention_changes_only_higher_coefficients():
    nf = example2_target()
    swapped = NormalizationConvention({10: (2, 1), 20: (4, 3)})
    a = reduced_decoration(nf).as_dict()
    b = reduced_decoration(nf, swapped).as_dict()
    assert a[10][0] == b[10][0] and a[20][0] == b[20][0]
    assert a[10][1:] != b[10][1:]


def test_bad_convention():
    with pytest.raises(ConventionError):
        reduced_decoration(example2_target(), NormalizationConvention({10: (1, 3), 20: (3, 4)}))


# --- embedding and equality ------------------------------------------------------------------------

def test_embed_generic_map():
    F = from_fixed_point_data(random_generic_data(random.Random(2), 3))
    nf = embed_vm(F)
    assert nf.crush_data().bouquets == () and validate_noded_function(nf) == []


def test_embed_double_fixed_point():
    F, parts = random_singular_map(random.Random(12), [2], simple=2)
    assert sorted(m for _, m in fixed_points(F)) == [1, 1, 2]
    nf = embed_vm(F, order=[z for z, _ in parts])
    cd = nf.crush_data()
    assert [b.level for b in cd.bouquets] == [2] and validate_noded_function(nf) == []
    assert nf.marking.parts[cd.A] == frozenset({1, 2})


def test_embed_rejects_identity_and_too_few_points():
    with pytest.raises(IdentityMapError):
        embed_vm(RationalMap.make((0, 1)))
    with pytest.raises(UnstableError):
        embed_vm(RationalMap.make((0, 1, 1)))          # z + z^2: fixed points 0 (double), INF


def test_structures_equal_cases():
    nf = example2_target()
    assert structures_equal(nf, nf)
    rng = random.Random(6)
    assert structures_equal(nf, random_translate(nf, rng), tol=1e-30)
    other = NodedFunction(nf.crush, nf.marking, {1: nf.maps[2], 2: nf.maps[1]})
    assert not structures_equal(nf, other)
    assert decoration_distance(nf, other) == 2


def test_embed_is_injective_on_conjugacy_classes():
    rng = random.Random(10)
    ctx = context(256)
    for _ in range(5):
        F = from_fixed_point_data(random_generic_data(rng, 3))
        T = Mobius(*(ctx.mpc(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(4)))
        order = [z for z, _ in fixed_points(F)]
        G = mobius_conjugate(F, T)
        a = embed_vm(F, order=order)
        b = embed_vm(G, order=[T(z) for z in order])
        assert structures_equal(a, b, tol=1e-30)
        H = from_fixed_point_data(random_generic_data(rng, 3))
        assert not structures_equal(a, embed_vm(H), tol=1e-30)
