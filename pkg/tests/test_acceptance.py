"""Acceptance criteria.  Each test prints one PASS/FAIL line; the lines are
also collected into the pytest terminal summary."""

import random
import time
from fractions import Fraction

import pytest

from factories import random_generic_data, random_singular_map, report
from nodedrat.degeneration import degenerate
from nodedrat.functions import (
    component_index_sums,
    decoration_distance,
    embed_vm,
    reduced_decoration,
    structures_equal,
    validate_noded_function,
)
from nodedrat.lab import SweepConfig, example2_sweep, example2_target, remark_variant, verify_prop1
from nodedrat.rational import dynamical_index, fixed_points, from_fixed_point_data
from nodedrat.reopening import matmul, reopen_family, sym_inverse, sym_matrix
from nodedrat.scalars import INF, exact
from nodedrat.spheres import (
    Bouquet,
    Component,
    CrushData,
    Marking,
    NodedSphere,
    PartialCrush,
    Puncture,
    crush_data_violations,
    validate_all,
    validate_marking,
)


# --- 1. index formula ------------------------------------------------------------------

def test_criterion_1_index_formula_suite():
    rng = random.Random(20240601)
    t0 = time.perf_counter()
    worst_sum, worst_trip = 0.0, 0.0
    for i in range(1000):
        d = 2 + i % 7
        data = random_generic_data(rng, d)
        F = from_fixed_point_data(data)
        fps = fixed_points(F)
        assert all(m == 1 for _, m in fps) and len(fps) == d + 1
        lams = [dynamical_index(F, z) for z, _ in fps]
        worst_sum = max(worst_sum, float(abs(sum(lams) - 1)))
        for p, lam in data.entries:
            j = min(range(len(fps)), key=lambda r: abs(fps[r][0] - p))
            worst_trip = max(worst_trip, float(abs(fps[j][0] - p)), float(abs(lams[j] - lam)))
    elapsed = time.perf_counter() - t0
    ok = worst_sum < 1e-30 and worst_trip < 1e-20 and elapsed < 60
    report(1, "index formula, 1000 maps", ok,
           f"max |sum - 1| = {worst_sum:.1e}, max round-trip error = {worst_trip:.1e}, {elapsed:.1f} s")
    assert ok


# --- 2. exact matrix identities ----------------------------------------------------------

def _random_eps(rng, L):
    vals = set()
    while len(vals) < L:
        vals.add((Fraction(rng.randint(-40, 40), rng.randint(1, 12)),
                  Fraction(rng.randint(-40, 40), rng.randint(1, 12))))
    return [exact(v) for v in vals]


def test_criterion_2_exact_matrix_identities():
    rng = random.Random(11)
    t0 = time.perf_counter()
    bad = 0
    one, zero = exact(1), exact(0)
    for i in range(200):
        L = 1 + i % 6
        m = sym_matrix(_random_eps(rng, L))
        ident = matmul([list(r) for r in m.rows], sym_inverse(m))
        if m.det() != m.product_formula():
            bad += 1
        if any(ident[a][b] != (one if a == b else zero) for a in range(L) for b in range(L)):
            bad += 1
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and elapsed < 30
    report(2, "exact det / inverse identities, 200 vectors", ok, f"{bad} failures, {elapsed:.1f} s")
    assert ok


# --- 3. decoration golden ---------------------------------------------------------------

def test_criterion_3_decoration_golden():
    nf = example2_target()
    assert validate_noded_function(nf) == []
    deco = reduced_decoration(nf).as_dict()
    sums = component_index_sums(nf)
    expected = {10: (-1, -1, 1), 20: (-1, 1, 1), 1: (2,), 3: (2,)}
    ok = all(tuple(deco[pid]) == tuple(exact(v) for v in vals) for pid, vals in expected.items())
    ok = ok and all(sums[cid] == exact(1) for cid in (1, 2))
    report(3, "exact decoration of the degree-6 target", ok,
           f"bouquet {deco[10]} / {deco[20]}, index at 1 = {deco[1][0]}, {deco[3][0]}, sums {sums[1]}, {sums[2]}")
    assert ok


# --- 4. reopen / degenerate round trip -----------------------------------------------------

def test_criterion_4_reopen_round_trip():
    rng = random.Random(7)
    t0 = time.perf_counter()
    failures, worst = [], 0.0
    for i in range(24):
        levels = [2 + i % 3] + ([rng.randint(2, 3)] if i % 3 == 0 else [])
        F, parts = random_singular_map(rng, levels, simple=rng.randint(1, 3))
        nf = embed_vm(F, order=[z for z, _ in parts])
        assert validate_noded_function(nf) == []
        limit = degenerate(reopen_family(nf).samples).limit
        dist = decoration_distance(limit, nf)
        worst = max(worst, dist)
        if not (structures_equal(limit, nf, tol=1e-6) and dist < 1e-6):
            failures.append(i)
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 300
    report(4, "reopen/degenerate round trip, 24 noded functions", ok,
           f"failures {failures}, max decoration residual {worst:.1e}, {elapsed:.1f} s")
    assert ok


# --- 5. degree-5 reproduction -----------------------------------------------------------------

def test_criterion_5_degree5_family():
    rep = verify_prop1()
    final_k, final = rep.residuals[-1]
    ok = rep.shape_ok and final_k == 1024 and final < 1e-2 and rep.tail_decreasing
    crushed = rep.degeneration.limit.crush.crushed
    report(5, "degree-5 family reaches the target stratum", ok,
           f"shape {rep.shape_ok}, crushed {crushed}, residual {final:.2e} at k = {final_k}, "
           f"tail decreasing {rep.tail_decreasing}")
    assert ok


# --- 6. degree-6 evidence ---------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_6_degree6_sweep_contrast():
    t0 = time.perf_counter()
    d6 = example2_sweep(SweepConfig(target="example2"))
    d5 = example2_sweep(SweepConfig(target="control"))
    elapsed = time.perf_counter() - t0
    ok = d6.min_residual >= 0.1 and d5.min_residual < 1e-2 and elapsed < 900
    report(6, "sweep contrast (64 starts)", ok,
           f"degree 6 min residual {d6.min_residual:.3f}, degree 5 control {d5.min_residual:.1e}, "
           f"{elapsed:.0f} s; {d6.note}")
    assert ok


# --- 7. merged-centre variant ------------------------------------------------------------------

def test_criterion_7_merged_variant():
    rep = remark_variant()
    ok = rep.min_residual >= 0.1
    report(7, "merged-centre least squares", ok,
           f"min residual {rep.min_residual:.3f} over {len(rep.rows)} grid points")
    assert ok


# --- 8. combinatorial validator table ------------------------------------------------------------

_POS = [0, 1, INF, 2, 3, 4, 5, 6]


def C(cid, *pids, pos=None):
    pos = pos or _POS
    return Component(cid, tuple(Puncture(p, pos[i]) for i, p in enumerate(pids)))


def M(*parts):
    return Marking(tuple(set(p) for p in parts))


def _singletons(n):
    return M(*[{i} for i in range(1, n + 1)])


_PROP1_SPHERE = NodedSphere((C(1, 10, 1, 2), C(2, 20, 3, 4), C(3, 30, 31, 5, 6)), ((10, 30), (20, 31)))
_EX2_SPHERE = NodedSphere((C(1, 10, 1, 2), C(2, 20, 3, 4), C(3, 30, 31, 5, 6, 7)), ((10, 30), (20, 31)))
_CHAIN = NodedSphere((C(1, 1, 2, 10), C(2, 11, 3, 4, 12), C(3, 13, 5, 6)), ((10, 11), (12, 13)))
_PENDANT = NodedSphere((C(1, 1, 2, 10), C(2, 20, 3, 4)), ((10, 20),))

# (name, sphere, ordinary, retained override, marking, crush-data override, valid)
CASES = [
    ("single 3-punctured sphere", NodedSphere((C(1, 1, 2, 3),), ()), {1}, None, _singletons(3), None, True),
    ("single 5-punctured sphere, permuted labels", NodedSphere((C(1, 1, 2, 3, 4, 5),), ()), {1}, None,
     M({3}, {1}, {5}, {2}, {4}), None, True),
    ("degree-5 shape, middle crushed", _PROP1_SPHERE, {1, 2}, None, M({1}, {2}, {3}, {4}, {5, 6}), None, True),
    ("degree-5 shape, nothing crushed", _PROP1_SPHERE, {1, 2, 3}, None, _singletons(6), None, True),
    ("degree-6 shape, level-3 bouquet", _EX2_SPHERE, {1, 2}, None, M({1}, {2}, {3}, {4}, {5, 6, 7}), None, True),
    ("chain of three ordinary components", _CHAIN, {1, 2, 3}, None, _singletons(6), None, True),
    ("pendant crushed component, level 2", _PENDANT, {1}, None, M({1}, {2}, {3, 4}), None, True),
    ("pendant crushed component, level 3",
     NodedSphere((C(1, 1, 2, 10), C(2, 20, 3, 4, 5)), ((10, 20),)), {1}, None, M({1}, {2}, {3, 4, 5}), None, True),
    ("crushed centre plus retained node",
     NodedSphere((C(1, 10, 1, 40), C(2, 20, 2, 3), C(3, 30, 31, 4, 5), C(4, 41, 6, 7)),
                 ((10, 30), (20, 31), (40, 41))),
     {1, 2, 4}, None, M({1}, {2}, {3}, {6}, {7}, {4, 5}), None, True),
    ("bouquet labels spread out", _PROP1_SPHERE, {1, 2}, None, M({1}, {3}, {4}, {6}, {2, 5}), None, True),
    # sphere-level violations
    ("sum of n_m != 2J + n", NodedSphere((C(1, 1, 2, 3), C(2, 4, 5, 6)), ((3, 4),), n=5),
     {1, 2}, None, None, None, False),
    ("two-punctured component", NodedSphere((C(1, 1, 2, 10), C(2, 20, 3)), ((10, 20),)),
     {1, 2}, None, None, None, False),
    ("J = M - 1 exceeds n - 3", NodedSphere((C(1, 1, 10), C(2, 20, 2, 3)), ((10, 20),)),
     {1, 2}, None, None, None, False),
    ("two components without a node", NodedSphere((C(1, 1, 2, 3), C(2, 4, 5, 6)), ()),
     {1, 2}, None, None, None, False),
    ("two nodes between the same components (cycle)",
     NodedSphere((C(1, 1, 10, 11), C(2, 2, 20, 21)), ((10, 20), (11, 21))), {1, 2}, None, None, None, False),
    ("three components in a cycle",
     NodedSphere((C(1, 1, 10, 11), C(2, 2, 20, 21), C(3, 3, 30, 31)), ((10, 20), (21, 30), (31, 11))),
     {1, 2, 3}, None, None, None, False),
    ("puncture in two nodes",
     NodedSphere((C(1, 1, 2, 10), C(2, 20, 3, 4), C(3, 30, 5, 6)), ((10, 20), (10, 30))),
     {1, 2, 3}, None, None, None, False),
    ("node inside one component", NodedSphere((C(1, 1, 2, 10, 11),), ((10, 11),)),
     {1}, None, None, None, False),
    ("coincident puncture positions", NodedSphere((C(1, 1, 2, 3, pos=[0, 1, 1]),), ()),
     {1}, None, None, None, False),
    ("node uses an unknown puncture", NodedSphere((C(1, 1, 2, 10), C(2, 20, 3, 4)), ((10, 99),), n=4),
     {1, 2}, None, None, None, False),
    # crush violations
    ("crushed component with one non-nodal puncture",
     NodedSphere((C(1, 1, 2, 10), C(2, 20, 21, 3), C(3, 30, 4, 5)), ((10, 20), (21, 30))),
     {1, 3}, None, None, None, False),
    ("no ordinary component", _PENDANT, set(), None, None, None, False),
    ("node between two crushed components", _CHAIN, {1}, None, None, None, False),
    ("retained node omitted", _CHAIN, {1, 2, 3}, (0,), None, None, False),
    # crush-data identities (hand-made data)
    ("A + sum L != n", _PROP1_SPHERE, {1, 2}, None, None,
     CrushData((Bouquet((10, 20), 3, (3,)),), (1, 2, 3, 4)), False),
    ("bouquet level below 2", _PROP1_SPHERE, {1, 2}, None, None,
     CrushData((Bouquet((10, 20), 1, (3,)),), (1, 2, 3, 4, 5)), False),
    ("number of bouquets != M - I", _PROP1_SPHERE, {1, 2}, None, None,
     CrushData((Bouquet((10,), 1, (3,)), Bouquet((20,), 1, (3,))), (1, 2, 3, 4)), False),
    # marking violations
    ("marking part size differs from level", _PROP1_SPHERE, {1, 2}, None,
     M({1}, {2}, {3}, {4, 5}, {6}), None, False),
    ("marking misses a label", _PROP1_SPHERE, {1, 2}, None, M({1}, {2}, {3}, {4}, {5, 7}), None, False),
    ("marking is not surjective", _PROP1_SPHERE, {1, 2}, None, M({1}, {2}, {3, 4}, {5, 6}), None, False),
]


def _classify(sphere, ordinary, retained, marking, cd):
    pc = PartialCrush(sphere, ordinary, retained)
    if cd is not None:
        return not crush_data_violations(pc, cd)
    v = validate_all(pc, marking)
    if not v and marking is not None:
        v = validate_marking(pc, marking)
    return not v


def test_criterion_8_validator_table():
    assert len(CASES) == 30
    wrong = [name for name, s, o, r, m, cd, valid in CASES if _classify(s, o, r, m, cd) != valid]
    ok = not wrong
    report(8, "validator table, 30 cases", ok, f"{len(wrong)} misclassified {wrong}")
    assert ok
