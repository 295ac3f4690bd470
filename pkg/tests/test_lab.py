import numpy as np
import pytest

from nodedrat.errors import BudgetExhausted, InvalidSampleError, ScheduleError, ValidationError
from nodedrat.functions import validate_noded_function
from nodedrat.lab import (
    Prop1Params,
    SweepConfig,
    build_prop1_family,
    central_relation,
    control_spec,
    dimension,
    example2_residual,
    example2_spec,
    example2_sweep,
    merged_coefficients,
    prop1_target,
    remark_variant,
    unpack,
    verify_prop1,
)


def test_prop1_family_indices_sum_to_one():
    p = Prop1Params()
    for k in p.schedule:
        s = build_prop1_family(p, k)
        assert abs(s.data.index_sum() - 1) < 1e-60
        assert len(s.data) == 6


def test_prop1_identity_holds_exactly():
    p = Prop1Params(c2=(0.2, -0.5 + 0.3j))
    s = build_prop1_family(p, 64)
    for j in (0, 1):
        val = s.c_tilde[0] * s.chart_value_at_one(j) / -p.c2[j]
        assert abs(val - 1) < 1e-60


def test_prop1_vanishing_second_coefficient():
    p = Prop1Params(c2=(0, 0.2))
    s = build_prop1_family(p, 100)
    assert abs(s.b[0] * 100 - 1) < 1e-60 and abs(s.b[1] + 0.2) < 1e-16
    assert validate_noded_function(prop1_target(p)) == []


def test_prop1_rejects_bad_parameters():
    with pytest.raises(ValidationError):
        Prop1Params(lam_inf=(0, 0.4)).validate()
    with pytest.raises(ScheduleError):
        Prop1Params(schedule=(16, 8, 32)).validate()
    with pytest.raises(ScheduleError):
        build_prop1_family(Prop1Params(a1=1.0), 1)


def test_parameter_dimensions():
    assert dimension(example2_spec()) == 20
    assert dimension(control_spec()) == 16


def test_residual_is_nonnegative():
    rng = np.random.default_rng(1)
    spec = example2_spec()
    for _ in range(20):
        x = rng.normal(size=dimension(spec))
        assert example2_residual(x, 16.0) >= 0


def test_residual_rejects_bad_samples():
    with pytest.raises(InvalidSampleError):
        example2_residual(np.zeros(5), 16.0)
    with pytest.raises(InvalidSampleError):
        example2_residual(np.zeros(20), 16.0)        # eps = 0: coincident points


def test_central_relation_values_agree():
    rng = np.random.default_rng(2)
    spec = example2_spec()
    for _ in range(10):
        x = rng.normal(size=dimension(spec))
        r1, r2 = central_relation(x, 32.0)
        lam1 = unpack(x, 32.0, spec).lam[0]
        assert abs(r1 - r2) < 1e-8 * (1 + abs(r1))
        assert abs(r1 - lam1) < 1e-8 * (1 + abs(lam1))


def test_fixed_total_normalization():
    spec = example2_spec()
    x = np.random.default_rng(3).normal(size=dimension(spec))
    fp = unpack(x, 16.0, spec, fixed_total=-3)
    assert abs(fp.lam.sum() + 3) < 1e-12
    total = fp.eta.sum() + fp.kappa.sum() + fp.lam.sum()
    assert abs(total - 1) < 1e-12
    with pytest.raises(ValidationError):
        SweepConfig(target="control", fixed_total=-3).validate()


def test_sweep_is_deterministic():
    cfg = SweepConfig(starts=2, schedule=(8,), maxfev=200, seed=5)
    a, b = example2_sweep(cfg), example2_sweep(cfg)
    assert a.per_k == b.per_k and a.argmin == b.argmin
    assert a.evaluations > 0 and not a.budget_exhausted


def test_sweep_budget_exhaustion_keeps_partial_report():
    with pytest.raises(BudgetExhausted) as info:
        example2_sweep(SweepConfig(starts=2, schedule=(8,), budget=0))
    rep = info.value.partial
    assert rep.budget_exhausted and rep.per_k == [] and not rep.exceeds_margin


def test_merged_coefficient_formulas():
    eps, lam2, lam3 = 1e-3, 0.7, -0.4
    for j in (0, 1):
        s = (-2, 2)[j]
        mu = eps / (s + eps)
        c2, c3 = merged_coefficients(eps, lam2, lam3, j)
        assert abs(c3 - (mu / s) ** 2 * lam3) < 1e-18
        d2, d3 = merged_coefficients(eps, lam2, lam3, j, formula="display")
        assert abs(d3 - eps ** 2 * lam3 / 4) < 1e-18
    with pytest.raises(ValidationError):
        remark_variant(formula="other")


def test_remark_variant_stays_away_from_target():
    rep = remark_variant(magnitudes=(1e-2,), phases=2)
    assert len(rep.rows) == 4 and rep.min_residual >= rep.margin
    assert remark_variant(magnitudes=(1e-2,), phases=2, formula="display").min_residual >= 0


def test_prop1_pipeline_with_vanishing_second_coefficient():
    rep = verify_prop1(Prop1Params(c2=(0, 0.2)))
    assert rep.shape_ok and rep.structure_ok and rep.tail_decreasing
    assert rep.identity[-1][1][0] is None
