"""Reconstructions of the two boundary phenomena in degree 5 and 6.

Degree 5: a point with disconnected realization that IS a limit of generic
maps; the family is built explicitly and degenerated.  Degree 6: a point of
the same shape (level-3 bouquet) that is NOT such a limit; a multi-start
derivative-free search over the natural family measures how close one can
get.  The degree-6 outcome is numerical evidence, not a proof."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .degeneration import DegenerationReport, FamilySample, degenerate
from .errors import BudgetExhausted, InvalidSampleError, ScheduleError, ValidationError
from .functions import NodedFunction, decoration_distance, validate_noded_function
from .rational import FixedPointData, from_principal_parts
from .scalars import DEFAULT_PREC, INF, coerce, context, magnitude
from .spheres import Component, Marking, NodedSphere, PartialCrush, Puncture, crush_data

EVIDENCE_NOTE = "numerical evidence consistent with non-approximability; not a proof"


# --- shared target shape --------------------------------------------------------------

def two_component_target(maps: dict, level: int) -> NodedFunction:
    """D_1, D_2 = C - {0, 1}, each with its singular puncture at 0, joined
    through a crushed D_3 carrying ``level`` labelled punctures.  Labels
    1, 2 (resp. 3, 4) sit at 1, INF of D_1 (resp. D_2); the bouquet gets
    labels 5 .. 4 + level."""
    z = coerce([0, 1, *[c for F in maps.values() for c in F.num.coeffs]])
    zero, one = z[0], z[1]
    d1 = Component(1, (Puncture(10, zero), Puncture(1, one), Puncture(2, INF)))
    d2 = Component(2, (Puncture(20, zero), Puncture(3, one), Puncture(4, INF)))
    crushed = [Puncture(30, INF), Puncture(31, zero)]
    crushed += [Puncture(4 + i, coerce([i, one])[0]) for i in range(1, level + 1)]
    d3 = Component(3, tuple(crushed))
    sphere = NodedSphere((d1, d2, d3), ((10, 30), (20, 31)))
    pc = PartialCrush(sphere, {1, 2})
    marking = Marking(({1}, {2}, {3}, {4}, set(range(5, 5 + level))))
    return NodedFunction(pc, marking, dict(maps))


# --- degree 5 ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Prop1Params:
    lam_one: tuple = (0.3 + 0.1j, 0.3 + 0.1j)   # index at the puncture 1 of D_j
    lam_inf: tuple = (0.4, 0.4)                # index at INF of D_j
    c2: tuple = (0.2, 0.2)                     # second principal-part coefficient at 0
    a1: complex = 1.0                          # eps_{k,1} ~ 2 a1 / k^2
    schedule: tuple = (16, 32, 64, 128, 256, 512, 1024)
    prec: int = DEFAULT_PREC

    def c1(self, j: int):
        return 1 - self.lam_one[j] - self.lam_inf[j]

    def validate(self) -> None:
        for j in (0, 1):
            if self.lam_one[j] == 0 or self.lam_inf[j] == 0:
                raise ValidationError("target indices must be non-zero")
        if self.a1 == 0:
            raise ValidationError("a1 must be non-zero")
        ks = list(self.schedule)
        if len(ks) < 3 or any(b <= a for a, b in zip(ks, ks[1:])) or ks[0] < 1:
            raise ScheduleError("schedule must hold at least 3 increasing values >= 1")


@dataclass(frozen=True)
class Prop1Sample:
    k: float
    data: FixedPointData
    eps: tuple
    mu: tuple
    b: tuple
    c_tilde: tuple

    def chart_value_at_one(self, j: int):
        """S_{k,j}(1) with S_{k,j}(z) = mu_j z / (z - s_j)."""
        s = (-2, 2)[j]
        return self.mu[j] / (1 - s)


def build_prop1_family(p: Prop1Params, k) -> Prop1Sample:
    """Six simple fixed points -2 + eps_1, -2, 2 + eps_2, 2, 0, 1 (labels 1..6):
    labels 2j-1, 2j carry the D_j targets, 0 and 1 carry the diverging c~."""
    ctx = context(p.prec)
    k = ctx.mpf(k)
    if k < 1:
        raise ScheduleError("k must be at least 1")
    lam_one = [ctx.mpc(x) for x in p.lam_one]
    lam_inf = [ctx.mpc(x) for x in p.lam_inf]
    b = [-ctx.mpc(c) if c != 0 else 1 / k for c in p.c2]
    s = (ctx.mpc(-2), ctx.mpc(2))
    mu1 = ctx.mpc(p.a1) / k ** 2
    # b_1 / S_1(1) = b_2 / S_2(1) with S_j(1) = mu_j / (1 - s_j)
    mu2 = b[1] * mu1 * (1 - s[1]) / (b[0] * (1 - s[0]))
    mu = (mu1, mu2)
    if any(magnitude(m) >= 0.25 for m in mu):
        raise ScheduleError(f"k = {k} too small: the rescaling factors are not small")
    eps = tuple(m * sj / (1 - m) for m, sj in zip(mu, s))
    ct1 = b[0] * (1 - s[0]) / mu1
    ct2 = 1 - sum(lam_one) - sum(lam_inf) - ct1
    entries = (
        (s[0] + eps[0], lam_one[0]), (s[0], lam_inf[0]),
        (s[1] + eps[1], lam_one[1]), (s[1], lam_inf[1]),
        (ctx.mpc(0), ct1), (ctx.mpc(1), ct2),
    )
    data = FixedPointData(entries)
    try:
        data.validate()
    except ValidationError as e:
        raise ScheduleError(f"k = {k}: {e}") from e
    return Prop1Sample(float(k), data, eps, mu, tuple(b), (ct1, ct2))


def prop1_target(p: Prop1Params) -> NodedFunction:
    maps = {}
    for j in (0, 1):
        parts = [(1, (p.lam_one[j],)), (0, (p.c1(j), p.c2[j]))]
        maps[j + 1] = from_principal_parts(parts, p.prec, infinity=True)
    return two_component_target(maps, 2)


@dataclass
class Prop1Report:
    degeneration: DegenerationReport
    target: NodedFunction
    residuals: list            # (k, residual against the target)
    shape_ok: bool
    structure_ok: bool
    identity: list             # (k, c~_1 S_{k,j}(1) / (-c_2^j) for j = 1, 2)

    @property
    def tail_decreasing(self) -> bool:
        tail = [r for _, r in self.residuals[-4:]]
        return all(b < a for a, b in zip(tail, tail[1:]))


def _shape_of(nf: NodedFunction):
    pc = nf.crush
    cd = crush_data(pc)
    ordinary = sorted(pc.sphere.component(c).n_m for c in pc.ordinary)
    return (tuple(ordinary), pc.I, tuple(sorted((b.level, b.size) for b in cd.bouquets)))


def verify_prop1(p: Prop1Params | None = None) -> Prop1Report:
    p = p or Prop1Params()
    p.validate()
    built = [build_prop1_family(p, k) for k in p.schedule]
    samples = [FamilySample(s.k, s.data) for s in built]
    target = prop1_target(p)
    rep = degenerate(samples, prec=p.prec, hint=target.crush)
    shape_ok = rep.limit is not None and _shape_of(rep.limit) == _shape_of(target)
    residuals = []
    for k, fk in rep.finite:
        r = decoration_distance(fk, target) if shape_ok else math.inf
        residuals.append((k, r + (0.0 if shape_ok else 1.0)))
    structure_ok = shape_ok and decoration_distance(rep.limit, target) < 1e-6
    identity = []
    for s in built:
        vals = []
        for j in (0, 1):
            c2 = p.c2[j]
            if c2 == 0:
                vals.append(None)
                continue
            vals.append(complex(s.c_tilde[0] * s.chart_value_at_one(j) / -c2))
        identity.append((s.k, tuple(vals)))
    return Prop1Report(rep, target, residuals, shape_ok, structure_ok, identity)


# --- degree 6 ---------------------------------------------------------------------------

def example2_maps(j: int):
    """1/(z - G_j) = 2/(z-1) - 1/z + (-1)^j/z^2 + 1/z^3, exactly."""
    return from_principal_parts([(1, (2,)), (0, (-1, (-1) ** j, 1))])


def example2_target() -> NodedFunction:
    nf = two_component_target({1: example2_maps(1), 2: example2_maps(2)}, 3)
    v = validate_noded_function(nf)
    if v:
        raise ValidationError("example target failed validation", v)
    return nf


@dataclass(frozen=True)
class TargetSpec:
    """Per-component limits sought from the family in the chart S_{k,j}:
    index at INF (eta), at 1 (kappa), principal part at 0 (c)."""
    name: str
    central: int                    # number of central fixed points
    eta: tuple
    kappa: tuple
    c: tuple                        # per j: (c_1, ..., c_L)


def example2_spec() -> TargetSpec:
    return TargetSpec("example2", 3, (0, 0), (2, 2), ((-1, -1, 1), (-1, 1, 1)))


def control_spec(p: Prop1Params | None = None) -> TargetSpec:
    p = p or Prop1Params()
    c = tuple((complex(p.c1(j)), complex(p.c2[j])) for j in (0, 1))
    return TargetSpec("control", 2, tuple(complex(x) for x in p.lam_inf),
                      tuple(complex(x) for x in p.lam_one), c)


def spec_by_name(name: str) -> TargetSpec:
    if name == "example2":
        return example2_spec()
    if name in ("control", "prop1", "d5"):
        return control_spec()
    raise ValidationError(f"unknown obstruction target {name!r}")


def dimension(spec: TargetSpec) -> int:
    """Real parameters: eta, kappa, a (2 complex each), then the central
    indices u_2.. and positions delta_2.. (lambda_1 at 0 closes the sum)."""
    return 2 * (6 + 2 * (spec.central - 1))


@dataclass(frozen=True)
class FamilyPoint:
    k: float
    eta: np.ndarray
    kappa: np.ndarray
    eps: np.ndarray
    lam: np.ndarray                 # central indices, lam[0] at 0
    delta: np.ndarray               # central positions, delta[0] = 0


def unpack(x, k, spec: TargetSpec, fixed_total: complex | None = None) -> FamilyPoint:
    z = np.asarray(x[0::2]) + 1j * np.asarray(x[1::2])
    n = spec.central - 1
    eta, kappa, a = z[0:2].copy(), z[2:4].copy(), z[4:6]
    rest = k ** 2 * z[6:6 + n]
    delta = np.concatenate(([0j], z[6 + n:6 + 2 * n]))
    if fixed_total is None:
        lam1 = 1 - eta.sum() - kappa.sum() - rest.sum()
    else:
        lam1 = fixed_total - rest.sum()
        kappa[1] = 1 - fixed_total - eta.sum() - kappa[0]
    return FamilyPoint(k, eta, kappa, a / k ** 2, np.concatenate(([lam1], rest)), delta)


def family_data(fp: FamilyPoint, prec: int = 53) -> FixedPointData:
    pts = [-2, -2 + fp.eps[0], 2, 2 + fp.eps[1], *fp.delta]
    lams = [fp.eta[0], fp.kappa[0], fp.eta[1], fp.kappa[1], *fp.lam]
    ctx = context(max(prec, 53))
    return FixedPointData(tuple((ctx.mpc(complex(p)), ctx.mpc(complex(l))) for p, l in zip(pts, lams)))


def chart_terms(fp: FamilyPoint, j: int):
    """Images under S_{k,j} of the points that collapse to 0 in D_j, with
    their indices: the central points, then the other pair."""
    s = (-2, 2)[j]
    e = fp.eps[j]
    mu = e / (s + e)
    o = 1 - j
    pts = np.concatenate((fp.delta, [-s, -s + fp.eps[o]]))
    lams = np.concatenate((fp.lam, [fp.eta[o], fp.kappa[o]]))
    return mu * pts / (pts - s), lams, mu


def _fast_residual(x, k, spec: TargetSpec, fixed_total=None) -> float:
    fp = unpack(x, k, spec, fixed_total)
    total = 0.0
    for j in (0, 1):
        y, lams, _ = chart_terms(fp, j)
        if not np.all(np.isfinite(y)):
            return 1e6
        powers = y[None, :] ** np.arange(len(y))[:, None]
        m = powers @ lams
        c = np.zeros(len(y), complex)
        c[:len(spec.c[j])] = spec.c[j]
        vals = [abs(fp.eta[j] - spec.eta[j]), abs(fp.kappa[j] - spec.kappa[j]),
                np.max(np.abs(m - c)), np.max(np.abs(y))]
        total += max(vals)
    return float(total) if math.isfinite(total) else 1e6


def _check_point(fp: FamilyPoint, tol: float = 1e-12):
    pts = np.array([-2, -2 + fp.eps[0], 2, 2 + fp.eps[1], *fp.delta])
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if abs(pts[i] - pts[j]) <= tol:
                raise InvalidSampleError(f"fixed points {i + 1} and {j + 1} coincide")
    for j in (0, 1):
        if abs(fp.eps[j]) <= tol:
            raise InvalidSampleError("eps must be non-zero")
    lams = np.concatenate((fp.eta, fp.kappa, fp.lam))
    if abs(lams.sum() - 1) > 1e-9 * max(1.0, np.abs(lams).sum()):
        raise InvalidSampleError("indices do not sum to 1")


def example2_residual(x, k, spec: TargetSpec | None = None, fixed_total=None) -> float:
    """Sum over j of the largest deviation, in the chart S_{k,j}, of the
    family's decoration from the target (higher moments and the spread of
    the collapsing points included, both with target 0)."""
    spec = spec or example2_spec()
    x = np.asarray(x, float)
    if x.shape != (dimension(spec),):
        raise InvalidSampleError(f"expected {dimension(spec)} real parameters, got {x.shape}")
    _check_point(unpack(x, k, spec, fixed_total))
    return _fast_residual(x, k, spec, fixed_total)


def central_relation(x, k, spec: TargetSpec | None = None) -> tuple:
    """a_{k,j} / (S_{k,j} S'_{k,j}) for j = 1, 2, where a_{k,j} is the constant
    term of the numerator of the central terms in the chart S_{k,j}; both
    equal lambda_{k,1} (degree 6 only)."""
    spec = spec or example2_spec()
    fp = unpack(np.asarray(x, float), k, spec)
    out = []
    for j in (0, 1):
        y, lams, _ = chart_terms(fp, j)
        yc, lc = y[:3], lams[:3]
        # numerator of sum lc/(z - yc) over z (z - y1)(z - y2): constant term
        num = sum(lc[i] * np.prod([-yc[m] for m in range(3) if m != i]) for i in range(3))
        out.append(complex(num / (yc[1] * yc[2])))
    return tuple(out)


@dataclass(frozen=True)
class SweepConfig:
    target: str = "example2"
    starts: int = 64
    schedule: tuple = (8, 16, 32, 64)
    seed: int = 0
    margin: float = 0.1
    fixed_total: complex | None = None     # e.g. -3 for the central-sum normalization
    maxfev: int = 6000
    budget: int | None = None              # total residual evaluations
    jobs: int = 1

    def validate(self) -> None:
        ks = list(self.schedule)
        if len(ks) < 1 or any(b <= a for a, b in zip(ks, ks[1:])) or ks[0] <= 0:
            raise ScheduleError("sweep schedule must be increasing positive values")
        if self.starts < 1:
            raise ValidationError("need at least one start")
        if self.fixed_total is not None and spec_by_name(self.target).central != 3:
            raise ValidationError("the central-sum normalization applies to example2 only")


class _Counter:
    def __init__(self, limit):
        self.n = 0
        self.limit = limit

    def __call__(self, f):
        def g(x, *args):
            if self.limit is not None and self.n >= self.limit:
                raise _OutOfBudget
            self.n += 1
            return f(x, *args)
        return g


class _OutOfBudget(Exception):
    pass


def _run_start(args) -> dict:
    cfg, index, limit = args
    spec = spec_by_name(cfg.target)
    rng = np.random.default_rng([cfg.seed, index])
    x = rng.normal(size=dimension(spec))
    counter = _Counter(limit)
    f = counter(_fast_residual)
    trace = []
    exhausted = False
    try:
        for k in cfg.schedule:
            r = minimize(f, x, args=(k, spec, cfg.fixed_total), method="Nelder-Mead",
                         options=dict(maxfev=cfg.maxfev, xatol=1e-12, fatol=1e-14))
            r = minimize(f, r.x, args=(k, spec, cfg.fixed_total), method="Powell",
                         options=dict(maxfev=cfg.maxfev))
            x = r.x
            trace.append((k, float(r.fun)))
    except _OutOfBudget:
        exhausted = True
    return {"start": index, "trace": trace, "x": x.tolist(), "evaluations": counter.n,
            "exhausted": exhausted}


@dataclass
class SweepReport:
    target: str
    per_k: list                 # (k, min residual over starts)
    min_residual: float         # at the last k reached
    argmin: dict                # start, k, parameters
    margin: float
    evaluations: int
    budget_exhausted: bool
    starts: int
    note: str = EVIDENCE_NOTE
    traces: list = field(default_factory=list)

    @property
    def exceeds_margin(self) -> bool:
        return bool(self.per_k) and not self.budget_exhausted and self.min_residual >= self.margin


def example2_sweep(cfg: SweepConfig | None = None) -> SweepReport:
    cfg = cfg or SweepConfig()
    cfg.validate()
    limit = None
    if cfg.budget is not None:
        limit = max(0, -(-cfg.budget // cfg.starts))
    jobs = [(cfg, i, limit) for i in range(cfg.starts)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            results = list(ex.map(_run_start, jobs))
    else:
        results = [_run_start(j) for j in jobs]
    results.sort(key=lambda r: r["start"])
    per_k = []
    for k in cfg.schedule:
        vals = [(t[1], r["start"]) for r in results for t in r["trace"] if t[0] == k]
        if vals:
            per_k.append((k, min(vals)[0]))
    exhausted = any(r["exhausted"] for r in results)
    best = None
    if per_k:
        k_last = per_k[-1][0]
        cands = [(t[1], r["start"], r) for r in results for t in r["trace"] if t[0] == k_last]
        val, start, r = min(cands, key=lambda c: (c[0], c[1]))
        best = {"start": start, "k": k_last, "x": r["x"] if r["trace"][-1][0] == k_last else None}
        min_res = val
    else:
        min_res = math.inf
    rep = SweepReport(cfg.target, per_k, min_res, best or {}, cfg.margin,
                      sum(r["evaluations"] for r in results), exhausted, cfg.starts,
                      traces=[r["trace"] for r in results])
    if exhausted:
        raise BudgetExhausted(f"evaluation budget {cfg.budget} exhausted", partial=rep)
    return rep


# --- the central points merged (a non-generic family) ------------------------------------

def merged_coefficients(eps, lam2, lam3, j: int, formula: str = "exact") -> tuple:
    """(c_2, c_3) at 0 in D_j of the terms lam2/z^2 + lam3/z^3 moved by S_{k,j}.

    ``exact`` transports the 1-form exactly; ``display`` uses the simplified
    expressions -eps (lam2 + (-1)^j 2 lam3)/4 and eps^2 lam3 / 4."""
    s = (-2, 2)[j]
    if formula == "display":
        sign = (-1) ** (j + 1)
        return (-eps * (lam2 + sign * 2 * lam3) / 4, eps ** 2 * lam3 / 4)
    mu = eps / (s + eps)
    return (-(mu / s) * lam2 - (mu / s ** 2) * lam3, (mu / s) ** 2 * lam3)


@dataclass
class RemarkReport:
    rows: list                  # (eps_1, eps_2, residual, lam2, lam3)
    min_residual: float
    margin: float
    formula: str
    note: str = EVIDENCE_NOTE


def remark_variant(magnitudes=(1e-1, 1e-2, 1e-3), phases: int = 4, margin: float = 0.1,
                   formula: str = "exact") -> RemarkReport:
    """Least squares in the shared (lam2, lam3) for c_2 = (-1)^j, c_3 = 1 on
    both components, over a grid of (eps_1, eps_2)."""
    if formula not in ("exact", "display"):
        raise ValidationError(f"unknown formula {formula!r}")
    grid = [r * np.exp(2j * np.pi * (m + 0.5) / phases) for r in magnitudes for m in range(phases)]
    rows = []
    for e1 in grid:
        for e2 in grid:
            A, rhs = [], []
            for j, e in ((0, e1), (1, e2)):
                c2x, c3x = merged_coefficients(e, 1, 0, j, formula)
                c2y, c3y = merged_coefficients(e, 0, 1, j, formula)
                A += [[c2x, c2y], [c3x, c3y]]
                rhs += [(-1) ** (j + 1), 1]
            A, rhs = np.array(A, complex), np.array(rhs, complex)
            sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
            res = float(np.linalg.norm(A @ sol - rhs))
            rows.append((complex(e1), complex(e2), res, complex(sol[0]), complex(sol[1])))
    return RemarkReport(rows, min(r[2] for r in rows), margin, formula)


__all__ = [
    "Prop1Params", "Prop1Sample", "Prop1Report", "build_prop1_family", "prop1_target",
    "verify_prop1", "example2_maps", "example2_target", "TargetSpec", "example2_spec",
    "control_spec", "spec_by_name", "dimension", "unpack", "family_data", "chart_terms",
    "example2_residual", "central_relation", "SweepConfig", "SweepReport", "example2_sweep",
    "merged_coefficients", "RemarkReport", "remark_variant", "two_component_target",
    "EVIDENCE_NOTE",
]
