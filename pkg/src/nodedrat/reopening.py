"""Reopening singular punctures: each level-L singular puncture q is split
into L simple fixed points q + eps_nu whose indices lambda_nu are solved
from the elementary-symmetric system, so that the family degenerates back
to the given principal part as eps -> 0."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .degeneration import FamilySample
from .errors import PlanFailure, SingularInputError, UnsupportedError
from .functions import NodedFunction
from .rational import FixedPointData, Mobius, _local_expansion, mobius_conjugate, residue
from .scalars import DEFAULT_PREC, INF, coerce, context, is_zero, magnitude
from .spheres import crush_data, is_connected_realization, puncture_labels

STEPS = 8
RATIO = 0.5
RETRIES = 8


# --- the symmetric-function system ------------------------------------------------

def _elementary(values, one=None) -> list:
    """e_0, ..., e_m of the given values (``one`` fixes the scalar type)."""
    if one is None:
        one = coerce([1, *values])[0] if values else 1
    e = [one]
    for x in values:
        e = [e[0]] + [e[j] + x * e[j - 1] for j in range(1, len(e))] + [x * e[-1]]
    return e


@dataclass(frozen=True)
class SymMatrix:
    eps: tuple
    rows: tuple            # rows[j][nu] = sigma_nu^(j), j = 0..L-1

    @property
    def L(self) -> int:
        return len(self.eps)

    def det(self):
        """Determinant by fraction-free elimination (exact in exact mode)."""
        a = [list(r) for r in self.rows]
        n = len(a)
        sign = 1
        prev = coerce([1, *self.eps])[0]
        for k in range(n - 1):
            piv = next((i for i in range(k, n) if not is_zero(a[i][k])), None)
            if piv is None:
                return 0 * prev
            if piv != k:
                a[k], a[piv] = a[piv], a[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev
            prev = a[k][k]
        return sign * a[-1][-1]

    def product_formula(self):
        e = coerce([1, *self.eps])
        out = e[0]
        for m in range(1, len(e)):
            for n in range(m + 1, len(e)):
                out = out * (e[m] - e[n])
        return out


def _check_distinct(eps):
    for i in range(len(eps)):
        for j in range(i + 1, len(eps)):
            if is_zero(eps[i] - eps[j]):
                raise SingularInputError(f"eps values {i + 1} and {j + 1} coincide")


def sym_matrix(eps) -> SymMatrix:
    eps = tuple(coerce(eps)) if eps else ()
    if not eps:
        raise SingularInputError("need at least one eps value")
    _check_distinct(eps)
    L = len(eps)
    one = coerce([1, *eps])[0]
    cols = [_elementary([x for m, x in enumerate(eps) if m != nu], one) for nu in range(L)]
    rows = tuple(tuple(cols[nu][j] for nu in range(L)) for j in range(L))
    return SymMatrix(eps, rows)


def sym_inverse(m: SymMatrix) -> list[list]:
    """Inverse[k][j] = (-1)^j eps_k^(L-1-j) / Delta_k (0-based j)."""
    eps = m.eps
    _check_distinct(eps)
    L = m.L
    out = []
    for k in range(L):
        delta = coerce([1, *eps])[0]
        for nu in range(L):
            if nu != k:
                delta = delta * (eps[k] - eps[nu])
        out.append([(-1) ** j * eps[k] ** (L - 1 - j) / delta for j in range(L)])
    return out


def matmul(a, b) -> list[list]:
    return [[sum((a[i][t] * b[t][j] for t in range(1, len(b))), a[i][0] * b[0][j])
             for j in range(len(b[0]))] for i in range(len(a))]


def solve_lambdas(eps, a_targets) -> tuple:
    """lambda with M(eps) lambda = a_targets, where a_targets is the vector
    (A_{L-1}, -A_{L-2}, ..., (-1)^(L-1) A_0)."""
    m = sym_matrix(eps)
    if len(a_targets) != m.L:
        raise SingularInputError(f"need {m.L} targets, got {len(a_targets)}")
    inv = sym_inverse(m)
    a = coerce(list(a_targets) + list(m.eps))[:m.L]
    return tuple(sum((inv[k][j] * a[j] for j in range(1, m.L)), inv[k][0] * a[0]) for k in range(m.L))


def numerator_coefficients(eps, lams) -> list:
    """A_0, ..., A_{L-1} of sum_nu lambda_nu prod_{mu != nu} (z - eps_mu)."""
    L = len(eps)
    out = None
    for nu in range(L):
        e = _elementary([-x for m, x in enumerate(eps) if m != nu])
        # prod (z - eps_mu) = sum_j e_j(-eps) z^(L-1-j)
        term = [lams[nu] * e[L - 1 - i] for i in range(L)]
        out = term if out is None else [x + y for x, y in zip(out, term)]
    return out


def signed_targets(cs) -> list:
    """Principal-part coefficients (c_1..c_L) -> ((-1)^(nu-1) c_nu): the
    reopened numerator then has A_{L-nu} = c_nu."""
    return [(-1) ** nu * c for nu, c in enumerate(cs)]


# --- plans -------------------------------------------------------------------------

@dataclass
class ReopeningPlan:
    """Schedule for one singular puncture at chart point ``point``."""
    point: object
    coeffs: tuple                  # (c_1, ..., c_L) in the common chart
    eps0: float
    ratio: float = RATIO
    prec: int = DEFAULT_PREC
    seed: int = 0
    perturbations: list = field(default_factory=list)

    @property
    def L(self) -> int:
        return len(self.coeffs)

    def eps(self, t: int) -> tuple:
        ctx = context(self.prec)
        h = ctx.mpf(self.eps0) * ctx.mpf(self.ratio) ** t
        return tuple(ctx.mpc(nu) * h for nu in range(1, self.L + 1))

    def solve(self, t: int) -> tuple:
        """(eps, lambdas, A-targets) at step t, nudging the targets if a
        lambda vanishes.  The first target (the index total) is never moved."""
        ctx = context(self.prec)
        eps = self.eps(t)
        a = [ctx.mpc(x) for x in signed_targets(coerce(self.coeffs, self.prec))]
        rng = random.Random(self.seed * 1000003 + t)
        size = ctx.mpf(10) ** (-int(self.prec * 0.30103) // 2)
        for attempt in range(RETRIES + 1):
            lams = solve_lambdas(eps, a)
            if not any(is_zero(x) or magnitude(x) < 1e-300 for x in lams):
                return eps, lams, a
            if self.L == 1:
                break
            a = [a[0]] + [x + size * ctx.expjpi(2 * ctx.mpf(rng.random())) for x in a[1:]]
            self.perturbations.append((t, attempt))
        raise PlanFailure(f"could not avoid a zero index at step {t} after {RETRIES} perturbations")


# --- families ----------------------------------------------------------------------

@dataclass
class ComponentFamily:
    cid: int
    labels: list               # per data position: marking label (or puncture id)
    chart: Mobius              # component coordinate -> common chart
    samples: list              # FamilySample per step
    plans: dict                # singular puncture id -> ReopeningPlan


@dataclass
class ReopenedFamily:
    components: dict           # cid -> ComponentFamily
    samples: list | None       # degeneration-ready samples (single ordinary component)
    hint: object


def _finite_chart(positions) -> Mobius:
    if all(p is not INF for p in positions):
        return Mobius.identity()
    finite = [p for p in positions if p is not INF]
    s = max((magnitude(p) for p in finite), default=0.0) + 1
    s = coerce([s, *finite])[0]
    return Mobius(0, 1, 1, -s)


def _min_separation(points) -> float:
    return min(magnitude(a - b) for i, a in enumerate(points) for b in points[i + 1:])


def reopen_component(nf: NodedFunction, cid: int, steps: int = STEPS, k0: float = 1.0,
                     ratio: float = RATIO, prec: int = DEFAULT_PREC, seed: int = 0,
                     tau0: float = 0.125) -> ComponentFamily:
    """Generic maps on one ordinary component converging to its map with
    each singular puncture reopened."""
    s = nf.sphere
    comp = s.component(cid)
    F = nf.maps[cid]
    cd = crush_data(nf.crush)
    labels = puncture_labels(nf.crush, nf.marking, cd)
    T = _finite_chart([p.pos for p in comp.punctures])
    G = mobius_conjugate(F.to_numeric(prec) if F.exact else F, T)
    pos = {p.id: coerce([T(p.pos)], prec)[0] for p in comp.punctures}

    simple, singular = [], []
    for p in comp.punctures:
        k = cd.bouquet_of(p.id)
        if k is None:
            simple.append((p.id, residue(G, pos[p.id])))
        else:
            L = cd.bouquets[k].level
            m, cs = _local_expansion(G, pos[p.id])
            cs = list(cs[:L]) + [0 * pos[p.id]] * (L - min(m, L))
            singular.append((p.id, L, cs, k))

    sep = _min_separation(list(pos.values()))
    Lmax = max((L for _, L, _, _ in singular), default=1)
    eps0 = sep / (4 * Lmax + 4)
    plans = {pid: ReopeningPlan(pos[pid], tuple(cs), eps0, ratio, prec, seed + i)
             for i, (pid, L, cs, _) in enumerate(singular)}

    # data positions: labelled entries first, in label order
    slots = []
    for pid, _ in simple:
        key = labels[pid] if pid not in s.partner else 10 ** 6 + pid
        slots.append((key, ("simple", pid)))
    for pid, L, _, k in singular:
        if len(cd.bouquets[k].members) == 1:
            keys = sorted(nf.marking.parts[cd.A + k])
        else:
            keys = [10 ** 6 + 1000 * pid + i for i in range(L)]
        for nu, key in enumerate(keys):
            slots.append((key, ("reopened", pid, nu)))
    slots.sort(key=lambda x: x[0])

    ctx = context(prec)
    lam_of = dict(simple)
    zero_simple = [pid for pid, lam in simple if is_zero(lam) or magnitude(lam) < 2.0 ** (-prec / 2)]
    donors = [pid for pid, lam in simple if pid not in zero_simple]
    samples = []
    for t in range(steps):
        solved = {pid: plan.solve(t) for pid, plan in plans.items()}
        lam_t = dict(lam_of)
        if zero_simple:
            tau = ctx.mpf(tau0) * ctx.mpf(ratio) ** t
            for pid in zero_simple:
                lam_t[pid] = ctx.mpc(tau)
            shift = tau * len(zero_simple)
            if donors:
                d = max(donors, key=lambda q: magnitude(lam_of[q]))
                lam_t[d] = lam_of[d] - shift
            else:
                pid = next(iter(solved))
                eps, _, a = solved[pid]
                a = [a[0] - shift] + list(a[1:])
                solved[pid] = (eps, solve_lambdas(eps, a), a)
        entries = []
        for _, slot in slots:
            if slot[0] == "simple":
                entries.append((pos[slot[1]], lam_t[slot[1]]))
            else:
                _, pid, nu = slot
                eps, lams, _ = solved[pid]
                entries.append((pos[pid] + eps[nu], lams[nu]))
        samples.append(FamilySample(k0 / ratio ** t, FixedPointData(tuple(entries))))
    return ComponentFamily(cid, [k for k, _ in slots], T, samples, plans)


def reopen_family(nf: NodedFunction, steps: int = STEPS, k0: float = 1.0, ratio: float = RATIO,
                  prec: int = DEFAULT_PREC, seed: int = 0) -> ReopenedFamily:
    if not is_connected_realization(nf.crush):
        raise UnsupportedError("unsupported: non-singular node surgery (the realization is disconnected)")
    comps = {cid: reopen_component(nf, cid, steps, k0, ratio, prec, seed + 97 * i)
             for i, cid in enumerate(sorted(nf.crush.ordinary))}
    samples = None
    if len(comps) == 1:
        fam = next(iter(comps.values()))
        if fam.labels == list(range(1, nf.sphere.n + 1)):
            samples = fam.samples
    return ReopenedFamily(comps, samples, nf.crush)


__all__ = [
    "SymMatrix", "sym_matrix", "sym_inverse", "solve_lambdas", "numerator_coefficients",
    "signed_targets", "matmul", "ReopeningPlan", "ComponentFamily", "ReopenedFamily",
    "reopen_component", "reopen_family",
]
