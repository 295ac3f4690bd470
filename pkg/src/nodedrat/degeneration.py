"""Numerical limits of families of marked generic rational maps.

Fixed points that collide are clustered (recursively, at every scale), the
index moments of each cluster are extrapolated, components whose moments
blow up are crushed, and the limit rational function with nodes is assembled
from the limiting principal parts."""

from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx

from .errors import InconsistencyError, NoLimitError, NodedRationalError, ScheduleError
from .extrapolation import extrapolate
from .functions import NodedFunction, reduced_decoration, validate_noded_function
from .rational import FixedPointData, from_principal_parts
from .scalars import DEFAULT_PREC, coerce, context, magnitude
from .spheres import Component, Marking, NodedSphere, PartialCrush, Puncture, crush_data

DEFAULT_TOL = 1e-6


@dataclass(frozen=True)
class FamilySample:
    k: float
    data: FixedPointData


@dataclass(frozen=True)
class Cluster:
    members: tuple          # 1-based labels
    point: object
    coeffs: tuple = ()      # Limit per moment, filled by limit_decoration

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass
class Group:
    labels: list
    pos: object
    moments: list = field(default_factory=list)
    child: int | None = None       # component reached through this puncture
    is_parent: bool = False
    puncture: int | None = None    # puncture id in the assembled sphere
    level: int = 1


@dataclass
class LimitComponent:
    cid: int
    chart: str
    zeta: list                     # per sample: label -> chart coordinate
    groups: list
    parent: int | None = None
    kind: str = "ordinary"


@dataclass
class DegenerationReport:
    clusters: list
    components: list
    limit: NodedFunction | None
    residuals: list                 # (k, residual)
    truncation: float
    finite: list = field(default_factory=list)   # (k, NodedFunction rebuilt at k)
    matches_hint: bool | None = None
    notes: list = field(default_factory=list)

    @property
    def crushed(self) -> list[int]:
        return [c.cid for c in self.components if c.kind == "crushed"]

    @property
    def ordinary(self) -> list[int]:
        return [c.cid for c in self.components if c.kind == "ordinary"]


# --- sample tables -------------------------------------------------------------

def _tables(samples, prec: int):
    if len(samples) < 3:
        raise ScheduleError(f"need at least 3 samples, got {len(samples)}")
    ks = [s.k for s in samples]
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ScheduleError("schedule values k must be strictly increasing")
    n = len(samples[0].data)
    X, Lam = [], []
    for s in samples:
        if len(s.data) != n:
            raise ScheduleError("every sample must carry the same number of labelled points")
        vals = coerce(s.data.points + s.data.indices, prec)
        X.append({j + 1: vals[j] for j in range(n)})
        Lam.append({j + 1: vals[n + j] for j in range(n)})
    return ks, X, Lam, n


def _union_clusters(labels, lims, tol: float) -> list[list[int]]:
    g = nx.Graph()
    g.add_nodes_from(labels)
    for a in labels:
        for b in labels:
            if a < b and magnitude(lims[a] - lims[b]) <= tol:
                g.add_edge(a, b)
    comps = [sorted(c) for c in nx.connected_components(g)]
    return sorted(comps, key=lambda c: c[0])


def _limits(ks, coords, labels, prec, what="point"):
    out = {}
    for j in labels:
        lim = extrapolate(ks, [c[j] for c in coords], prec, what=f"{what} {j}")
        if lim.diverges:
            raise NoLimitError(f"{what} {j} escapes to infinity in this chart")
        out[j] = lim.value
    return out


def cluster_fixed_points(samples, tol: float = DEFAULT_TOL, prec: int = DEFAULT_PREC) -> list[Cluster]:
    """Group labels whose extrapolated limit points lie within ``tol``
    (transitive closure, ties merge)."""
    ks, X, _, n = _tables(samples, prec)
    labels = list(range(1, n + 1))
    lims = _limits(ks, X, labels, prec)
    out = []
    for c in _union_clusters(labels, lims, tol):
        pts = [lims[j] for j in c]
        out.append(Cluster(tuple(c), sum(pts[1:], pts[0]) / len(pts)))
    return out


def _moments(Lam_i, zeta_i, labels, pos, L):
    out = []
    for l in range(1, L + 1):
        acc = 0
        for j in labels:
            acc = acc + Lam_i[j] * (zeta_i[j] - pos) ** (l - 1)
        out.append(acc)
    return out


def limit_decoration(samples, cluster: Cluster, prec: int = DEFAULT_PREC) -> tuple:
    """Extrapolated moments sum_j lambda_j (p_j - p)^(l-1), l = 1..|cluster|."""
    ks, X, Lam, _ = _tables(samples, prec)
    L = cluster.size
    seqs = [_moments(Lam[i], X[i], cluster.members, cluster.point, L) for i in range(len(ks))]
    return tuple(extrapolate(ks, [s[l] for s in seqs], prec, what=f"moment {l + 1}")
                 for l in range(L))


# --- multi-scale limit tree ----------------------------------------------------

class _TreeBuilder:
    def __init__(self, ks, X, Lam, n, tol, prec):
        self.ks, self.X, self.Lam, self.n = ks, X, Lam, n
        self.tol, self.prec = tol, prec
        self.ctx = context(prec)
        self.components: list[LimitComponent] = []
        self.links: list[tuple] = []      # (cid_a, group_a, cid_b, group_b)

    def build(self):
        labels = list(range(1, self.n + 1))
        w = [dict(x) for x in self.X]
        for _ in range(12):
            lims = _limits(self.ks, w, labels, self.prec)
            clusters = _union_clusters(labels, lims, self.tol)
            if len(clusters) != 1:
                break
            w = self._rescale(w, labels)
        else:
            raise NoLimitError("all fixed points coincide at every scale")
        if len(clusters) >= 3:
            comp = self._new_component("identity", w, None)
            for c in clusters:
                pos = sum((lims[j] for j in c), 0 * lims[c[0]]) / len(c)
                g = Group(c, pos)
                comp.groups.append(g)
                if len(c) > 1:
                    g.child = self._bubble(c, w, comp.cid)
            return
        big, small = sorted(clusters, key=len, reverse=True)
        if len(small) == 1:
            self._bubble(big, w, None, parent_label=small[0])
            return
        a = self._bubble(big, w, None)
        b = self._bubble(small, w, None)
        ga = self.components[a].groups[-1]
        gb = self.components[b].groups[-1]
        ga.child, gb.child = b, a
        self.links.append((a, b))

    def _new_component(self, chart, zeta, parent) -> LimitComponent:
        comp = LimitComponent(len(self.components), chart, zeta, [], parent)
        self.components.append(comp)
        return comp

    def _rescale(self, w, members):
        last = w[-1]
        a, b = max(((x, y) for x in members for y in members if x < y),
                   key=lambda p: magnitude(last[p[0]] - last[p[1]]))
        out = []
        for wi in w:
            c = sum((wi[j] for j in members), 0 * wi[members[0]]) / len(members)
            s = wi[a] - wi[b]
            if s == 0:
                raise NoLimitError(f"labels {a} and {b} coincide exactly; cannot rescale")
            out.append({j: (v - c) / s for j, v in wi.items()})
        return out

    def _bubble(self, members, w_parent, parent_cid, parent_label=None) -> int:
        w = self._rescale(w_parent, members)
        lims = _limits(self.ks, w, members, self.prec)
        subs = _union_clusters(members, lims, self.tol)
        radius = max(magnitude(v) for v in lims.values())
        s = self.ctx.mpc(radius + 1.5, 0.5)
        zeta = [{j: 1 / (v - s) for j, v in wi.items()} for wi in w]
        comp = self._new_component("inverted", zeta, parent_cid)
        for c in subs:
            pos = sum((1 / (lims[j] - s) for j in c), self.ctx.mpc(0)) / len(c)
            g = Group(c, pos)
            comp.groups.append(g)
            if len(c) > 1:
                g.child = self._bubble(c, w, comp.cid)
        outside = [j for j in range(1, self.n + 1) if j not in set(members)]
        pg = Group(outside, self.ctx.mpc(0), is_parent=True)
        if parent_cid is not None:
            pg.child = parent_cid
        comp.groups.append(pg)
        return comp.cid

    def moments(self):
        ks = self.ks
        for comp in self.components:
            for g in comp.groups:
                L = len(g.labels)
                seqs = [_moments(self.Lam[i], comp.zeta[i], g.labels, g.pos, L)
                        for i in range(len(ks))]
                g.moments = [extrapolate(ks, [s[l] for s in seqs], self.prec,
                                         what=f"moment {l + 1} of labels {g.labels}")
                             for l in range(L)]
                g.samples = seqs
            if any(m.diverges for g in comp.groups for m in g.moments):
                comp.kind = "crushed"


# --- assembly --------------------------------------------------------------------

def _merge_crushed(builder: _TreeBuilder):
    """Crushed components that touch each other form one crushed region."""
    comps = builder.components
    g = nx.Graph()
    g.add_nodes_from(c.cid for c in comps if c.kind == "crushed")
    for c in comps:
        for grp in c.groups:
            if grp.child is not None and c.kind == "crushed" and comps[grp.child].kind == "crushed":
                g.add_edge(c.cid, grp.child)
    return [sorted(r) for r in nx.connected_components(g)]


def classify_and_assemble(samples, tol: float = DEFAULT_TOL, prec: int = DEFAULT_PREC,
                          hint: PartialCrush | None = None) -> DegenerationReport:
    ks, X, Lam, n = _tables(samples, prec)
    b = _TreeBuilder(ks, X, Lam, n, tol, prec)
    b.build()
    b.moments()
    comps = b.components
    ctx = context(prec)

    # puncture ids: labels keep their own id; nodal punctures get fresh ids
    next_id = 1000
    for c in comps:
        for g in c.groups:
            if g.child is None and len(g.labels) == 1:
                g.puncture = g.labels[0]
            else:
                g.puncture = next_id
                next_id += 1

    # nodes: each child link once
    nodes = []
    seen = set()
    for c in comps:
        for g in c.groups:
            if g.child is None:
                continue
            key = frozenset((c.cid, g.child))
            if key in seen:
                continue
            seen.add(key)
            other = comps[g.child]
            og = next(h for h in other.groups if h.child == c.cid)
            nodes.append((g.puncture, og.puncture, c.cid, other.cid))

    regions = _merge_crushed(b)
    region_of = {cid: tuple(r) for r in regions for cid in r}
    internal = {frozenset((a, b_)) for a, b_, ca, cb in nodes
                if ca in region_of and cb in region_of and region_of[ca] == region_of[cb]}

    def region_level(cid):
        return sum(1 for r in region_of[cid] for g in comps[r].groups
                   if g.child is None and len(g.labels) == 1)

    sphere_comps = []
    maps = {}
    truncation = 0.0
    notes = []
    done_regions = set()
    for c in comps:
        if c.kind == "crushed":
            reg = region_of[c.cid]
            if reg in done_regions:
                continue
            done_regions.add(reg)
            pids = [g.puncture for r in reg for g in comps[r].groups
                    if not any(g.puncture in pair for pair in internal)]
            if len(reg) == 1:
                pts = tuple(Puncture(g.puncture, g.pos) for g in c.groups)
            else:
                pts = tuple(Puncture(pid, ctx.mpc(i)) for i, pid in enumerate(pids))
            sphere_comps.append(Component(reg[0], pts))
            continue
        parts = []
        for g in c.groups:
            if g.child is not None and comps[g.child].kind == "crushed":
                g.level = region_level(g.child)
            else:
                g.level = 1
            if any(m.diverges for m in g.moments):
                raise InconsistencyError(f"diverging moments on ordinary component {c.cid}")
            vals = [m.value for m in g.moments]
            kept = vals[:g.level]
            kept += [0 * vals[0]] * (g.level - len(kept))
            if len(vals) > g.level:
                extra = max(magnitude(v) for v in vals[g.level:])
                truncation = max(truncation, extra)
            parts.append((g.pos, kept))
        maps[c.cid] = from_principal_parts(parts, prec)
        sphere_comps.append(Component(c.cid, tuple(Puncture(g.puncture, g.pos) for g in c.groups)))

    sphere_nodes = [(a, b_) for a, b_, _, _ in nodes if frozenset((a, b_)) not in internal]
    sphere = NodedSphere(tuple(sphere_comps), tuple(sphere_nodes))
    ordinary = {c.cid for c in comps if c.kind == "ordinary"}
    if not ordinary:
        raise InconsistencyError("every component of the limit is crushed")
    pc = PartialCrush(sphere, ordinary)
    cd = crush_data(pc)
    parts = []
    for x in cd.x_order():
        if isinstance(x, frozenset):
            k = cd.bouquet_of(next(iter(x)))
            labels = [pid for cid in cd.bouquets[k].region for pid in sphere.non_nodal(cid)]
            parts.append(frozenset(labels))
        else:
            parts.append(frozenset({x}))
    nf = NodedFunction(pc, Marking(tuple(parts)), maps)
    violations = validate_noded_function(nf, tol=max(tol, 1e-12))
    if violations:
        raise InconsistencyError("assembled limit is not a valid rational function with nodes",
                                 violations)

    finite = _finite_structures(b, nf, ks)
    residuals = _residual_trace(nf, finite)
    clusters = cluster_summaries(b)
    matches = None
    if hint is not None:
        matches = _shape(pc) == _shape(hint)
    if truncation > 1e-3:
        notes.append(f"discarded higher moments up to {truncation:.3g}")
    return DegenerationReport(clusters, comps, nf, residuals, truncation, finite=finite,
                              matches_hint=matches, notes=notes)


def cluster_summaries(b: _TreeBuilder) -> list[Cluster]:
    out = []
    for c in b.components:
        for g in c.groups:
            if g.is_parent:
                continue
            out.append(Cluster(tuple(g.labels), g.pos, tuple(g.moments)))
    return out


def _shape(pc: PartialCrush):
    cd = crush_data(pc)
    return (pc.sphere.M, pc.I, tuple(sorted((b.level, b.size) for b in cd.bouquets)), pc.sphere.n)


def _finite_structures(b: _TreeBuilder, nf: NodedFunction, ks) -> list[tuple]:
    """Per sample: the limit's marked crush carrying maps rebuilt from the
    finite-k moments (truncated at the levels, placed at the limit points)."""
    out = []
    for i, k in enumerate(ks):
        maps = {}
        for c in b.components:
            if c.kind != "ordinary":
                continue
            parts = []
            for g in c.groups:
                vals = g.samples[i][:g.level]
                vals += [0 * vals[0]] * (g.level - len(vals))
                parts.append((g.pos, vals))
            maps[c.cid] = from_principal_parts(parts, b.prec)
        out.append((k, NodedFunction(nf.crush, nf.marking, maps)))
    return out


def _residual_trace(nf: NodedFunction, finite) -> list[tuple]:
    """Largest deviation of each finite-k decoration from the limit's."""
    target = reduced_decoration(nf).flat()
    out = []
    for k, fk in finite:
        try:
            cur = reduced_decoration(fk).flat()
        except (NodedRationalError, ZeroDivisionError):
            # finite-k data still too far from the limit shape
            out.append((k, float("inf")))
            continue
        pairs = [coerce((x, y)) for x, y in zip(cur, target)]
        out.append((k, max((magnitude(x - y) for x, y in pairs), default=0.0)))
    return out


def degenerate(samples, tol: float = DEFAULT_TOL, prec: int = DEFAULT_PREC, hint=None) -> DegenerationReport:
    return classify_and_assemble(samples, tol, prec, hint)
