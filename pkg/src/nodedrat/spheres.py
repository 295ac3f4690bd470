"""Punctured Riemann spheres with nodes, partial crushes, crush data,
markings and a canonical form for marked partial crushes."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import networkx as nx

from .errors import ValidationError, Violation
from .rational import Mobius, mobius_from_triple
from .scalars import INF, coerce, distance, field_prec, is_zero, magnitude, tolerance


@dataclass(frozen=True)
class Puncture:
    id: int
    pos: object


@dataclass(frozen=True)
class Component:
    id: int
    punctures: tuple

    def __post_init__(self):
        object.__setattr__(self, "punctures", tuple(self.punctures))

    @property
    def n_m(self) -> int:
        return len(self.punctures)

    @property
    def puncture_ids(self) -> list[int]:
        return [p.id for p in self.punctures]

    def position(self, pid: int):
        for p in self.punctures:
            if p.id == pid:
                return p.pos
        raise KeyError(pid)


@dataclass(frozen=True)
class NodedSphere:
    components: tuple
    nodes: tuple
    n: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "nodes", tuple(tuple(nd) for nd in self.nodes))
        if self.n is None:
            total = sum(c.n_m for c in self.components)
            object.__setattr__(self, "n", total - 2 * len(self.nodes))

    @property
    def M(self) -> int:
        return len(self.components)

    @property
    def J(self) -> int:
        return len(self.nodes)

    @cached_property
    def owner(self) -> dict[int, int]:
        """puncture id -> component id"""
        return {p.id: c.id for c in self.components for p in c.punctures}

    @cached_property
    def partner(self) -> dict[int, int]:
        out = {}
        for a, b in self.nodes:
            out[a] = b
            out[b] = a
        return out

    def component(self, cid: int) -> Component:
        for c in self.components:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def non_nodal(self, cid: int) -> list[int]:
        return [pid for pid in self.component(cid).puncture_ids if pid not in self.partner]

    def dual_graph(self) -> nx.MultiGraph:
        g = nx.MultiGraph()
        g.add_nodes_from(c.id for c in self.components)
        for i, (a, b) in enumerate(self.nodes):
            if a in self.owner and b in self.owner:
                g.add_edge(self.owner[a], self.owner[b], index=i, pair=(a, b))
        return g


def validate_sphere(s: NodedSphere) -> list[Violation]:
    """Every violated invariant of a noded sphere (empty list = valid)."""
    out: list[Violation] = []
    seen: dict[int, int] = {}
    for c in s.components:
        if c.n_m < 3:
            out.append(Violation("component-size", f"component {c.id} has {c.n_m} < 3 punctures",
                                 {"component": c.id}))
        for p in c.punctures:
            if p.id in seen:
                out.append(Violation("duplicate-puncture", f"puncture {p.id} appears twice",
                                     {"puncture": p.id}))
            seen[p.id] = c.id
        pos = [p.pos for p in c.punctures]
        for i in range(len(pos)):
            for j in range(i + 1, len(pos)):
                if distance(pos[i], pos[j]) == 0:
                    out.append(Violation("positions-distinct",
                                         f"punctures {c.punctures[i].id} and {c.punctures[j].id} coincide",
                                         {"component": c.id}))
    if len({c.id for c in s.components}) != s.M:
        out.append(Violation("duplicate-component", "component ids are not unique"))
    used: dict[int, int] = {}
    for i, (a, b) in enumerate(s.nodes):
        for p in (a, b):
            if p not in seen:
                out.append(Violation("node-unknown-puncture", f"node {i} uses unknown puncture {p}",
                                     {"node": i}))
            elif p in used:
                out.append(Violation("puncture-multi-node",
                                     f"puncture {p} lies in nodes {used[p]} and {i}",
                                     {"node": i, "puncture": p}))
            else:
                used[p] = i
        if a in seen and b in seen and seen[a] == seen[b]:
            out.append(Violation("node-same-component",
                                 f"node {i} joins two punctures of component {seen[a]}", {"node": i}))
    total = sum(c.n_m for c in s.components)
    if total != 2 * s.J + s.n:
        out.append(Violation("count-identity",
                             f"sum of n_m = {total} but 2J + n = {2 * s.J + s.n}"))
    if s.J != s.M - 1:
        out.append(Violation("node-count", f"J = {s.J} but M - 1 = {s.M - 1}"))
    if s.M - 1 > s.n - 3:
        out.append(Violation("stability", f"J = M - 1 = {s.M - 1} exceeds n - 3 = {s.n - 3}"))
    if s.M and not nx.is_connected(s.dual_graph()):
        out.append(Violation("dual-graph-tree", "dual graph is not connected"))
    elif s.M and s.J == s.M - 1 and not nx.is_tree(nx.Graph(s.dual_graph())) and s.J:
        out.append(Violation("dual-graph-tree", "dual graph has a cycle"))
    return out


# --- partial crushes ---------------------------------------------------------

@dataclass(frozen=True)
class PartialCrush:
    sphere: NodedSphere
    ordinary: frozenset
    retained: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "ordinary", frozenset(self.ordinary))
        if self.retained is None:
            s = self.sphere
            keep = tuple(i for i, (a, b) in enumerate(s.nodes)
                         if s.owner.get(a) in self.ordinary and s.owner.get(b) in self.ordinary)
            object.__setattr__(self, "retained", keep)
        else:
            object.__setattr__(self, "retained", tuple(self.retained))

    @property
    def crushed(self) -> list[int]:
        return [c.id for c in self.sphere.components if c.id not in self.ordinary]

    @property
    def I(self) -> int:
        return len(self.ordinary)

    def ordinary_components(self) -> list[Component]:
        return [c for c in self.sphere.components if c.id in self.ordinary]


def validate_crush(pc: PartialCrush) -> list[Violation]:
    s = pc.sphere
    out: list[Violation] = []
    ids = {c.id for c in s.components}
    if not pc.ordinary <= ids:
        out.append(Violation("subset", f"unknown ordinary components {sorted(pc.ordinary - ids)}"))
    if not pc.ordinary:
        out.append(Violation("no-ordinary", "a partial crush needs at least one ordinary component"))
    for i in pc.retained:
        if not 0 <= i < s.J:
            out.append(Violation("subset", f"retained node {i} is not a node of the sphere"))
    for i, (a, b) in enumerate(s.nodes):
        if s.owner.get(a) not in pc.ordinary and s.owner.get(b) not in pc.ordinary:
            out.append(Violation("node-touches-ordinary",
                                 f"node {i} joins two crushed components", {"node": i}))
    for cid in pc.crushed:
        k = len(s.non_nodal(cid)) if cid in ids else 0
        if k < 2:
            out.append(Violation("crushed-non-nodal",
                                 f"crushed component {cid} has {k} < 2 non-nodal punctures",
                                 {"component": cid}))
    expected = {i for i, (a, b) in enumerate(s.nodes)
                if s.owner.get(a) in pc.ordinary and s.owner.get(b) in pc.ordinary}
    if set(pc.retained) != expected:
        out.append(Violation("retained-nodes",
                             "retained nodes must be exactly the nodes between ordinary components",
                             {"expected": sorted(expected), "given": sorted(pc.retained)}))
    return out


@dataclass(frozen=True)
class Bouquet:
    members: tuple          # puncture ids on ordinary components
    level: int
    region: tuple           # crushed component ids

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class CrushData:
    bouquets: tuple
    nonsingular: tuple      # the non-nodal punctures of ordinary components

    @property
    def A(self) -> int:
        return len(self.nonsingular)

    @property
    def N(self) -> int:
        return len(self.bouquets)

    def x_order(self) -> list:
        """Elements of X(R): puncture ids of the q_r, then bouquets as frozensets."""
        return list(self.nonsingular) + [frozenset(b.members) for b in self.bouquets]

    def levels(self) -> list[int]:
        return [1] * self.A + [b.level for b in self.bouquets]

    def bouquet_of(self, pid: int) -> int | None:
        for i, b in enumerate(self.bouquets):
            if pid in b.members:
                return i
        return None


def _require_valid(pc: PartialCrush):
    v = validate_sphere(pc.sphere) + validate_crush(pc)
    if v:
        raise ValidationError("invalid partial crush", v)


def crush_data(pc: PartialCrush) -> CrushData:
    _require_valid(pc)
    s = pc.sphere
    crushed = set(pc.crushed)
    g = nx.Graph()
    g.add_nodes_from(crushed)
    for a, b in s.nodes:
        if s.owner[a] in crushed and s.owner[b] in crushed:
            g.add_edge(s.owner[a], s.owner[b])
    regions = sorted((sorted(r) for r in nx.connected_components(g)), key=lambda r: r[0])
    bouquets = []
    for region in regions:
        rs = set(region)
        level = sum(len(s.non_nodal(cid)) for cid in region)
        members = []
        for a, b in s.nodes:
            if s.owner[a] in rs and s.owner[b] in pc.ordinary:
                members.append(b)
            elif s.owner[b] in rs and s.owner[a] in pc.ordinary:
                members.append(a)
        bouquets.append(Bouquet(tuple(sorted(members)), level, tuple(region)))
    nonsingular = tuple(pid for c in s.components if c.id in pc.ordinary
                        for pid in c.puncture_ids if pid not in s.partner)
    cd = CrushData(tuple(bouquets), nonsingular)
    return cd


def crush_data_violations(pc: PartialCrush, cd: CrushData) -> list[Violation]:
    """Counting identities for crush data (all hold for data built by crush_data)."""
    out = []
    s = pc.sphere
    if cd.A + sum(b.level for b in cd.bouquets) != s.n:
        out.append(Violation("level-sum", f"A + sum L = {cd.A + sum(b.level for b in cd.bouquets)} != n = {s.n}"))
    for i, b in enumerate(cd.bouquets):
        if b.level < 2:
            out.append(Violation("bouquet-level", f"bouquet {i} has level {b.level} < 2", {"bouquet": i}))
        owners = [s.owner[p] for p in b.members]
        if len(set(owners)) != len(owners):
            out.append(Violation("bouquet-component",
                                 f"bouquet {i} has two punctures on one component", {"bouquet": i}))
    if cd.N != s.M - pc.I:
        out.append(Violation("bouquet-count", f"N = {cd.N} but M - I = {s.M - pc.I}"))
    return out


# --- markings ----------------------------------------------------------------

@dataclass(frozen=True)
class Marking:
    """Ordered partition (E_1, ..., E_{A+N}) of {1..n}, aligned with X(R)."""

    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(frozenset(p) for p in self.parts))

    def assignment(self, cd: CrushData) -> dict[int, object]:
        """The surjection: label -> element of X(R)."""
        xs = cd.x_order()
        return {lab: xs[r] for r, part in enumerate(self.parts) for lab in part}

    def part_for(self, cd: CrushData, x) -> frozenset:
        return self.parts[cd.x_order().index(x)]

    @classmethod
    def standard(cls, cd: CrushData) -> "Marking":
        parts, k = [], 1
        for lev in cd.levels():
            parts.append(frozenset(range(k, k + lev)))
            k += lev
        return cls(tuple(parts))


def validate_marking(pc: PartialCrush, m: Marking, cd: CrushData | None = None) -> list[Violation]:
    cd = cd or crush_data(pc)
    n = pc.sphere.n
    out = []
    labels = [lab for p in m.parts for lab in p]
    if len(labels) != len(set(labels)):
        out.append(Violation("marking-disjoint", "marking parts overlap"))
    if set(labels) != set(range(1, n + 1)):
        out.append(Violation("marking-labels", f"marking must use exactly the labels 1..{n}"))
    levels = cd.levels()
    if len(m.parts) != len(levels):
        out.append(Violation("marking-surjective",
                             f"marking has {len(m.parts)} parts but X has {len(levels)} elements"))
    else:
        for r, (part, lev) in enumerate(zip(m.parts, levels)):
            if len(part) != lev:
                out.append(Violation("marking-level",
                                     f"part {r} has {len(part)} labels, level is {lev}", {"part": r}))
    return out


def validate_all(pc: PartialCrush, m: Marking | None = None) -> list[Violation]:
    """Sphere, crush, crush-data and marking checks in one list."""
    v = validate_sphere(pc.sphere)
    if v:
        return v
    v = validate_crush(pc)
    if v:
        return v
    cd = crush_data(pc)
    v = crush_data_violations(pc, cd)
    if m is not None and not v:
        v = validate_marking(pc, m, cd)
    return v


# --- realizations --------------------------------------------------------------

def reduced_realization(pc: PartialCrush) -> nx.Graph:
    """Ordinary components plus one vertex per singular node (bouquet)."""
    cd = crush_data(pc)
    s = pc.sphere
    g = nx.Graph()
    for cid in sorted(pc.ordinary):
        g.add_node(("component", cid))
    for i in pc.retained:
        a, b = s.nodes[i]
        g.add_edge(("component", s.owner[a]), ("component", s.owner[b]),
                   kind="node", index=i, pair=(a, b))
    for k, b in enumerate(cd.bouquets):
        v = ("singular", k)
        g.add_node(v, bouquet=b.members, level=b.level)
        for pid in b.members:
            g.add_edge(("component", s.owner[pid]), v, kind="singular", puncture=pid)
    return g


def realization_components(pc: PartialCrush) -> int:
    """Number of connected pieces once the singular nodes are removed."""
    g = reduced_realization(pc)
    h = g.subgraph(v for v in g if v[0] == "component")
    return nx.number_connected_components(h)


def is_connected_realization(pc: PartialCrush) -> bool:
    return realization_components(pc) == 1


# --- canonical form ------------------------------------------------------------

def puncture_labels(pc: PartialCrush, m: Marking, cd: CrushData | None = None) -> dict[int, int]:
    """Marking-derived label of every puncture of an ordinary component."""
    cd = cd or crush_data(pc)
    s = pc.sphere
    labels: dict[int, int] = {}
    for x, part in zip(cd.x_order(), m.parts):
        if isinstance(x, frozenset):
            for pid in x:
                labels[pid] = min(part)
        else:
            labels[x] = min(part)
    g = reduced_realization(pc)
    vertex_min: dict = {}
    for v in g:
        if v[0] == "component":
            own = [labels[p] for p in s.component(v[1]).puncture_ids
                   if p in labels and p not in s.partner]
        else:
            own = [min(m.parts[cd.A + v[1]])]
        vertex_min[v] = min(own) if own else None
    for i in pc.retained:
        a, b = s.nodes[i]
        for near, far in ((a, b), (b, a)):
            h = g.copy()
            u, w = ("component", s.owner[near]), ("component", s.owner[far])
            h.remove_edge(u, w)
            side = nx.node_connected_component(h, w)
            vals = [vertex_min[x] for x in side if vertex_min[x] is not None]
            labels[near] = min(vals)
    return labels


@dataclass(frozen=True)
class CanonicalForm:
    crush: PartialCrush
    transforms: dict
    labels: dict
    signature: tuple = field(compare=False)

    def equals(self, other: "CanonicalForm", tol: float | None = None) -> bool:
        return signatures_equal(self.signature, other.signature, tol)


def canonical_form(pc: PartialCrush, m: Marking) -> CanonicalForm:
    """Per ordinary component send the three smallest-label punctures to
    0, 1, INF; the signature identifies equivalent marked crushes."""
    cd = crush_data(pc)
    s = pc.sphere
    labels = puncture_labels(pc, m, cd)
    new_components = []
    transforms = {}
    comp_sigs = []
    for c in s.components:
        if c.id not in pc.ordinary:
            new_components.append(c)
            continue
        order = sorted(c.punctures, key=lambda p: labels[p.id])
        T = mobius_from_triple(order[0].pos, order[1].pos, order[2].pos)
        transforms[c.id] = T
        new_p = tuple(Puncture(p.id, _canon_point(T(p.pos), p, order)) for p in c.punctures)
        new_components.append(Component(c.id, new_p))
        comp_sigs.append(tuple(sorted((labels[p.id], _kind(p.id, s, cd), q.pos)
                                      for p, q in zip(c.punctures, new_p))))
    comp_sigs.sort(key=lambda sig: sig[0][0])
    node_sig = tuple(tuple(labels[p] for p in s.nodes[i]) for i in pc.retained)
    bouquet_sig = tuple(sorted(
        (tuple(sorted(m.parts[cd.A + k])), b.level,
         tuple(sorted(labels[p] for p in b.members)),
         tuple(sorted(s.component(cid).n_m for cid in b.region)))
        for k, b in enumerate(cd.bouquets)))
    q_sig = tuple(tuple(sorted(part)) for part in m.parts[:cd.A])
    signature = (tuple(comp_sigs), node_sig, bouquet_sig, q_sig, s.n)
    new_pc = PartialCrush(NodedSphere(tuple(new_components), s.nodes, s.n), pc.ordinary, pc.retained)
    return CanonicalForm(new_pc, transforms, labels, signature)


def _canon_point(z, p, order):
    # The first three are pinned exactly, whatever the arithmetic.
    if p is order[0]:
        return coerce([0, z])[0]
    if p is order[1]:
        return coerce([1, z])[0]
    if p is order[2]:
        return INF
    return z


def _kind(pid: int, s: NodedSphere, cd: CrushData) -> str:
    if pid not in s.partner:
        return "q"
    return "singular" if cd.bouquet_of(pid) is not None else "node"


def signatures_equal(a, b, tol: float | None = None) -> bool:
    """Structural equality with points compared exactly or within ``tol``."""
    if isinstance(a, tuple) or isinstance(b, tuple):
        return (isinstance(a, tuple) and isinstance(b, tuple) and len(a) == len(b)
                and all(signatures_equal(x, y, tol) for x, y in zip(a, b)))
    if isinstance(a, (str, int)) or isinstance(b, (str, int)):
        return type(a) is type(b) and a == b
    if a is INF or b is INF:
        return a is b
    x, y = coerce((a, b))
    if tol is None:
        prec = field_prec((x, y))
        if prec is None:
            return is_zero(x - y)
        tol = tolerance(prec, 0.5)
    return magnitude(x - y) <= tol * (1 + magnitude(x))


def apply_mobius(pc: PartialCrush, transforms: dict) -> PartialCrush:
    """Move each listed component's punctures by its Moebius map."""
    s = pc.sphere
    comps = []
    for c in s.components:
        T = transforms.get(c.id)
        if T is None:
            comps.append(c)
        else:
            comps.append(Component(c.id, tuple(Puncture(p.id, T(p.pos)) for p in c.punctures)))
    return PartialCrush(NodedSphere(tuple(comps), s.nodes, s.n), pc.ordinary, pc.retained)


__all__ = [
    "Puncture", "Component", "NodedSphere", "PartialCrush", "Bouquet", "CrushData", "Marking",
    "CanonicalForm", "validate_sphere", "validate_crush", "crush_data", "crush_data_violations",
    "validate_marking", "validate_all", "reduced_realization", "realization_components",
    "is_connected_realization", "puncture_labels", "canonical_form", "signatures_equal",
    "apply_mobius", "Mobius",
]
