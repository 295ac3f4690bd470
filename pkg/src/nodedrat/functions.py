"""Rational functions with nodes: per-component maps on the ordinary
components of a marked partial crush, their reduced index decorations, the
embedding of a single map, and equality of dynamical structures."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConventionError, IdentityMapError, UnstableError, ValidationError, Violation
from .rational import (
    RationalMap,
    fixed_points,
    mobius_conjugate,
    principal_part,
    residue,
)
from .scalars import INF, chordal_distance, coerce, field_prec, is_exact, magnitude, tolerance
from .spheres import (
    Component,
    CrushData,
    Marking,
    NodedSphere,
    PartialCrush,
    Puncture,
    canonical_form,
    crush_data,
    puncture_labels,
    signatures_equal,
    validate_all,
)


@dataclass(frozen=True)
class NodedFunction:
    crush: PartialCrush
    marking: Marking
    maps: dict = field(hash=False)

    @property
    def sphere(self) -> NodedSphere:
        return self.crush.sphere

    @property
    def prec(self) -> int | None:
        return field_prec([c for F in self.maps.values() for c in F.num.coeffs + F.den.coeffs])

    def crush_data(self) -> CrushData:
        return crush_data(self.crush)

    def level(self, pid: int, cd: CrushData | None = None) -> int:
        """Largest allowed fixed-point multiplicity at a puncture."""
        cd = cd or self.crush_data()
        k = cd.bouquet_of(pid)
        return cd.bouquets[k].level if k is not None else 1


def _default_tol(prec: int | None) -> float:
    return tolerance(prec or 256, 0.25)


def _match_puncture(comp: Component, z, tol: float, exact: bool):
    best, dist = None, None
    for p in comp.punctures:
        if z is INF or p.pos is INF:
            if z is p.pos:
                return p, 0.0
            continue
        if exact and is_exact(z) and is_exact(p.pos):
            x, y = coerce((z, p.pos))
            if not (x - y):
                return p, 0.0
            continue
        d = chordal_distance(z, p.pos)
        if dist is None or d < dist:
            best, dist = p, d
    if dist is not None and dist <= tol:
        return best, dist
    return None, dist


def validate_noded_function(nf: NodedFunction, tol: float | None = None) -> list[Violation]:
    v = validate_all(nf.crush, nf.marking)
    if v:
        return v
    s = nf.sphere
    cd = nf.crush_data()
    tol = _default_tol(nf.prec) if tol is None else tol
    out: list[Violation] = []
    if set(nf.maps) != set(nf.crush.ordinary):
        out.append(Violation("maps-missing", "maps must be given for exactly the ordinary components",
                             {"maps": sorted(nf.maps), "ordinary": sorted(nf.crush.ordinary)}))
        return out
    for cid in sorted(nf.crush.ordinary):
        F = nf.maps[cid]
        comp = s.component(cid)
        if F.is_identity():
            out.append(Violation("identity-map", f"map on component {cid} is the identity",
                                 {"component": cid}))
            continue
        exact_mode = F.exact and all(is_exact(p.pos) or p.pos is INF for p in comp.punctures)
        for z, mult in fixed_points(F):
            p, dist = _match_puncture(comp, z, tol, exact_mode)
            if p is None:
                out.append(Violation("fixed-point-location",
                                     f"fixed point {z} of component {cid} is not at a puncture",
                                     {"component": cid, "distance": dist}))
                continue
            lev = nf.level(p.id, cd)
            if mult > lev:
                code = "nodal-multiplicity" if p.id in s.partner and lev == 1 else "multiplicity-level"
                out.append(Violation(code, f"puncture {p.id} has multiplicity {mult} > level {lev}",
                                     {"component": cid, "puncture": p.id}))
    for i in nf.crush.retained:
        a, b = s.nodes[i]
        ra = residue(nf.maps[s.owner[a]], s.component(s.owner[a]).position(a))
        rb = residue(nf.maps[s.owner[b]], s.component(s.owner[b]).position(b))
        total = coerce((ra, rb))
        err = magnitude(total[0] + total[1] - 1)
        if err > (0 if nf.prec is None else tol):
            out.append(Violation("node-index",
                                 f"indices at node {i} sum to {total[0] + total[1]}, not 1",
                                 {"node": i, "error": err}))
    return out


# --- normalization conventions and decorations ----------------------------------

@dataclass(frozen=True)
class NormalizationConvention:
    pairs: dict = field(hash=False)     # singular puncture id -> (u id, v id)


def adjacent_convention(nf: NodedFunction) -> NormalizationConvention:
    """For each singular puncture p, the next two punctures of its component
    after p in cyclic label order; the first goes to 1, the second to INF."""
    cd = nf.crush_data()
    labels = puncture_labels(nf.crush, nf.marking, cd)
    s = nf.sphere
    pairs = {}
    for b in cd.bouquets:
        for pid in b.members:
            comp = s.component(s.owner[pid])
            others = sorted((q for q in comp.puncture_ids if q != pid), key=lambda q: labels[q])
            after = [q for q in others if labels[q] > labels[pid]]
            before = [q for q in others if labels[q] < labels[pid]]
            cyc = after + before
            pairs[pid] = (cyc[0], cyc[1])
    return NormalizationConvention(pairs)


def _check_convention(nf: NodedFunction, conv: NormalizationConvention, cd: CrushData):
    s = nf.sphere
    for b in cd.bouquets:
        for pid in b.members:
            if pid not in conv.pairs:
                raise ConventionError(f"no normalization pair for singular puncture {pid}")
            u, v = conv.pairs[pid]
            if len({pid, u, v}) != 3 or not (s.owner.get(u) == s.owner.get(v) == s.owner[pid]):
                raise ConventionError(f"bad normalization pair {(u, v)} for puncture {pid}")


@dataclass(frozen=True)
class ReducedDecoration:
    nonsingular: tuple      # (puncture id, index)
    singular: tuple         # (puncture id, (c_1, ..., c_L))

    @property
    def dimension(self) -> int:
        return len(self.nonsingular) + sum(len(cs) for _, cs in self.singular)

    def flat(self) -> list:
        return [v for _, v in self.nonsingular] + [c for _, cs in self.singular for c in cs]

    def as_dict(self) -> dict:
        out = {pid: (v,) for pid, v in self.nonsingular}
        out.update({pid: tuple(cs) for pid, cs in self.singular})
        return out


def reduced_decoration(nf: NodedFunction, conv: NormalizationConvention | None = None) -> ReducedDecoration:
    cd = nf.crush_data()
    conv = conv or adjacent_convention(nf)
    _check_convention(nf, conv, cd)
    s = nf.sphere
    nonsingular = []
    for pid in cd.nonsingular:
        cid = s.owner[pid]
        nonsingular.append((pid, residue(nf.maps[cid], s.component(cid).position(pid))))
    singular = []
    for b in cd.bouquets:
        for pid in b.members:
            cid = s.owner[pid]
            comp = s.component(cid)
            u, v = conv.pairs[pid]
            pp = principal_part(nf.maps[cid], comp.position(pid), comp.position(u),
                                comp.position(v), b.level)
            singular.append((pid, pp.coeffs))
    return ReducedDecoration(tuple(nonsingular), tuple(singular))


def decoration_by_label(nf: NodedFunction, conv: NormalizationConvention | None = None) -> dict:
    """Reduced decoration keyed by labels, so that decorations of structures
    built with different puncture ids can be compared.  A singular puncture
    is keyed by (its bouquet label, smallest other label on its component)."""
    cd = nf.crush_data()
    labels = puncture_labels(nf.crush, nf.marking, cd)
    s = nf.sphere
    out = {}
    for pid, vals in reduced_decoration(nf, conv).as_dict().items():
        if cd.bouquet_of(pid) is None:
            out[labels[pid]] = vals
        else:
            comp = s.component(s.owner[pid])
            rest = min(labels[q] for q in comp.puncture_ids if q != pid)
            out[(labels[pid], rest)] = vals
    return out


def decoration_distance(a: NodedFunction, b: NodedFunction) -> float:
    """Largest entrywise difference of the label-keyed decorations (INF when
    the decorations have different shapes)."""
    da, db = decoration_by_label(a), decoration_by_label(b)
    if set(da) != set(db) or any(len(da[k]) != len(db[k]) for k in da):
        return float("inf")
    out = 0.0
    for k in da:
        for x, y in zip(da[k], db[k]):
            x, y = coerce((x, y))
            out = max(out, magnitude(x - y))
    return out


def component_index_sums(nf: NodedFunction) -> dict:
    """Sum of residues of 1/(z - F(z)) over each component's punctures."""
    s = nf.sphere
    out = {}
    for cid, F in nf.maps.items():
        vals = [residue(F, p.pos) for p in s.component(cid).punctures]
        vals = coerce(vals)
        out[cid] = sum(vals[1:], vals[0])
    return out


# --- embedding of a single map ----------------------------------------------------

def embed_vm(F: RationalMap, order=None, tol: float | None = None) -> NodedFunction:
    """A single map as a noded function: one ordinary component whose
    multiple fixed points become singular punctures, each attached to a
    crushed component carrying as many non-nodal punctures as the multiplicity."""
    if F.is_identity():
        raise IdentityMapError("the identity map cannot be embedded")
    fps = fixed_points(F)
    if order is not None:
        tol = _default_tol(F.prec) if tol is None else tol
        ordered = []
        for z in order:
            j = min(range(len(fps)), key=lambda i: chordal_distance(fps[i][0], z))
            if chordal_distance(fps[j][0], z) > tol or fps[j] in ordered:
                raise ValidationError(f"{z!r} does not match a distinct fixed point")
            ordered.append(fps[j])
        if len(ordered) != len(fps):
            raise ValidationError("order must list every distinct fixed point exactly once")
        fps = ordered
    if len(fps) < 3:
        raise UnstableError(f"only {len(fps)} distinct fixed points; the main component "
                            "would have fewer than 3 punctures")
    main = []
    comps = []
    nodes = []
    next_label = 1
    labels_of: dict[int, frozenset] = {}
    aux = 1000
    for i, (z, m) in enumerate(fps, start=1):
        main.append(Puncture(i, z))
        labels_of[i] = frozenset(range(next_label, next_label + m))
        next_label += m
        if m > 1:
            pts = [Puncture(aux, INF)] + [Puncture(aux + k, k - 1) for k in range(1, m + 1)]
            comps.append(Component(100 + i, tuple(pts)))
            nodes.append((i, aux))
            aux += 100
    sphere = NodedSphere((Component(0, tuple(main)),) + tuple(comps), tuple(nodes))
    pc = PartialCrush(sphere, {0})
    cd = crush_data(pc)
    parts = [labels_of[next(iter(x)) if isinstance(x, frozenset) else x] for x in cd.x_order()]
    return NodedFunction(pc, Marking(tuple(parts)), {0: F})


# --- equality of dynamical structures -----------------------------------------------

def _canonical_maps(nf: NodedFunction):
    cf = canonical_form(nf.crush, nf.marking)
    by_label = {}
    for cid, F in nf.maps.items():
        key = min(cf.labels[p] for p in nf.sphere.component(cid).puncture_ids)
        by_label[key] = mobius_conjugate(F, cf.transforms[cid]).normalized()
    return cf, by_label


def maps_close(F: RationalMap, G: RationalMap, tol: float | None) -> bool:
    if F.num.degree != G.num.degree or F.den.degree != G.den.degree:
        return False
    pairs = list(zip(F.num.coeffs, G.num.coeffs)) + list(zip(F.den.coeffs, G.den.coeffs))
    for a, b in pairs:
        x, y = coerce((a, b))
        if tol is None and field_prec((x, y)) is None:
            if x - y:
                return False
        elif magnitude(x - y) > (tol if tol is not None else 0) * max(1.0, magnitude(x)):
            return False
    return True


def structures_equal(a: NodedFunction, b: NodedFunction, tol: float | None = None) -> bool:
    """Marking-preserving Moebius conjugacy, decided on canonical forms."""
    if tol is None and (a.prec is not None or b.prec is not None):
        tol = tolerance(max(p for p in (a.prec, b.prec) if p is not None), 0.5)
    cfa, ma = _canonical_maps(a)
    cfb, mb = _canonical_maps(b)
    if not signatures_equal(cfa.signature, cfb.signature, tol):
        return False
    if set(ma) != set(mb):
        return False
    return all(maps_close(ma[k], mb[k], tol) for k in ma)


__all__ = [
    "NodedFunction", "NormalizationConvention", "ReducedDecoration", "validate_noded_function",
    "adjacent_convention", "reduced_decoration", "decoration_by_label", "decoration_distance", "component_index_sums", "embed_vm",
    "structures_equal", "maps_close",
]
