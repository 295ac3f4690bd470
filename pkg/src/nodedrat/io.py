"""Versioned JSON documents and CSV traces.

Every document carries "schema": "noded-rational/1" and a "kind".  Scalars
are [re, im] decimal (or p/q) strings, or "inf"."""

from __future__ import annotations

import csv
import io as _io
import json
import math

from .degeneration import DegenerationReport, FamilySample
from .errors import NodedRationalError, SchemaError
from .functions import NodedFunction
from .rational import FixedPointData, RationalMap, fixed_points, residue
from .scalars import DEFAULT_PREC, decode, encode
from .spheres import Component, Marking, NodedSphere, PartialCrush, Puncture

SCHEMA = "noded-rational/1"


def _doc(kind: str, **body) -> dict:
    return {"schema": SCHEMA, "kind": kind, **body}


def _require(obj, kind: str | tuple) -> dict:
    if not isinstance(obj, dict):
        raise SchemaError("document must be a JSON object")
    if obj.get("schema") != SCHEMA:
        raise SchemaError(f"missing or unknown schema (expected {SCHEMA!r})")
    kinds = (kind,) if isinstance(kind, str) else kind
    if obj.get("kind") not in kinds:
        raise SchemaError(f"expected kind {' or '.join(kinds)}, got {obj.get('kind')!r}")
    return obj


def _field(obj: dict, key: str, typ=None):
    if key not in obj:
        raise SchemaError(f"missing field {key!r}")
    v = obj[key]
    if typ is not None and not isinstance(v, typ):
        raise SchemaError(f"field {key!r} has the wrong type")
    return v


def _scalar(v, prec: int, exact_mode: bool):
    try:
        return decode(v, prec, exact_mode)
    except (ValueError, TypeError, ZeroDivisionError) as e:
        raise SchemaError(f"bad scalar {v!r}: {e}") from e


def _scalars(vs, prec, exact_mode) -> list:
    if not isinstance(vs, list):
        raise SchemaError("expected a list of scalars")
    return [_scalar(v, prec, exact_mode) for v in vs]


def loads(text: str) -> dict:
    if not text.strip():
        raise SchemaError("empty input")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e}") from e


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, default=_default)


def _default(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    raise TypeError(f"not serializable: {type(x).__name__}")


def _num(x):
    """Plain JSON number for floats, with inf/nan as strings."""
    x = float(x)
    return x if math.isfinite(x) else str(x)


# --- fixed points and maps ---------------------------------------------------------

def fixed_points_doc(data: FixedPointData, exact_mode: bool = False) -> dict:
    return _doc("fixed-points", exact=exact_mode, points=[encode(p) for p in data.points],
                indices=[encode(l) for l in data.indices])


def parse_fixed_points(obj, prec: int = DEFAULT_PREC) -> FixedPointData:
    _require(obj, "fixed-points")
    ex = bool(obj.get("exact", False))
    pts = _scalars(_field(obj, "points"), prec, ex)
    lams = _scalars(_field(obj, "indices"), prec, ex)
    if len(pts) != len(lams):
        raise SchemaError("points and indices differ in length")
    if not pts:
        raise SchemaError("no fixed points given")
    return FixedPointData(tuple(zip(pts, lams)))


def _map_body(F: RationalMap) -> dict:
    return {"num": [encode(c) for c in F.num.coeffs], "den": [encode(c) for c in F.den.coeffs]}


def rational_map_doc(F: RationalMap, with_indices: bool = True) -> dict:
    body = _map_body(F)
    if with_indices:
        body["fixed_points"] = [
            {"point": encode(z), "multiplicity": m, "index": encode(residue(F, z))}
            for z, m in fixed_points(F)
        ]
    body["exact"] = F.exact
    return _doc("rational-map", **body)


def _parse_map(obj, prec, exact_mode) -> RationalMap:
    num = _scalars(_field(obj, "num"), prec, exact_mode)
    den = _scalars(_field(obj, "den"), prec, exact_mode)
    if not den:
        raise SchemaError("empty denominator")
    try:
        return RationalMap.make(num, den, reduce=False)
    except ValueError as e:
        raise SchemaError(str(e)) from e


def parse_rational_map(obj, prec: int = DEFAULT_PREC) -> RationalMap:
    _require(obj, "rational-map")
    return _parse_map(obj, prec, bool(obj.get("exact", False)))


# --- noded functions ---------------------------------------------------------------

def noded_function_body(nf: NodedFunction) -> dict:
    s = nf.sphere
    return {
        "exact": nf.prec is None,
        "components": [{"id": c.id, "punctures": [{"id": p.id, "pos": encode(p.pos)} for p in c.punctures]}
                       for c in s.components],
        "nodes": [list(n) for n in s.nodes],
        "ordinary": sorted(nf.crush.ordinary),
        "retained": sorted(nf.crush.retained),
        "marking": [sorted(part) for part in nf.marking.parts],
        "maps": {str(cid): _map_body(F) for cid, F in sorted(nf.maps.items())},
    }


def noded_function_doc(nf: NodedFunction) -> dict:
    return _doc("noded-function", **noded_function_body(nf))


def parse_noded_function_body(obj, prec: int = DEFAULT_PREC) -> NodedFunction:
    ex = bool(obj.get("exact", False))
    try:
        comps = tuple(
            Component(int(c["id"]), tuple(Puncture(int(p["id"]), _scalar(p["pos"], prec, ex))
                                          for p in c["punctures"]))
            for c in _field(obj, "components", list))
        nodes = tuple((int(a), int(b)) for a, b in _field(obj, "nodes", list))
        sphere = NodedSphere(comps, nodes)
        retained = obj.get("retained")
        pc = PartialCrush(sphere, set(int(c) for c in _field(obj, "ordinary", list)),
                          None if retained is None else set(int(i) for i in retained))
        marking = Marking(tuple(frozenset(int(x) for x in part) for part in _field(obj, "marking", list)))
        maps = {int(cid): _parse_map(m, prec, ex) for cid, m in _field(obj, "maps", dict).items()}
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"malformed noded function: {e}") from e
    return NodedFunction(pc, marking, maps)


def parse_noded_function(obj, prec: int = DEFAULT_PREC) -> NodedFunction:
    _require(obj, "noded-function")
    return parse_noded_function_body(obj, prec)


# --- families ------------------------------------------------------------------------

def family_doc(samples, hint: NodedFunction | None = None, **extra) -> dict:
    body = {"samples": [{"k": _num(s.k), "points": [encode(p) for p in s.data.points],
                         "indices": [encode(l) for l in s.data.indices]} for s in samples]}
    if hint is not None:
        body["hint"] = noded_function_body(hint)
    body.update(extra)
    return _doc("family", **body)


def parse_family(obj, prec: int = DEFAULT_PREC) -> tuple[list, NodedFunction | None]:
    _require(obj, "family")
    raw = _field(obj, "samples", list)
    if not raw:
        raise SchemaError("family has no samples")
    samples = []
    for s in raw:
        if not isinstance(s, dict):
            raise SchemaError("each sample must be an object")
        try:
            k = float(_field(s, "k"))
        except (TypeError, ValueError) as e:
            raise SchemaError(f"bad k: {e}") from e
        pts = _scalars(_field(s, "points"), prec, False)
        lams = _scalars(_field(s, "indices"), prec, False)
        if len(pts) != len(lams):
            raise SchemaError("points and indices differ in length")
        samples.append(FamilySample(k, FixedPointData(tuple(zip(pts, lams)))))
    hint = obj.get("hint")
    return samples, (parse_noded_function_body(hint, prec) if hint is not None else None)


def component_families_doc(fam) -> dict:
    comps = []
    for cid, cf in sorted(fam.components.items()):
        comps.append({"component": cid, "labels": cf.labels,
                      "family": family_doc(cf.samples)})
    return _doc("component-families", components=comps)


def parse_component_families(obj, prec: int = DEFAULT_PREC) -> dict:
    _require(obj, "component-families")
    out = {}
    for c in _field(obj, "components", list):
        out[int(c["component"])] = parse_family(c["family"], prec)[0]
    return out


# --- reports -------------------------------------------------------------------------

def _limit_json(lim) -> dict:
    return {"value": encode(lim.value), "diverges": lim.diverges, "error": _num(lim.error)}


def degeneration_doc(rep: DegenerationReport, **extra) -> dict:
    body = {
        "clusters": [{"members": list(c.members), "point": encode(c.point),
                      "moments": [_limit_json(m) for m in c.coeffs]} for c in rep.clusters],
        "components": [{"id": c.cid, "kind": c.kind, "chart": c.chart, "parent": c.parent,
                        "groups": [g.labels for g in c.groups]} for c in rep.components],
        "crushed": rep.crushed,
        "ordinary": rep.ordinary,
        "limit": noded_function_body(rep.limit) if rep.limit is not None else None,
        "residuals": [[_num(k), _num(r)] for k, r in rep.residuals],
        "truncation": _num(rep.truncation),
        "matches_hint": rep.matches_hint,
        "notes": list(rep.notes),
    }
    body.update(extra)
    return _doc("degeneration-report", **body)


def parse_degeneration(obj, prec: int = DEFAULT_PREC) -> dict:
    """Validated report with the limit decoded to a NodedFunction."""
    _require(obj, "degeneration-report")
    out = dict(obj)
    for key in ("clusters", "components", "residuals", "crushed", "ordinary"):
        _field(obj, key, list)
    lim = obj.get("limit")
    out["limit"] = parse_noded_function_body(lim, prec) if lim is not None else None
    return out


def sweep_doc(rep, partial: bool = False) -> dict:
    return _doc("sweep-report", target=rep.target, per_k=[[_num(k), _num(r)] for k, r in rep.per_k],
                min_residual=_num(rep.min_residual), margin=rep.margin,
                exceeds_margin=rep.exceeds_margin, argmin=rep.argmin, starts=rep.starts,
                evaluations=rep.evaluations, budget_exhausted=rep.budget_exhausted,
                partial=partial, note=rep.note)


def remark_doc(rep) -> dict:
    return _doc("remark-report", formula=rep.formula, min_residual=_num(rep.min_residual),
                margin=rep.margin, exceeds_margin=rep.min_residual >= rep.margin, note=rep.note,
                rows=[{"eps": [encode(r[0]), encode(r[1])], "residual": _num(r[2]),
                       "lam2": encode(r[3]), "lam3": encode(r[4])} for r in rep.rows])


def parse_report(obj, kind: str) -> dict:
    """Shape check for report kinds that stay plain dictionaries."""
    _require(obj, kind)
    required = {"sweep-report": ("target", "per_k", "min_residual", "margin", "note"),
                "remark-report": ("rows", "min_residual", "margin", "note"),
                "error": ("error", "message", "violations")}[kind]
    for key in required:
        _field(obj, key)
    return dict(obj)


def error_doc(err: NodedRationalError) -> dict:
    body = err.to_json()
    return _doc("error", exit_code=err.exit_code, **body)


PARSERS = {
    "fixed-points": parse_fixed_points,
    "rational-map": parse_rational_map,
    "noded-function": parse_noded_function,
    "family": parse_family,
    "component-families": parse_component_families,
    "degeneration-report": parse_degeneration,
    "sweep-report": lambda o, prec=DEFAULT_PREC: parse_report(o, "sweep-report"),
    "remark-report": lambda o, prec=DEFAULT_PREC: parse_report(o, "remark-report"),
    "error": lambda o, prec=DEFAULT_PREC: parse_report(o, "error"),
}


def parse(obj, prec: int = DEFAULT_PREC):
    if not isinstance(obj, dict):
        raise SchemaError("document must be a JSON object")
    kind = obj.get("kind")
    if kind not in PARSERS:
        raise SchemaError(f"unknown kind {kind!r}")
    return PARSERS[kind](obj, prec)


def residual_csv(trace) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "residual"])
    for k, r in trace:
        w.writerow([repr(float(k)), repr(float(r))])
    return buf.getvalue()


__all__ = [
    "SCHEMA", "loads", "dumps", "parse", "fixed_points_doc", "parse_fixed_points",
    "rational_map_doc", "parse_rational_map", "noded_function_doc", "parse_noded_function",
    "family_doc", "parse_family", "component_families_doc", "parse_component_families",
    "degeneration_doc", "parse_degeneration", "sweep_doc", "remark_doc", "parse_report",
    "error_doc", "residual_csv",
]
