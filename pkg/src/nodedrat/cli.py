"""Command-line entry point: parametrize, degenerate, reopen, obstruction.

Exit codes: 0 success, 2 validation, 3 no limit, 4 unsupported, 5 budget."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass

from . import io
from .degeneration import FamilySample, degenerate
from .errors import BudgetExhausted, NodedRationalError, ScheduleError, SchemaError, ValidationError
from .functions import decoration_distance, structures_equal, validate_noded_function
from .lab import Prop1Params, SweepConfig, build_prop1_family, example2_sweep, prop1_target, remark_variant
from .rational import FixedPointData, from_fixed_point_data
from .reopening import reopen_family
from .scalars import context

log = logging.getLogger("nodedrat")


@dataclass(frozen=True)
class RunConfig:
    precision: int = 256
    tol: float = 1e-6
    seed: int = 0
    schedule: tuple | None = None
    out: str | None = None
    jobs: int = 1

    def validate(self) -> None:
        if self.precision < 64:
            raise ValidationError("precision must be at least 64 bits")
        if not self.tol > 0:
            raise ValidationError("tolerance must be positive")
        if self.jobs < 1:
            raise ValidationError("jobs must be at least 1")


def _schedule(text: str | None) -> tuple | None:
    if text is None:
        return None
    try:
        ks = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as e:
        raise ScheduleError(f"malformed schedule {text!r}") from e
    if not ks or any(k <= 0 for k in ks) or any(b <= a for a, b in zip(ks, ks[1:])):
        raise ScheduleError(f"schedule must be increasing positive numbers, got {text!r}")
    return tuple(int(k) if k == int(k) else k for k in ks)


def _config(args) -> RunConfig:
    cfg = RunConfig(args.precision, args.tol, args.seed, _schedule(args.schedule), args.out, args.jobs)
    cfg.validate()
    return cfg


def _read(path: str) -> dict:
    if path == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(path) as f:
                text = f.read()
        except OSError as e:
            raise SchemaError(f"cannot read {path}: {e}") from e
    return io.loads(text)


def _write(doc: dict, out: str | None) -> None:
    text = io.dumps(doc) + "\n"
    if out:
        with open(out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _write_csv(trace, path: str | None) -> None:
    if path:
        with open(path, "w") as f:
            f.write(io.residual_csv(trace))


# --- commands ------------------------------------------------------------------------

def cmd_parametrize(args, cfg: RunConfig) -> int:
    doc = _read(args.input)
    data = io.parse_fixed_points(doc, cfg.precision)
    exact_mode = bool(doc.get("exact", False))
    F = from_fixed_point_data(data, None if exact_mode else cfg.precision)
    _write(io.rational_map_doc(F), cfg.out)
    return 0


def _constant_family(cfg: RunConfig):
    ctx = context(cfg.precision)
    pts = [ctx.mpc(0), ctx.mpc(1), ctx.mpc(-1), ctx.mpc(0, 2)]
    lams = [ctx.mpc(0.5), ctx.mpc(-0.25, 0.5), ctx.mpc(0.4), None]
    lams[3] = 1 - sum(lams[:3])
    data = FixedPointData(tuple(zip(pts, lams)))
    ks = cfg.schedule or (8, 16, 32, 64, 128)
    return [FamilySample(k, data) for k in ks], None


def cmd_degenerate(args, cfg: RunConfig) -> int:
    hint = None
    extra = {}
    if args.input == "prop1":
        p = Prop1Params(schedule=cfg.schedule or Prop1Params().schedule, prec=cfg.precision)
        p.validate()
        samples = [FamilySample(s.k, s.data) for s in (build_prop1_family(p, k) for k in p.schedule)]
        hint = prop1_target(p)
    elif args.input == "constant":
        samples, hint = _constant_family(cfg)
    else:
        samples, hint = io.parse_family(_read(args.input), cfg.precision)
        if cfg.schedule is not None:
            if len(cfg.schedule) != len(samples):
                raise ScheduleError("--schedule must list one k per sample")
            samples = [FamilySample(k, s.data) for k, s in zip(cfg.schedule, samples)]
    rep = degenerate(samples, cfg.tol, cfg.precision, hint.crush if hint is not None else None)
    target = hint
    if args.compare:
        target = io.parse_noded_function(_read(args.compare), cfg.precision)
    if target is not None:
        dist = decoration_distance(rep.limit, target)
        extra["target_distance"] = io._num(dist)
        extra["matches_target"] = bool(structures_equal(rep.limit, target, tol=cfg.tol)
                                       and dist < cfg.tol)
    _write(io.degeneration_doc(rep, **extra), cfg.out)
    _write_csv(rep.residuals, args.csv)
    return 0


def cmd_reopen(args, cfg: RunConfig) -> int:
    nf = io.parse_noded_function(_read(args.input), cfg.precision)
    v = validate_noded_function(nf)
    if v:
        raise ValidationError("input is not a valid rational function with nodes", v)
    fam = reopen_family(nf, steps=args.steps, prec=cfg.precision, seed=cfg.seed)
    if fam.samples is not None:
        doc = io.family_doc(fam.samples, hint=nf)
    else:
        doc = io.component_families_doc(fam)
    _write(doc, cfg.out)
    return 0


def cmd_obstruction(args, cfg: RunConfig) -> int:
    if args.target == "remark":
        rep = remark_variant(formula=args.formula)
        _write(io.remark_doc(rep), cfg.out)
        return 0
    sweep = SweepConfig(target=args.target, starts=args.starts,
                        schedule=cfg.schedule or SweepConfig().schedule, seed=cfg.seed,
                        margin=args.margin, fixed_total=args.fixed_total, maxfev=args.maxfev,
                        budget=args.budget, jobs=cfg.jobs)
    try:
        rep = example2_sweep(sweep)
    except BudgetExhausted as e:
        if e.partial is None:
            raise
        _write(io.sweep_doc(e.partial, partial=True), cfg.out)
        _write_csv(e.partial.per_k, args.csv)
        log.error("%s: %s (partial report written)", e.code, e)
        return e.exit_code
    _write(io.sweep_doc(rep), cfg.out)
    _write_csv(rep.per_k, args.csv)
    return 0


# --- parser --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=256, help="working precision in bits (>= 64)")
    common.add_argument("--tol", type=float, default=1e-6, help="clustering / comparison tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--schedule", help="comma-separated increasing k values")
    common.add_argument("--out", help="write the JSON document here instead of stdout")
    common.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="nodedrat", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parametrize", parents=[common], help="fixed-point data -> rational map")
    p.add_argument("input", help="fixed-points JSON file, or - for stdin")
    p.set_defaults(func=cmd_parametrize)

    p = sub.add_parser("degenerate", parents=[common], help="limit of a family of generic maps")
    p.add_argument("input", help="family JSON file, - for stdin, or a builtin: prop1, constant")
    p.add_argument("--csv", help="write the residual trace (k, residual) here")
    p.add_argument("--compare", help="noded-function JSON to compare the limit with")
    p.set_defaults(func=cmd_degenerate)

    p = sub.add_parser("reopen", parents=[common], help="noded function -> family of generic maps")
    p.add_argument("input", help="noded-function JSON file, or - for stdin")
    p.add_argument("--steps", type=int, default=8)
    p.set_defaults(func=cmd_reopen)

    p = sub.add_parser("obstruction", parents=[common], help="search for approximating families")
    p.add_argument("target", nargs="?", default="example2", choices=["example2", "control", "remark"])
    p.add_argument("--starts", type=int, default=64)
    p.add_argument("--margin", type=float, default=0.1)
    p.add_argument("--maxfev", type=int, default=6000, help="evaluations per local search stage")
    p.add_argument("--budget", type=int, help="total residual evaluations")
    p.add_argument("--fixed-total", type=complex, default=None,
                   help="fix the sum of the central indices (e.g. -3)")
    p.add_argument("--formula", choices=["exact", "display"], default="exact",
                   help="coefficient transport used by the remark variant")
    p.add_argument("--csv", help="write the per-k minima (k, residual) here")
    p.set_defaults(func=cmd_obstruction)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = _config(args)
        return args.func(args, cfg)
    except NodedRationalError as e:
        sys.stdout.write(io.dumps(io.error_doc(e)) + "\n")
        log.error("%s: %s", e.code, e)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
