"""Command-line driver.

Exit codes are shared by all subcommands: 0 success, 1 an inequality or
identity check failed, 2 usage or specification error, 3 invalid
geometry, 4 solver failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import io
from .anisotropy import Anisotropy, check_duality, wulff_area, wulff_boundary
from .curve import CurveError, geometry, is_convex, is_simple
from .flow import FlowConfig, normalized_monitor, run_flow
from .gen import GenerationError, GenSpec, generate
from .verify import batch_verify, equality_gap, verify_curve

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_GEOMETRY, EXIT_SOLVER = 0, 1, 2, 3, 4

FAMILY_ALIASES = {"convex": "random_convex", "jordan": "random_jordan"}

log = logging.getLogger("finslerflow")


class UsageError(Exception):
    pass


# -- shared argument handling -----------------------------------------------

def _common(p, curve=True):
    p.add_argument("--aniso", metavar="PATH", help="anisotropy JSON file (or inline JSON)")
    if curve:
        p.add_argument("--curve", metavar="PATH", help="input curve JSON file")
        p.add_argument("--gen", metavar="SPEC",
                       help="generated input, e.g. 'bean' or 'random_convex:max_mode=8'")
    p.add_argument("--seed", type=int, default=0, help="seed for generated curves")
    p.add_argument("--out", metavar="DIR", default="finslerflow_out", help="output directory")
    p.add_argument("--grid", type=int, metavar="N", help="anisotropy quadrature grid size")
    p.add_argument("--vertices", type=int, metavar="M", help="vertex count")


def _anisotropy(args, required=True):
    if args.aniso is None:
        if required:
            raise UsageError("--aniso is required")
        return None
    a = io.read_anisotropy(args.aniso)
    if args.grid is not None and a.kind != "sampled":
        if args.grid < 8:
            raise UsageError("--grid must be at least 8")
        d = a.to_dict()
        d["grid_size"] = args.grid
        a = Anisotropy.from_dict(d)
    return a


def _genspec(text, args):
    g = io.read_genspec(FAMILY_ALIASES.get(text, text))
    return GenSpec(g.family, {k: v for k, v in g.params.items()},
                   args.vertices or g.M, args.seed if args.seed else g.seed)


def _curve(args, a):
    if (args.curve is None) == (args.gen is None):
        raise UsageError("give exactly one of --curve and --gen")
    if args.curve is not None:
        return io.read_curve(args.curve)
    g = _genspec(args.gen, args)
    if g.family in ("wulff", "perturbed_wulff") and a is None:
        raise UsageError(f"--aniso is required for the {g.family} family")
    return generate(g, a)


def _outdir(args):
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"--out: cannot create {out}: {exc.strerror}") from None
    return out


# -- subcommands ---------------------------------------------------------------

def cmd_wulff(args):
    a = _anisotropy(args)
    w = wulff_boundary(a, args.vertices or 512)
    out = _outdir(args)
    io.write_curve(w, out / "wulff.json")
    print(f"kappa = {wulff_area(a):.12g}")
    print(f"a = {a.lower_bound:.12g}  b = {a.upper_bound:.12g}")
    return EXIT_OK


def cmd_curvature(args):
    a = _anisotropy(args)
    c = _curve(args, a)
    g = geometry(c, a)
    out = _outdir(args)
    io.write_geometry_table(c, a, out / "geometry.csv")
    print(f"kF_max = {g.kF_max:.12g}")
    print(f"A = {g.A:.12g}")
    print(f"P_F = {g.P_F:.12g}")
    print(f"is_convex = {str(is_convex(c)).lower()}")
    return EXIT_OK


def cmd_flow(args):
    a = _anisotropy(args)
    c = _curve(args, a)
    cfg = FlowConfig(cfl=args.cfl, dt_max=args.dt_max, t_end=args.t_end,
                     area_stop_fraction=args.area_stop, snapshot_stride=args.stride,
                     M=args.vertices, scheme=args.scheme)
    trace = run_flow(c, a, cfg)
    out = _outdir(args)
    io.write_trace(trace, out / "trace.csv")
    if not args.no_snapshots:
        io.write_snapshots(trace, out / "snapshots", svg=not args.no_svg)
    mon = normalized_monitor(trace)
    io.write_json({"stop_reason": trace.stop_reason,
                   "first_convex_time": trace.first_convex_time,
                   "normalized_monitor": mon.as_dict(),
                   "samples": len(trace.samples)}, out / "flow.json")
    print(f"stop_reason = {trace.stop_reason}")
    print(f"first_convex_time = {trace.first_convex_time}")
    print(f"normalized margin = {mon.margin:.6g} (relative {mon.relative_margin:.6g})")
    if trace.stop_reason in ("step_failure", "self_intersection"):
        return EXIT_SOLVER
    return EXIT_OK


def cmd_verify(args):
    a = _anisotropy(args)
    out = _outdir(args)
    if args.batch is not None:
        if args.curve is not None or args.gen is not None:
            raise UsageError("--batch excludes --curve and --gen")
        g = _genspec(args.batch, args)
        summary = batch_verify(g, a, args.n, seed=args.seed, workers=args.workers)
        io.write_batch_table(summary, out / "batch.csv")
        io.write_json(summary.as_dict(), out / "summary.json")
        text = summary.text()
        (out / "summary.txt").write_text(text + "\n")
        print(text)
        return EXIT_OK if summary.passed else EXIT_FAIL
    c = _curve(args, a)
    reports = verify_curve(c, a)
    gap = equality_gap(c, a)
    main = reports[0]
    equality = main.relative_margin <= 1e-3 and gap <= 5e-2
    io.write_json({"reports": [r.as_dict() for r in reports], "equality_gap": gap,
                   "equality": equality}, out / "report.json")
    for r in reports:
        print(r)
    print(f"equality_gap = {gap:.6g}" + ("  (equality case: Wulff shape)" if equality else ""))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_gen(args):
    if args.gen is None:
        raise UsageError("--gen is required")
    a = _anisotropy(args, required=False)
    c = _curve(args, a)
    out = _outdir(args)
    io.write_curve(c, out / "curve.json")
    print(f"M = {len(c)}  A = {c.area:.12g}  convex = {str(is_convex(c)).lower()}"
          f"  simple = {str(is_simple(c)).lower()}")
    return EXIT_OK


def cmd_identities(args):
    a = _anisotropy(args)
    reports = check_duality(a, n_samples=args.n, seed=args.seed)
    out = _outdir(args)
    io.write_json([r.as_dict() for r in reports], out / "identities.json")
    for r in reports:
        print(r)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


# -- parser ----------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="finslerflow", description="Anisotropic curvature tools for closed plane curves.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("wulff", help="write the unit Wulff shape, print kappa and bounds")
    _common(p, curve=False)
    p.set_defaults(func=cmd_wulff)

    p = sub.add_parser("curvature", help="per-vertex geometry table of a curve")
    _common(p)
    p.set_defaults(func=cmd_curvature)

    p = sub.add_parser("flow", help="run anisotropic curvature flow")
    _common(p)
    p.add_argument("--cfl", type=float, default=0.2)
    p.add_argument("--dt-max", type=float, default=1e-2)
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--area-stop", type=float, default=0.02)
    p.add_argument("--stride", type=int, default=10, help="steps between samples")
    p.add_argument("--scheme", choices=("auto", "polyline", "support"), default="auto")
    p.add_argument("--no-svg", action="store_true", help="skip SVG snapshots")
    p.add_argument("--no-snapshots", action="store_true", help="skip snapshot files")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("verify", help="check the curvature inequalities")
    _common(p)
    p.add_argument("--batch", metavar="SPEC", help="generator family for a seeded batch")
    p.add_argument("--n", type=int, default=100, help="batch size")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="write a generated curve")
    _common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("identities", help="check the norm duality identities")
    _common(p, curve=False)
    p.add_argument("--n", type=int, default=1000, help="number of random samples")
    p.set_defaults(func=cmd_identities)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"finslerflow {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CurveError as exc:
        print(f"finslerflow {args.command}: invalid geometry: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except GenerationError as exc:
        print(f"finslerflow {args.command}: generator failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"finslerflow {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
