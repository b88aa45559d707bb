"""Command-line interface: ``isoflex <command> ...``.

Exit codes: 0 analysis success, 1 input error, 2 generation or
deformation error.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings

import numpy as np

from . import io
from .core import DEFAULT_TOL
from .errors import IsoflexError, PropagationFailed
from .flexion import (
    ConeCylinderData,
    DeformationFamily,
    WideLShapedNet,
    classify,
    egg_crate_net,
    extend_L_shaped,
    gen_cone_cylinder,
    gen_example_2x2,
    gen_generalized_T,
    deform_cone_cylinder,
    deform_generalized_T,
    paraboloid_net,
)
from .koenigs import christoffel_dual_net, is_koenigs, motion_space, reciprocal_parallel
from .quadnet import QuadNet, curvature_grid, metric_dual_net, validate

EXIT_OK, EXIT_INPUT, EXIT_GENERATE = 0, 1, 2


class InputError(Exception):
    pass


class GenerationError(Exception):
    pass


# -- option plumbing ------------------------------------------------------------


def _tolerances(args) -> dict:
    """default < ISOFLEX_TOL < config file < --tol; per-check keys override ``tol``."""
    try:
        tol = io.env_tol(DEFAULT_TOL)
        cfg = io.read_config(args.config) if args.config else {}
    except (IsoflexError, OSError) as exc:
        raise InputError(str(exc))
    tol = float(cfg.get("tol", tol))
    if args.tol is not None:
        tol = args.tol
    tols = {"tol": tol}
    for key in ("validate_tol", "flex_tol", "classify_tol", "extend_tol", "quad_tol"):
        tols[key] = float(cfg[key]) if key in cfg else tol
    if "quad_tol" not in cfg:
        tols["quad_tol"] = 1e-10
    return tols


def _load(path, tol):
    try:
        return io.read_net(path, check=True, tol=tol)[0]
    except IsoflexError as exc:
        raise InputError(str(exc))


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read {path}: {exc}")


def _emit(args, payload: dict, text: str):
    if args.json:
        print(json.dumps(io._jsonable(payload), indent=1))
    else:
        print(text)


def _grid_text(grid) -> str:
    return "\n".join("  " + " ".join(f"{x: .6g}" for x in row) for row in grid)


# -- commands -------------------------------------------------------------------


def cmd_generate(args, tols):
    params = _load_json(args.params) if args.params else {}
    kind = args.kind
    t = args.t if args.t is not None else params.get("t")
    try:
        if kind == "example2x2":
            net = gen_example_2x2(float(t or 0.0))
        elif kind in ("cone-cylinder", "generalized-t"):
            try:
                data = ConeCylinderData.from_dict(params)
            except KeyError as exc:
                raise InputError(f"params file lacks {exc}")
            if kind == "cone-cylinder":
                net = deform_cone_cylinder(data, float(t)) if t else gen_cone_cylinder(data)
            else:
                net = deform_generalized_T(data, float(t)) if t else gen_generalized_T(data)
        else:
            m = int(args.m or params.get("m", 3))
            n = int(args.n or params.get("n", 3))
            net = paraboloid_net(m, n) if kind == "paraboloid" else egg_crate_net(m, n)
    except InputError:
        raise
    except IsoflexError as exc:
        raise GenerationError(f"{type(exc).__name__}: {exc}")
    meta = {"generator": kind, "parameters": params, "t": t, "tol": tols["tol"]}
    io.write_net(args.out, net, meta)
    _emit(args, {"written": args.out, "m": net.m, "n": net.n, "metadata": meta},
          f"wrote {net.m}x{net.n} {kind} net to {args.out}")


def analyse(net: QuadNet, tols: dict) -> dict:
    rep = validate(net, tols["validate_tol"])
    out = {"m": net.m, "n": net.n, "validation": rep.as_dict()}
    if not rep.dual_convex_ok:
        out["dual_convex"] = False
        return out
    out["dual_convex"] = True
    out["curvature"] = curvature_grid(net, tols["tol"]).tolist()
    flex = {}
    try:
        flex["koenigs_dual"] = bool(is_koenigs(metric_dual_net(net, tols["tol"]), tols["flex_tol"]))
        ms = motion_space(net, tols["flex_tol"])
        flex.update(dimension=ms.dimension, trivial_dimension=ms.trivial_dimension,
                    gap=ms.gap, flexible=ms.is_flexible)
    except IsoflexError as exc:
        flex["error"] = f"{type(exc).__name__}: {exc}"
    out["infinitesimal"] = flex
    try:
        out["classification"] = classify(net, tols["classify_tol"]).as_dict()
    except IsoflexError as exc:
        out["classification"] = {"error": f"{type(exc).__name__}: {exc}"}
    return out


def cmd_check(args, tols):
    net = _load(args.net, tols["validate_tol"])
    res = analyse(net, tols)
    lines = [f"{net.m}x{net.n} net: valid={res['validation']['ok']} dual-convex={res['dual_convex']}"]
    if res["dual_convex"]:
        lines.append("curvature (interior vertices):")
        lines.append(_grid_text(res["curvature"]))
        inf = res["infinitesimal"]
        if "error" in inf:
            lines.append(f"infinitesimal flexibility: {inf['error']}")
        else:
            lines.append(
                f"infinitesimally flexible: {inf['flexible']} (motion space {inf['dimension']}, "
                f"trivial {inf['trivial_dimension']}; Koenigs dual {inf['koenigs_dual']})"
            )
        cl = res["classification"]
        if "error" in cl:
            lines.append(f"classification: {cl['error']}")
        else:
            lines.append(f"class (i): {cl['class_i']}  class (ii): {cl['class_ii']}")
    _emit(args, res, "\n".join(lines))


def cmd_dual(args, tols):
    net = _load(args.net, tols["validate_tol"])
    try:
        dual = metric_dual_net(net, tols["tol"])
    except IsoflexError as exc:
        raise InputError(f"{type(exc).__name__}: {exc}")
    io.write_net(args.out, dual, {"operation": "metric-dual", "source": args.net, "tol": tols["tol"]})
    _emit(args, {"written": args.out, "m": dual.m, "n": dual.n}, f"wrote {dual.m}x{dual.n} dual net to {args.out}")


def cmd_christoffel(args, tols):
    net = _load(args.net, tols["validate_tol"])
    try:
        res = christoffel_dual_net(net, tols["flex_tol"])
    except IsoflexError as exc:
        raise InputError(f"{type(exc).__name__}: {exc}")
    koenigs = res.residual <= tols["flex_tol"]
    meta = {"operation": "christoffel", "residual": res.residual, "koenigs": koenigs, "tol": tols["flex_tol"]}
    io.write_net(args.out, res.dual, meta)
    flag = "" if koenigs else "  [residual above tolerance: not a Koenigs net]"
    _emit(args, {"written": args.out, **meta}, f"wrote Christoffel dual to {args.out}; residual {res.residual:.3e}{flag}")


def cmd_reciprocal(args, tols):
    net = _load(args.net, tols["validate_tol"])
    try:
        res = reciprocal_parallel(net, tols["flex_tol"])
    except IsoflexError as exc:
        raise InputError(f"{type(exc).__name__}: {exc}")
    meta = {"operation": "reciprocal-parallel", "residual": res.residual, "tol": tols["flex_tol"]}
    C = res.C
    if C.shape[0] >= 2 and C.shape[1] >= 2:
        io.write_net(args.out, QuadNet(C), meta)
    else:
        with open(args.out, "w") as fh:
            json.dump({"grid": C.tolist(), "metadata": meta}, fh, indent=1)
    _emit(args, {"written": args.out, **meta}, f"wrote reciprocal-parallel net to {args.out}; defect {res.residual:.3e}")


def cmd_deform(args, tols):
    doc = _load_json(args.family)
    try:
        fam = DeformationFamily.from_dict(doc)
    except (IsoflexError, KeyError, TypeError) as exc:
        raise GenerationError(f"invalid family: {exc}")
    t0 = fam.t_range[0] if args.t0 is None else args.t0
    t1 = fam.t_range[1] if args.t1 is None else args.t1
    if args.frames < 1 or t1 < t0 or (args.frames > 1 and t1 == t0):
        raise InputError("need frames >= 1 and t0 < t1")
    ts = np.linspace(t0, t1, args.frames) if args.frames > 1 else np.array([t0])
    frames, trunc = fam.frames(ts, tols["tol"], parallel=args.parallel)
    if not frames:
        raise GenerationError(f"no valid frame: {trunc['reason']}")
    if trunc is not None:
        msg = f"family truncated at t={trunc['t']}: {trunc['reason']}; wrote {len(frames)} of {len(ts)} frames"
        warnings.warn(msg, stacklevel=1)
        print(f"warning: {msg}", file=sys.stderr)
    manifest = io.write_frames(args.out, frames, tols["tol"], {"family": fam.to_dict(), "truncated": trunc})
    _emit(args, manifest, f"wrote {manifest['count']} frames to {args.out}")


def cmd_extend(args, tols):
    net = _load(args.net, tols["validate_tol"])
    try:
        L = WideLShapedNet.from_net(net, tols["extend_tol"])
        hints = net.array[:, :, :2] if args.keep_boundary else None
        res = extend_L_shaped(L, args.which, tols["extend_tol"], boundary_top_views=hints)
    except PropagationFailed as exc:
        raise GenerationError(f"PropagationFailed: {exc}")
    except IsoflexError as exc:
        raise InputError(f"{type(exc).__name__}: {exc}")
    err = float(np.max(np.abs(res.net.array - net.array)) / net.diameter())
    meta = {"operation": "extend", "class": res.which, "mode": res.mode,
            "newton_iterations": res.newton_iterations, "hypothesis_residual": res.hypothesis_residual,
            "max_step_residual": float(max(res.step_residuals, default=0.0)), "deviation_from_input": err}
    io.write_net(args.out, res.net, meta)
    _emit(args, {"written": args.out, **meta}, f"wrote extended net to {args.out}; deviation from input {err:.3e}")


def cmd_smooth_sample(args, tols):
    from .smooth import Curve, ScalarCurve, SurfacePatch, sample_to_quadnet, scale_translational_surface, t_surface

    try:
        a = Curve.from_samples(*io.read_curve_csv(args.a))
        b = Curve.from_samples(*io.read_curve_csv(args.b))
        sigma = ScalarCurve.from_samples(*io.read_curve_csv(args.sigma))
        patch = SurfacePatch(a, b, sigma, args.domain)
    except (IsoflexError, OSError, ValueError) as exc:
        raise InputError(f"{type(exc).__name__}: {exc}")
    try:
        surf = (t_surface if args.surface == "t" else scale_translational_surface)(patch, args.t, tols["quad_tol"])
        sample = sample_to_quadnet(surf, tuple(args.grid))
    except IsoflexError as exc:
        raise GenerationError(f"{type(exc).__name__}: {exc}")
    meta = {"operation": "smooth-sample", "surface": args.surface, "t": args.t, "grid": args.grid,
            "domain": list(patch.domain), "planarization_displacement": sample.displacement,
            "regularity": patch.regularity,
            "splines": {"a": a.meta, "b": b.meta, "sigma": sigma.meta}}
    io.write_net(args.out, sample.net, meta)
    _emit(args, {"written": args.out, **meta},
          f"wrote {args.grid[0]}x{args.grid[1]} sample to {args.out}; displacement {sample.displacement:.3e}")


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="tolerance for all checks")
    common.add_argument("--config", help="key=value file with tolerance overrides")
    common.add_argument("--json", action="store_true", help="print the report as JSON")

    p = argparse.ArgumentParser(prog="isoflex", description="Flexible quad nets in isotropic 3-space.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="write a generated net")
    g.add_argument("kind", choices=["example2x2", "cone-cylinder", "generalized-t", "paraboloid", "egg-crate"])
    g.add_argument("--params", help="JSON file with a, b, sigma (and optionally t, m, n)")
    g.add_argument("--t", type=float, default=None, help="deformation parameter")
    g.add_argument("--m", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("-o", "--out", required=True)
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("check", parents=[common], help="analyse a net")
    c.add_argument("net")
    c.set_defaults(func=cmd_check)

    for name, func, helptext in (
        ("dual", cmd_dual, "metric dual net"),
        ("reciprocal", cmd_reciprocal, "reciprocal-parallel net"),
        ("christoffel", cmd_christoffel, "Christoffel dual net"),
    ):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("net")
        s.add_argument("-o", "--out", required=True)
        s.set_defaults(func=func)

    d = sub.add_parser("deform", parents=[common], help="export deformation frames")
    d.add_argument("family", help="JSON family file (kind, t_range, a, b, sigma)")
    d.add_argument("--t0", type=float)
    d.add_argument("--t1", type=float)
    d.add_argument("--frames", type=int, default=5)
    d.add_argument("--parallel", action="store_true")
    d.add_argument("-o", "--out", required=True, help="output directory")
    d.set_defaults(func=cmd_deform)

    e = sub.add_parser("extend", parents=[common], help="rebuild a net from its wide L-shaped part")
    e.add_argument("net")
    e.add_argument("--class", dest="which", choices=["ClassI", "ClassII"], default="ClassI")
    e.add_argument("--keep-boundary", action="store_true", help="reuse the input's far-boundary top views")
    e.add_argument("-o", "--out", required=True)
    e.set_defaults(func=cmd_extend)

    s = sub.add_parser("smooth-sample", parents=[common], help="sample a smooth surface to a net")
    s.add_argument("--a", required=True, help="CSV param,x,y,z")
    s.add_argument("--b", required=True, help="CSV param,x,y,z")
    s.add_argument("--sigma", required=True, help="CSV param,s")
    s.add_argument("--surface", choices=["st", "t"], default="st", help="scale-translational or T-surface")
    s.add_argument("--t", type=float, default=0.0)
    s.add_argument("--grid", type=int, nargs=2, default=[8, 8], metavar=("MU", "NV"))
    s.add_argument("--domain", type=float, nargs=4, default=None, metavar=("ALPHA", "BETA", "GAMMA", "DELTA"))
    s.add_argument("-o", "--out", required=True)
    s.set_defaults(func=cmd_smooth_sample)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; here that code means a generation failure
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        tols = _tolerances(args)
        args.func(args, tols)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except GenerationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GENERATE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
