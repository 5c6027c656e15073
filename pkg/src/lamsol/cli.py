"""Command-line front end.

Every subcommand writes its machine-readable result (JSON or CSV) to stdout
and diagnostics to stderr. Exit status is 0 on success, 2 on invalid
arguments and 1 when a numerical step fails; in the last case the failing
subsystem is named on stderr.

Ranges are written ``A:B``. A range starting with a minus sign must be
attached with ``=``, as in ``--s-range=-10:10``, so that it is not mistaken
for an option.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Optional, Sequence

import numpy as np

from . import cylindrical, phaseplane, rotational, surfacecheck, transtype
from .geomtypes import CurveKind, InvalidDensityVector, ProfileCurve, SolitonError, make_params
from .integrate import IntegrationConfig

_PI_TOKEN = re.compile(r"^([+-]?)(\d*\.?\d*(?:e[+-]?\d+)?)\*?pi(?:/(\d*\.?\d+))?$")


class UsageError(ValueError):
    """Invalid argument value detected after parsing."""


# ---------------------------------------------------------------------------
# argument parsing helpers

def parse_real(text: str) -> float:
    """Float, or a multiple of pi such as ``pi``, ``-pi/2``, ``2pi``, ``0.5*pi``."""
    t = text.strip().lower().replace(" ", "")
    m = _PI_TOKEN.match(t)
    if m:
        sign, coef, den = m.groups()
        val = (float(coef) if coef else 1.0) * math.pi / (float(den) if den else 1.0)
        return -val if sign == "-" else val
    try:
        val = float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(val):
        raise argparse.ArgumentTypeError(f"not a finite number: {text!r}")
    return val


def parse_range(text: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected A:B, got {text!r}")
    a, b = (parse_real(p) for p in parts)
    if not b > a:
        raise argparse.ArgumentTypeError(f"range {text!r} must have A < B")
    return a, b


def parse_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected A:B:N, got {text!r}")
    a, b = parse_real(parts[0]), parse_real(parts[1])
    try:
        n = int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid size must be an integer, got {parts[2]!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("grid size must be at least 1")
    return np.linspace(a, b, n) if n > 1 else np.array([a])


def parse_vector(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected V1,V2,V3, got {text!r}")
    return tuple(parse_real(p) for p in parts)


def positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 3:
        raise argparse.ArgumentTypeError("need at least 3 grid points")
    return n


# ---------------------------------------------------------------------------
# shared builders

def _config(args) -> IntegrationConfig:
    return IntegrationConfig().with_tol(args.tol)


def _cyl_params(args):
    v3 = args.v3
    if not 0.0 <= v3 <= 1.0:
        raise UsageError("--v3 must lie in [0, 1]")
    return make_params(args.lam, (math.sqrt(max(0.0, 1.0 - v3 * v3)), 0.0, v3))


def _cyl_curve(args) -> ProfileCurve:
    s_range = args.s_range or (-10.0, 10.0)
    return cylindrical.integrate_cyl(_cyl_params(args), args.theta0, s_range, _config(args))


def _rot_start(args):
    if args.from_axis:
        if args.x0 is not None:
            raise UsageError("--from-axis and --x0 are mutually exclusive")
        return rotational.AxisStart()
    if args.x0 is None:
        raise UsageError("give either --x0 or --from-axis")
    if not args.x0 > 0:
        raise UsageError("--x0 must be positive")
    return rotational.OffAxis(args.x0, args.theta0)


def _rot_curve(args) -> ProfileCurve:
    p = make_params(args.lam)
    start = _rot_start(args)
    if isinstance(start, rotational.AxisStart):
        s_range = args.s_range or (0.0, 20.0)
        if s_range[0] != 0.0:
            raise UsageError("axis-start profiles need an s-range starting at 0")
        return rotational.integrate_rot_from_axis(p, s_range, _config(args))
    return rotational.integrate_rot(p, start.x0, start.theta0, args.s_range or (-10.0, 10.0),
                                    _config(args))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _emit(obj, out=None) -> None:
    text = json.dumps(_jsonable(obj), indent=2, allow_nan=False)
    (out or sys.stdout).write(text + "\n")


def _curve_summary(curve: ProfileCurve, path) -> dict:
    return {"kind": curve.kind.value, "samples": int(curve.s.size),
            "s_range": [float(curve.s[0]), float(curve.s[-1])],
            "status": curve.meta.get("status", "completed"),
            "events": [{"s": e.s, "tag": str(e.tag)} for e in curve.events],
            "out": str(path)}


def _write_curve(curve: ProfileCurve, path) -> None:
    if path:
        surfacecheck.export_csv(curve, path)
        _emit(_curve_summary(curve, path))
    else:
        sys.stdout.write(surfacecheck.csv_text(curve))


# ---------------------------------------------------------------------------
# subcommands

def cmd_cyl(args) -> None:
    _write_curve(_cyl_curve(args), args.out)


def cmd_rot(args) -> None:
    _write_curve(_rot_curve(args), args.out)


def cmd_classify(args) -> None:
    if args.mode == "cyl":
        rep = cylindrical.classify_cyl(_cyl_params(args), args.theta0,
                                       args.s_range or (-10.0, 10.0), _config(args))
    else:
        s_max = None
        if args.s_range is not None:
            s_max = args.s_range[1] if args.from_axis else max(abs(v) for v in args.s_range)
        rep = rotational.classify_rot(make_params(args.lam), _rot_start(args), _config(args),
                                      s_max=s_max)
    _emit(rep.to_json_dict())


def cmd_phase(args) -> None:
    sings = [s.to_json_dict() for s in phaseplane.find_singularities(args.lam)]
    doc = {"lambda": args.lam, "singularities": sings}
    if args.singularities:
        surfacecheck._write_text(args.singularities, json.dumps(_jsonable(doc), indent=2) + "\n")
    if args.portrait:
        orbits = phaseplane.phase_portrait(args.lam)
        rows = ["orbit,s,theta,x"]
        for k, o in enumerate(orbits):
            for s, (th, x) in zip(o.s, o.points):
                rows.append(f"{k},{s:.17g},{th:.17g},{x:.17g}")
        surfacecheck._write_text(args.portrait, "\n".join(rows) + "\n")
        doc["portrait"] = {"orbits": len(orbits), "out": args.portrait}
    _emit(doc)


def cmd_trans(args) -> None:
    curve = transtype.integrate_gg(args.a, args.v, args.lam, args.y_range or (-1.0, 1.0),
                                   args.g0, args.gp0, _config(args))
    _write_curve(curve, args.out)


def cmd_verify(args) -> None:
    header, data = surfacecheck.read_csv(args.infile)
    kind = surfacecheck.kind_from_header(header)
    expected = {"cyl": CurveKind.Cylindrical, "rot": CurveKind.Rotational,
                "trans": CurveKind.TranslationG}[args.kind]
    if kind is not expected:
        raise UsageError(f"{args.infile} holds a {kind.value} curve, not {args.kind}")
    p = make_params(args.lam, args.v)
    res = surfacecheck.sample_residual(kind, data, p, a=args.a)
    _emit({"kind": kind.value, "in": args.infile, "lambda": p.lam, "v": list(p.v), **res})


def cmd_mesh(args) -> None:
    curve = _cyl_curve(args) if args.mode == "cyl" else _rot_curve(args)
    grid = surfacecheck.build_surface(curve, args.t_range, args.nt, ns=args.ns)
    surfacecheck.export_obj(grid, args.out)
    _emit({"kind": curve.kind.value, "shape": list(grid.shape), "out": args.out,
           "residual": surfacecheck.soliton_residual(grid)})


def cmd_foliation(args) -> None:
    s0, ap, bp, r = args.s0, args.a_prime, args.b_prime, args.r
    if not r > 0:
        raise UsageError("--r must be positive")
    res = surfacecheck.foliation_fourier_check(
        lambda s: ap * (s - s0), lambda s: bp * (s - s0), lambda s: r, args.lam, s0, args.nt)
    _emit(res)


def _sweep_one(job):
    mode, lam, theta0, v3, tol = job
    cfg = IntegrationConfig().with_tol(tol)
    if mode == "cyl":
        p = make_params(lam, (math.sqrt(max(0.0, 1.0 - v3 * v3)), 0.0, v3))
        return cylindrical.classify_cyl(p, theta0, (-10.0, 10.0), cfg).to_json_dict()
    return rotational.classify_rot(make_params(lam), rotational.AxisStart(), cfg).to_json_dict()


def cmd_sweep(args) -> None:
    jobs = [(args.mode, float(lam), args.theta0, args.v3, args.tol) for lam in args.lambda_grid]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(_sweep_one, jobs))
    else:
        reports = [_sweep_one(j) for j in jobs]
    for rep in reports:
        sys.stdout.write(json.dumps(_jsonable(rep), allow_nan=False) + "\n")


# ---------------------------------------------------------------------------
# parser

def _add_tol(p):
    p.add_argument("--tol", type=float, default=1e-10, help="integrator tolerance (default 1e-10)")


def _add_cyl_args(p, lam_required=True):
    p.add_argument("--lambda", dest="lam", type=parse_real, required=lam_required)
    p.add_argument("--v3", type=parse_real, default=1.0, help="vertical density component in [0, 1]")
    p.add_argument("--theta0", type=parse_real, default=0.0, help="initial angle; accepts pi, pi/2, ...")
    p.add_argument("--s-range", type=parse_range, default=None, help="A:B (default -10:10)")
    _add_tol(p)


def _add_rot_args(p):
    p.add_argument("--lambda", dest="lam", type=parse_real, required=True)
    p.add_argument("--x0", type=parse_real, default=None)
    p.add_argument("--theta0", type=parse_real, default=0.0)
    p.add_argument("--from-axis", action="store_true", help="start orthogonally on the axis")
    p.add_argument("--s-range", type=parse_range, default=None,
                   help="A:B (default -10:10, or 0:20 from the axis)")
    _add_tol(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lamsol", description=__doc__.splitlines()[0],
                                     epilog="Ranges starting with '-' need '=': --s-range=-10:10")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cyl", help="integrate a cylindrical profile to CSV")
    _add_cyl_args(p)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_cyl)

    p = sub.add_parser("rot", help="integrate a rotational profile to CSV")
    _add_rot_args(p)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_rot)

    p = sub.add_parser("classify", help="regime report as JSON")
    csub = p.add_subparsers(dest="mode", required=True)
    q = csub.add_parser("cyl")
    _add_cyl_args(q)
    q.set_defaults(func=cmd_classify)
    q = csub.add_parser("rot")
    _add_rot_args(q)
    q.set_defaults(func=cmd_classify)

    p = sub.add_parser("phase", help="phase-plane equilibria and portrait")
    p.add_argument("--lambda", dest="lam", type=parse_real, required=True)
    p.add_argument("--portrait", default=None, help="CSV path for portrait orbits")
    p.add_argument("--singularities", default=None, help="JSON path for the equilibria")
    p.set_defaults(func=cmd_phase)

    p = sub.add_parser("trans", help="integrate the translation-type profile g(y)")
    p.add_argument("--a", type=parse_real, default=0.0, help="slope of f(x) = a x")
    p.add_argument("--v", type=parse_vector, default=(0.0, 0.0, 1.0), help="V1,V2,V3")
    p.add_argument("--lambda", dest="lam", type=parse_real, required=True)
    p.add_argument("--y-range", type=parse_range, default=None, help="A:B (default -1:1)")
    p.add_argument("--g0", type=parse_real, default=0.0)
    p.add_argument("--gp0", type=parse_real, default=0.0)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    _add_tol(p)
    p.set_defaults(func=cmd_trans)

    p = sub.add_parser("verify", help="residual of a profile CSV")
    p.add_argument("--kind", choices=("cyl", "rot", "trans"), required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--lambda", dest="lam", type=parse_real, required=True)
    p.add_argument("--v", type=parse_vector, default=(0.0, 0.0, 1.0), help="V1,V2,V3")
    p.add_argument("--a", type=parse_real, default=0.0, help="slope of f for translation curves")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("mesh", help="sweep a profile into an OBJ mesh")
    p.add_argument("--kind", dest="mode", choices=("cyl", "rot"), required=True)
    p.add_argument("--lambda", dest="lam", type=parse_real, required=True)
    p.add_argument("--v3", type=parse_real, default=1.0)
    p.add_argument("--theta0", type=parse_real, default=0.0)
    p.add_argument("--x0", type=parse_real, default=None)
    p.add_argument("--from-axis", action="store_true")
    p.add_argument("--s-range", type=parse_range, default=None)
    p.add_argument("--t-range", type=parse_range, default=None,
                   help="A:B (default -1:1 for cyl, 0:2pi for rot)")
    p.add_argument("--nt", type=positive_int, default=128)
    p.add_argument("--ns", type=positive_int, default=None, help="rows along the profile")
    p.add_argument("--out", required=True)
    _add_tol(p)
    p.set_defaults(func=cmd_mesh)

    p = sub.add_parser("foliation", help="Fourier coefficients for a circle foliation")
    p.add_argument("--lambda", dest="lam", type=parse_real, required=True)
    p.add_argument("--s0", type=parse_real, default=0.0)
    p.add_argument("--a-prime", type=parse_real, required=True)
    p.add_argument("--b-prime", type=parse_real, required=True)
    p.add_argument("--r", type=parse_real, required=True)
    p.add_argument("--nt", type=int, default=128)
    p.set_defaults(func=cmd_foliation)

    p = sub.add_parser("sweep", help="one JSON report per lambda (JSON lines)")
    p.add_argument("--lambda-grid", type=parse_grid, required=True, help="A:B:N")
    p.add_argument("--mode", choices=("cyl", "rot"), required=True)
    p.add_argument("--theta0", type=parse_real, default=0.0, help="cyl mode only")
    p.add_argument("--v3", type=parse_real, default=1.0, help="cyl mode only")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    _add_tol(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        try:
            args.func(args)
        except InvalidDensityVector as exc:
            # the density vector comes straight from the command line
            raise UsageError(str(exc)) from exc
    except SolitonError as exc:
        print(f"lamsol: error in {exc.subsystem}: {exc}", file=sys.stderr)
        return 1
    except (UsageError, ValueError) as exc:
        sub = getattr(args, "command", None)
        parser.print_usage(sys.stderr)
        print(f"lamsol {sub}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"lamsol: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())
