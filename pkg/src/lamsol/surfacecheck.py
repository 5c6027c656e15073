"""Surfaces swept by profile curves, discrete mean curvature, and exporters.

Parametrizations and their unit normals ``X_s x X_t / |X_s x X_t|``:

* cylindrical   ``X = (-t, y(s), z(s))``,          ``N = (0, -sin th, cos th)``
* rotational    ``X = (x cos t, x sin t, z)``,     ``N = (-sin th cos t, -sin th sin t, cos th)``
* translation   ``X = (-t, s, -a t + b + g(s))``,  ``N = (-a, -g', 1) / sqrt(W)``

The translation chart is the graph ``z = f(x) + g(y)`` with ``f = a x + b``
and ``x = -t``, so its normal is the upward graph normal.
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .geomtypes import CurveKind, ProfileCurve, SolitonParams, SurfaceGrid

AXIS_CLIP = 1e-3


# ---------------------------------------------------------------------------
# lifting profiles

def _resample(curve: ProfileCurve, s_grid: np.ndarray) -> ProfileCurve:
    """Re-integrate ``curve`` from its initial data, landing on ``s_grid``."""
    from . import cylindrical, rotational, transtype

    p, m = curve.params, curve.meta
    lo, hi = float(s_grid[0]), float(s_grid[-1])
    if curve.kind is CurveKind.Cylindrical:
        return cylindrical.integrate_cyl(p, m["theta0"], (min(lo, 0.0), max(hi, 0.0)),
                                         s_eval=s_grid)
    if curve.kind is CurveKind.Rotational:
        if m.get("start") == "axis":
            return rotational.integrate_rot_from_axis(p, (0.0, hi), s_eps=m["s_eps"],
                                                      s_eval=s_grid)
        return rotational.integrate_rot(p, m["x0"], m["theta0"], (min(lo, 0.0), max(hi, 0.0)),
                                        s_eval=s_grid)
    y0 = m["y0"]
    return transtype.integrate_gg(m["a"], p.v, p.lam, (min(lo, y0), max(hi, y0)), m["g0"],
                                  m["gp0"], y0=y0, b=m["b"], s_eval=s_grid)


def _is_uniform(s: np.ndarray) -> bool:
    if s.size < 3:
        return True
    d = np.diff(s)
    return bool(np.all(np.abs(d - d[0]) <= 1e-12 * max(1.0, abs(s[-1]))))


def build_surface(
    curve: ProfileCurve,
    t_range=None,
    nt: int = 128,
    *,
    ns: Optional[int] = None,
    s_range=None,
) -> SurfaceGrid:
    """Sweep ``curve`` into a surface grid with analytic normals and ``H``.

    The grid is uniform in both parameters. Unless the curve already has
    uniform samples and neither ``ns`` nor ``s_range`` is given, the profile
    is re-integrated so that every grid row is an integrator output rather
    than an interpolated value. ``t_range`` defaults to ``[0, 2 pi]`` for
    rotational curves and ``[-1, 1]`` otherwise. Rotational samples with
    ``x < 1e-3`` are marked invalid.
    """
    if t_range is None:
        t_range = (0.0, 2 * math.pi) if curve.kind is CurveKind.Rotational else (-1.0, 1.0)
    if nt < 2:
        raise ValueError("nt must be at least 2")
    if ns is None and s_range is None and _is_uniform(curve.s):
        c = curve
    else:
        a, b = s_range if s_range is not None else (curve.s[0], curve.s[-1])
        n = ns if ns is not None else curve.s.size
        grid = np.linspace(float(a), float(b), int(n))
        c = _resample(curve, grid)
        if c.s.size != grid.size:
            raise ValueError("profile ended before the requested s-range "
                             f"(status {c.meta.get('status')!r})")
    s = c.s
    t = np.linspace(float(t_range[0]), float(t_range[1]), int(nt))
    S, T = np.meshgrid(s, t, indexing="ij")
    ones = np.ones_like(S)
    p = c.params

    if c.kind is CurveKind.Cylindrical:
        y, z, th = (c.states[:, k][:, None] * ones for k in range(3))
        dth = c.derivs[:, 2][:, None] * ones
        pos = np.stack([-T, y, z], axis=-1)
        nrm = np.stack([0 * ones, -np.sin(th), np.cos(th)], axis=-1)
        H = 0.5 * dth
        E, F, G = ones, 0 * ones, ones
        valid = np.ones(S.shape, dtype=bool)
    elif c.kind is CurveKind.Rotational:
        x, z, th = (c.states[:, k][:, None] * ones for k in range(3))
        dth = c.derivs[:, 2][:, None] * ones
        ct, st = np.cos(T), np.sin(T)
        pos = np.stack([x * ct, x * st, z], axis=-1)
        sn = np.sin(th)
        nrm = np.stack([-sn * ct, -sn * st, np.cos(th)], axis=-1)
        valid = x >= AXIS_CLIP
        with np.errstate(divide="ignore", invalid="ignore"):
            H = np.where(valid, 0.5 * (dth + sn / x), np.nan)
        E, F, G = ones, 0 * ones, x * x
    else:
        a, b = float(c.meta["a"]), float(c.meta["b"])
        g, gp = (c.states[:, k][:, None] * ones for k in range(2))
        gpp = c.derivs[:, 1][:, None] * ones
        pos = np.stack([-T, S, -a * T + b + g], axis=-1)
        W = 1 + a * a + gp * gp
        nrm = np.stack([-a * ones, -gp, ones], axis=-1) / np.sqrt(W)[..., None]
        H = 0.5 * (1 + a * a) * gpp / W**1.5
        E, F, G = 1 + gp * gp, -a * gp, (1 + a * a) * ones
        valid = np.ones(S.shape, dtype=bool)
    W = E * G - F * F
    return SurfaceGrid(s, t, pos, nrm, H, E, F, G, W, valid, kind=c.kind, params=p)


# ---------------------------------------------------------------------------
# discrete differential geometry

def _det3(a, b, c):
    return np.einsum("...i,...i->...", np.cross(a, b), c)


def numeric_mean_curvature(grid: SurfaceGrid) -> SurfaceGrid:
    """Mean curvature and normals from second-order central differences.

    Only interior samples (two neighbours in each direction) are computed;
    the boundary ring and any sample with ``W <= 0`` are marked invalid and
    hold NaN. ``H = Z / (2 W^{3/2})`` with
    ``Z = E [X_s,X_t,X_tt] - 2F [X_s,X_t,X_st] + G [X_s,X_t,X_ss]``.
    """
    X = grid.positions
    hs = (grid.s[-1] - grid.s[0]) / (grid.s.size - 1)
    ht = (grid.t[-1] - grid.t[0]) / (grid.t.size - 1)
    c = X[1:-1, 1:-1]
    Xs = (X[2:, 1:-1] - X[:-2, 1:-1]) / (2 * hs)
    Xt = (X[1:-1, 2:] - X[1:-1, :-2]) / (2 * ht)
    Xss = (X[2:, 1:-1] - 2 * c + X[:-2, 1:-1]) / hs**2
    Xtt = (X[1:-1, 2:] - 2 * c + X[1:-1, :-2]) / ht**2
    Xst = (X[2:, 2:] - X[2:, :-2] - X[:-2, 2:] + X[:-2, :-2]) / (4 * hs * ht)
    E = np.einsum("...i,...i->...", Xs, Xs)
    F = np.einsum("...i,...i->...", Xs, Xt)
    G = np.einsum("...i,...i->...", Xt, Xt)
    W = E * G - F * F
    Z = E * _det3(Xs, Xt, Xtt) - 2 * F * _det3(Xs, Xt, Xst) + G * _det3(Xs, Xt, Xss)
    ok = W > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        H_in = np.where(ok, Z / (2 * W**1.5), np.nan)
        N_in = np.where(ok[..., None], np.cross(Xs, Xt) / np.sqrt(W)[..., None], np.nan)

    shape = grid.shape
    H = np.full(shape, np.nan)
    N = np.full(shape + (3,), np.nan)
    fields = {k: np.full(shape, np.nan) for k in "EFGW"}
    valid = np.zeros(shape, dtype=bool)
    inner = (slice(1, -1), slice(1, -1))
    H[inner], N[inner] = H_in, N_in
    for k, v in zip("EFGW", (E, F, G, W)):
        fields[k][inner] = v
    valid[inner] = ok & grid.valid[inner]
    return SurfaceGrid(grid.s, grid.t, X, N, H, fields["E"], fields["F"], fields["G"],
                       fields["W"], valid, kind=grid.kind, params=grid.params)


def soliton_residual(grid: SurfaceGrid, p: Optional[SolitonParams] = None) -> dict:
    """Statistics of ``|2H - 2 lam - <N, v>|`` over the valid samples."""
    p = p or grid.params
    if p is None:
        raise ValueError("grid carries no parameters; pass p")
    ok = grid.valid & np.isfinite(grid.mean_curvature)
    nv = grid.normals @ np.asarray(p.v)
    r = np.abs(2 * grid.mean_curvature - 2 * p.lam - nv)[ok]
    if r.size == 0:
        return {"max": float("nan"), "mean": float("nan"), "samples": 0}
    return {"max": float(r.max()), "mean": float(r.mean()), "samples": int(r.size)}


def mean_curvature_gap(analytic: SurfaceGrid, numeric: SurfaceGrid) -> float:
    """Largest ``|H_numeric - H_analytic|`` where both are valid."""
    ok = analytic.valid & numeric.valid
    return float(np.max(np.abs(numeric.mean_curvature - analytic.mean_curvature)[ok]))


# ---------------------------------------------------------------------------
# circle foliations

def _derivs(fn: Callable[[float], float], s0: float, h: float) -> tuple[float, float, float]:
    """Value, first and second derivative by five-point central differences."""
    f = [float(fn(s0 + k * h)) for k in (-2, -1, 0, 1, 2)]
    d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
    d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
    return f[2], d1, d2


def a6_closed(lam: float, r: float, ap: float, bp: float) -> float:
    return -(4 * lam * lam - 1) * r**6 * (ap**6 - bp**6 - 15 * ap**4 * bp**2
                                          + 15 * ap**2 * bp**4) / 32


def b6_closed(lam: float, r: float, ap: float, bp: float) -> float:
    return -(4 * lam * lam - 1) * r**6 * ap * bp * (3 * ap**4 + 3 * bp**4
                                                    - 10 * ap**2 * bp**2) / 16


def foliation_fourier_check(
    a_fn: Callable[[float], float],
    b_fn: Callable[[float], float],
    r_fn: Callable[[float], float],
    lam: float,
    s0: float = 0.0,
    nt: int = 128,
    *,
    hs: float = 1e-3,
) -> dict:
    """Fourier coefficients in ``t`` of the squared soliton condition.

    The surface is ``X(s, t) = (a(s), b(s), s) + r(s) (cos t, sin t, 0)``.
    With ``Z`` as in :func:`numeric_mean_curvature` and density ``e3`` the
    soliton equation squares to ``P = (Z - [X_s,X_t,e3] W)^2 - 4 lam^2 W^3 = 0``;
    ``P(s0, .)`` is a trigonometric polynomial of degree at most 6, so a
    uniform sum over ``nt >= 64`` nodes returns its coefficients exactly.
    """
    if nt < 64:
        raise ValueError("nt must be at least 64 to resolve harmonics up to 6")
    a, ap, app = _derivs(a_fn, s0, hs)
    b, bp, bpp = _derivs(b_fn, s0, hs)
    r, rp, rpp = _derivs(r_fn, s0, hs)
    if not r > 0:
        raise ValueError(f"radius must be positive at s0, got {r}")
    t = 2 * math.pi * np.arange(nt) / nt
    ct, st = np.cos(t), np.sin(t)
    zero, one = np.zeros(nt), np.ones(nt)
    Xs = np.stack([ap + rp * ct, bp + rp * st, one], axis=-1)
    Xt = np.stack([-r * st, r * ct, zero], axis=-1)
    Xtt = np.stack([-r * ct, -r * st, zero], axis=-1)
    Xst = np.stack([-rp * st, rp * ct, zero], axis=-1)
    Xss = np.stack([app + rpp * ct, bpp + rpp * st, zero], axis=-1)
    E = np.einsum("ij,ij->i", Xs, Xs)
    F = np.einsum("ij,ij->i", Xs, Xt)
    G = np.einsum("ij,ij->i", Xt, Xt)
    W = E * G - F * F
    Z = E * _det3(Xs, Xt, Xtt) - 2 * F * _det3(Xs, Xt, Xst) + G * _det3(Xs, Xt, Xss)
    e3 = np.cross(Xs, Xt)[:, 2]
    P = (Z - e3 * W) ** 2 - 4 * lam * lam * W**3
    A = [float(P.mean())] + [float(2 * np.mean(P * np.cos(n * t))) for n in range(1, 7)]
    B = [0.0] + [float(2 * np.mean(P * np.sin(n * t))) for n in range(1, 7)]
    A6c, B6c = a6_closed(lam, r, ap, bp), b6_closed(lam, r, ap, bp)
    higher = [float(2 * np.max(np.abs(np.fft.rfft(P)[7:nt // 2]) / nt))] if nt > 14 else [0.0]
    return {
        "lambda": lam, "s0": s0, "nt": nt,
        "a_prime": ap, "b_prime": bp, "r": r,
        "A": A, "B": B,
        "A6_closed": A6c, "B6_closed": B6c,
        "A6_error": abs(A[6] - A6c), "B6_error": abs(B[6] - B6c),
        "max_higher_harmonic": higher[0],
    }


def _stats(r: np.ndarray) -> dict:
    r = r[np.isfinite(r)]
    if r.size == 0:
        return {"max": None, "mean": None}
    return {"max": float(r.max()), "mean": float(r.mean())}


def sample_residual(kind: CurveKind, data: np.ndarray, p: SolitonParams, *, a: float = 0.0) -> dict:
    """Residuals of a sampled profile (as read from CSV) against its ODE.

    Derivatives come from cubic splines through the samples, so the result
    reflects both the solution and the sampling density. Two samples at
    each end are dropped where spline end conditions dominate. The
    ``residual`` entry is the ODE residual: ``theta'`` against its right-hand
    side for profiles, the translation equation for ``g``.
    """
    from scipy.interpolate import CubicSpline

    from .transtype import translation_residual

    data = np.asarray(data, dtype=float)
    if data.shape[0] < 7:
        raise ValueError("need at least 7 samples to check a profile")
    core = slice(2, -2)
    if kind is CurveKind.TranslationG:
        y, g, gp = data.T
        gpp = CubicSpline(y, gp)(y, 1)
        w = 1 + a * a + gp * gp
        rhs = 2 * p.lam * w**1.5 + w * (-p.v[0] * a - p.v[1] * gp + p.v[2])
        slope = np.abs(CubicSpline(y, g)(y, 1) - gp)
        return {"samples": int(y.size),
                "residual": _stats(np.abs((1 + a * a) * gpp - rhs)[core]),
                "slope_consistency": _stats(slope[core]),
                "spline_residual": translation_residual(a, 0.0, (y[core], g[core]), p.v, p.lam)}
    s, u, z, th = data.T
    dth = CubicSpline(s, th)(s, 1)
    du, dz = CubicSpline(s, u)(s, 1), CubicSpline(s, z)(s, 1)
    if kind is CurveKind.Cylindrical:
        rhs = 2 * p.lam + p.v3 * np.cos(th)
        keep = np.ones(s.size, dtype=bool)
    else:
        keep = u >= AXIS_CLIP
        with np.errstate(divide="ignore", invalid="ignore"):
            rhs = 2 * p.lam + np.cos(th) - np.sin(th) / u
    keep[:2] = keep[-2:] = False
    tangent = np.hypot(du - np.cos(th), dz - np.sin(th))
    return {"samples": int(s.size),
            "residual": _stats(np.abs(dth - rhs)[keep]),
            "tangent_consistency": _stats(tangent[keep]),
            "arc_length": _stats(np.abs(np.hypot(du, dz) - 1.0)[keep])}


# ---------------------------------------------------------------------------
# exporters

def _g(x: float) -> str:
    return "%.17g" % x


def _write_text(path, text: str) -> None:
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def obj_text(grid: SurfaceGrid, normals: bool = True) -> str:
    """OBJ document; normals are written only when every one of them is finite."""
    ns, nt = grid.shape
    normals = normals and bool(np.all(np.isfinite(grid.normals)))
    out = io.StringIO()
    for v in grid.positions.reshape(-1, 3):
        out.write("v %s %s %s\n" % tuple(_g(c) for c in v))
    if normals:
        for v in grid.normals.reshape(-1, 3):
            out.write("vn %s %s %s\n" % tuple(_g(c) for c in v))
    for i in range(ns - 1):
        for j in range(nt - 1):
            q = (i * nt + j + 1, (i + 1) * nt + j + 1, (i + 1) * nt + j + 2, i * nt + j + 2)
            if normals:
                out.write("f " + " ".join(f"{k}//{k}" for k in q) + "\n")
            else:
                out.write("f %d %d %d %d\n" % q)
    return out.getvalue()


def export_obj(grid: SurfaceGrid, path, normals: bool = True) -> None:
    """Wavefront OBJ: row-major ``v`` lines, optional ``vn``, 1-indexed quads."""
    _write_text(path, obj_text(grid, normals))


CSV_HEADERS = {
    CurveKind.Cylindrical: ("s", "y", "z", "theta"),
    CurveKind.Rotational: ("s", "x", "z", "theta"),
    CurveKind.TranslationG: ("y", "g", "gp"),
}


def csv_text(curve: ProfileCurve) -> str:
    rows = [",".join(CSV_HEADERS[curve.kind])]
    for s, st in zip(curve.s, curve.states):
        rows.append(",".join(_g(v) for v in (s, *st)))
    return "\n".join(rows) + "\n"


def export_csv(curve: ProfileCurve, path) -> None:
    """Samples at 17 significant digits under the kind's header."""
    _write_text(path, csv_text(curve))


def read_csv(path) -> tuple[tuple[str, ...], np.ndarray]:
    """Header and ``(N, k)`` float array of a CSV written by :func:`export_csv`."""
    path = Path(path)
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if not rows:
        raise ValueError(f"{path}: empty CSV")
    header = tuple(h.strip() for h in rows[0])
    data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    return header, data.reshape(-1, len(header))


def kind_from_header(header: Sequence[str]) -> CurveKind:
    for kind, h in CSV_HEADERS.items():
        if tuple(header) == h:
            return kind
    raise ValueError(f"unrecognized CSV header {','.join(header)!r}")


def svg_text(polylines: Iterable, width: int = 800, height: int = 600,
             stroke: str = "black") -> str:
    lines = [np.asarray(pl, dtype=float).reshape(-1, 2) for pl in polylines]
    pts = np.vstack([pl[np.all(np.isfinite(pl), axis=1)] for pl in lines]) if lines else np.zeros((0, 2))
    if pts.size:
        lo, hi = pts.min(axis=0), pts.max(axis=0)
    else:
        lo, hi = np.zeros(2), np.ones(2)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    lo, span = lo - 0.05 * span, 1.1 * span
    # flip y so that the plot reads with z upward
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="{_g(lo[0])} {_g(-(lo[1] + span[1]))} {_g(span[0])} {_g(span[1])}" '
           'preserveAspectRatio="xMidYMid meet">']
    sw = _g(0.002 * float(max(span)))
    for pl in lines:
        pl = pl[np.all(np.isfinite(pl), axis=1)]
        coords = " ".join(f"{_g(x)},{_g(-y)}" for x, y in pl)
        out.append(f'<polyline fill="none" stroke="{stroke}" stroke-width="{sw}" points="{coords}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def export_svg(polylines: Iterable, path, width: int = 800, height: int = 600) -> None:
    """One ``<polyline>`` per curve in a viewBox fitted to the data with a 5% margin."""
    _write_text(path, svg_text(polylines, width, height))
