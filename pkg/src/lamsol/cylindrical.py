"""Cylindrical (translation invariant) solitons.

The surface is ``X(s, t) = alpha(s) + t a`` with rulings ``a = e1`` and the
profile ``alpha = (y, z)`` parametrized by arc length, tangent angle
``theta`` measured from the y-axis. The profile obeys

    y' = cos(theta),  z' = sin(theta),  theta' = 2 lam + v3 cos(theta).
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Optional

import numpy as np

from .geomtypes import (
    BranchDomain,
    CurveKind,
    CylState,
    DegenerateDensity,
    ProfileCurve,
    RegimeReport,
    SolitonParams,
)
from .integrate import (
    DEFAULT_CONFIG,
    IntegrationConfig,
    detect_events,
    integrate_adaptive,
    integrate_two_sided,
    polyline_self_intersections,
)

# relative tolerance used to decide the boundary cases lam == v3/2 and lam == 0
REGIME_TOL = 1e-12
# |theta'| below this at the start means the profile is a straight line
LINE_TOL = 1e-13


class CylRegime(str, Enum):
    Plane = "Plane"
    RulingsParallelCylinder = "RulingsParallelCylinder"
    SuperCritical = "SuperCritical"
    Critical = "Critical"
    SubCriticalSymmetric = "SubCriticalSymmetric"
    SubCriticalGraph = "SubCriticalGraph"
    GrimReaper = "GrimReaper"
    StraightLine = "StraightLine"


def _check_density(p: SolitonParams):
    if p.v3 <= 0.0:
        raise DegenerateDensity(
            f"v3 = {p.v3} must be positive; with v3 = 0 the profile is a line or a circle "
            "of radius 1/(2|lam|) (rulings parallel to the density vector)",
            subsystem="cylindrical")
    if abs(p.v[1]) > 1e-12:
        raise ValueError("density vector must lie in the (x, z) plane: rotate about the rulings first")


def cyl_rhs(state, p: SolitonParams) -> tuple[float, float, float]:
    """Derivative ``(y', z', theta')`` of the profile system at ``state``."""
    theta = state.theta if hasattr(state, "theta") else state[-1]
    c = math.cos(theta)
    return (c, math.sin(theta), 2.0 * p.lam + p.v3 * c)


def _rhs_factory(lam: float, v3: float):
    two_lam = 2.0 * lam
    cos, sin = math.cos, math.sin

    def rhs(s, y):
        c = cos(y[2])
        return np.array((c, sin(y[2]), two_lam + v3 * c))

    return rhs


def integrate_cyl(
    p: SolitonParams,
    theta0: float,
    s_range=(-10.0, 10.0),
    cfg: Optional[IntegrationConfig] = None,
    *,
    s_eval=None,
) -> ProfileCurve:
    """Profile through the origin with initial tangent angle ``theta0`` at ``s = 0``."""
    _check_density(p)
    rhs = _rhs_factory(p.lam, p.v3)
    tr = integrate_two_sided(rhs, (0.0, 0.0, float(theta0)), 0.0, s_range, cfg, s_eval=s_eval)
    return ProfileCurve(CurveKind.Cylindrical, p, tr.s, tr.y, tr.dy, tr.events,
                        {"theta0": float(theta0)})


def conserved_cyl(state, p: SolitonParams) -> float:
    """``exp(v3 z) (2 lam + v3 cos theta)``, constant along every profile."""
    if hasattr(state, "z"):
        z, theta = state.z, state.theta
    else:
        z, theta = state[-2], state[-1]
    return math.exp(p.v3 * z) * (2.0 * p.lam + p.v3 * math.cos(theta))


def conserved_along(curve: ProfileCurve) -> np.ndarray:
    p = curve.params
    z, th = curve.column("z"), curve.column("theta")
    return np.exp(p.v3 * z) * (2.0 * p.lam + p.v3 * np.cos(th))


def sign_flip(lam: float, theta0: float) -> tuple[float, float]:
    """Initial data for ``-lam`` whose profile is the mirror image ``y -> -y``."""
    return -lam, math.pi - theta0


# ---------------------------------------------------------------------------
# closed forms (theta0 = 0)

def closed_form_cyl(p: SolitonParams, s, *, unwrap: bool = False):
    """Explicit profile with ``theta(0) = 0`` for ``lam >= 0``.

    Returns arrays ``(y, z, theta)`` (scalars for scalar ``s``). Position is
    recovered from the angle through ``y = (theta - 2 lam s) / v3`` and the
    conserved quantity. In the periodic regime ``lam > v3/2`` the arctan
    formula only covers ``|s| < pi / sqrt(4 lam^2 - v3^2)``; pass
    ``unwrap=True`` to continue it to all ``s``.
    """
    _check_density(p)
    lam, v3 = p.lam, p.v3
    if lam < 0:
        raise ValueError("closed forms are stated for lam >= 0; use sign_flip for lam < 0")
    scalar = np.ndim(s) == 0
    s = np.asarray(s, dtype=float)
    if lam == 0.0:
        theta = 2.0 * np.arctan(np.tanh(0.5 * v3 * s))
        z = np.log(np.cosh(v3 * s)) / v3
    elif abs(lam - 0.5 * v3) <= REGIME_TOL * v3:
        theta = 2.0 * np.arctan(v3 * s)
        z = np.log1p((v3 * s) ** 2) / v3
    elif lam > 0.5 * v3:
        w = math.sqrt(4 * lam * lam - v3 * v3)
        k = math.sqrt((2 * lam + v3) / (2 * lam - v3))
        phi = 0.5 * w * s
        if not unwrap and np.any(np.abs(phi) >= 0.5 * math.pi):
            raise BranchDomain(
                f"|s| must be below {math.pi / w!r} on the principal arctan branch")
        half = np.arctan2(k * np.sin(phi), np.cos(phi))
        half = half + 2 * math.pi * np.round((phi - half) / (2 * math.pi))
        theta = 2.0 * half
        z = np.log((2 * lam - v3 * np.cos(w * s)) / (2 * lam - v3)) / v3
    else:
        w = math.sqrt(v3 * v3 - 4 * lam * lam)
        k = math.sqrt((2 * lam + v3) / (v3 - 2 * lam))
        theta = 2.0 * np.arctan(k * np.tanh(0.5 * w * s))
        # log((v3 cosh(ws) - 2 lam)/(v3 - 2 lam)) without overflow of cosh
        a = np.abs(w * s)
        z = (a + np.log(0.5 * v3 * (1 + np.exp(-2 * a)) - 2 * lam * np.exp(-a))
             - math.log(v3 - 2 * lam)) / v3
    y = (theta - 2.0 * lam * s) / v3
    if scalar:
        return float(y), float(z), float(theta)
    return y, z, theta


def period_length(p: SolitonParams) -> float:
    """Arc length over which theta advances by 2*pi when ``lam > v3/2``."""
    lam, v3 = abs(p.lam), p.v3
    if lam <= 0.5 * v3:
        raise ValueError("the profile is periodic only for |lam| > v3/2")
    return 2 * math.pi / math.sqrt(4 * lam * lam - v3 * v3)


# ---------------------------------------------------------------------------
# symmetry and classification

def reflect_symmetry_check(curve: ProfileCurve, n_pairs: int = 20, tol: float = 1e-6):
    """Vertical symmetry axis ``y = y(s0)`` through a horizontal tangency.

    The tangency used is the one closest to ``s = 0``. Returns ``None`` when
    the curve has no horizontal tangent or the reflection identity fails at
    one of the ``n_pairs`` paired samples.
    """
    s = curve.s
    th = curve.column("theta")
    flat = np.flatnonzero(np.abs(np.sin(th)) < 1e-12)
    cands = [float(s[i]) for i in flat]
    cands += [e.s for e in detect_events(curve, {"horizontal": lambda st: math.sin(st[2])})]
    if not cands:
        return None
    s0 = min(cands, key=lambda v: (abs(v), v))
    reach = min(s0 - s[0], s[-1] - s0)
    y0 = float(curve(s0)[0])
    if reach <= 0:
        return y0
    u = reach * np.arange(1, n_pairs + 1) / n_pairs
    plus, minus = curve(s0 + u), curve(s0 - u)
    ok = (np.max(np.abs(plus[:, 0] + minus[:, 0] - 2 * y0)) < tol
          and np.max(np.abs(plus[:, 1] - minus[:, 1])) < tol)
    return y0 if ok else None


def _reduce_angle(theta: float) -> float:
    """Representative of ``theta`` in ``(-pi, pi]``."""
    r = math.remainder(theta, 2 * math.pi)
    return math.pi if r == -math.pi else r


def cyl_regime(p: SolitonParams, theta0: float) -> CylRegime:
    """Regime label from the parameters alone, after the ``lam -> -lam`` flip."""
    if p.v3 <= 0.0:
        return CylRegime.Plane if p.lam == 0.0 else CylRegime.RulingsParallelCylinder
    lam, th0 = p.lam, theta0
    if lam < 0:
        lam, th0 = sign_flip(lam, th0)
    v3 = p.v3
    if abs(2 * lam + v3 * math.cos(th0)) < LINE_TOL:
        return CylRegime.StraightLine
    if lam <= REGIME_TOL * v3:
        return CylRegime.GrimReaper
    if abs(lam - 0.5 * v3) <= REGIME_TOL * v3:
        return CylRegime.Critical
    if lam > 0.5 * v3:
        return CylRegime.SuperCritical
    theta1 = math.acos(-2 * lam / v3)
    if abs(_reduce_angle(th0)) < theta1:
        return CylRegime.SubCriticalSymmetric
    return CylRegime.SubCriticalGraph


def _single_signed(a: np.ndarray) -> bool:
    return bool(np.all(a > 0) or np.all(a < 0))


def profile_residual(curve: ProfileCurve) -> dict:
    """Curvature of the sampled profile against the right-hand side of theta'.

    Curvature is the rotation rate of the unit tangent, differentiated with a
    cubic spline through the sampled tangents, so the check does not reuse
    the stored angle derivative.
    """
    from scipy.interpolate import CubicSpline

    p = curve.params
    s = curve.s
    if s.size < 5:
        return {"max": float("nan"), "mean": float("nan")}
    ta, tb = curve.derivs[:, 0], curve.derivs[:, 1]
    kappa = ta * CubicSpline(s, tb)(s, 1) - tb * CubicSpline(s, ta)(s, 1)
    th = curve.column("theta")
    if curve.kind is CurveKind.Cylindrical:
        target = 2 * p.lam + p.v3 * np.cos(th)
    else:
        x = curve.column("x")
        with np.errstate(divide="ignore", invalid="ignore"):
            target = 2 * p.lam + np.cos(th) - np.sin(th) / x
        keep = x > 1e-3
        kappa, target = kappa[keep], target[keep]
    # the spline end conditions are first order; trim two samples at each end
    r = np.abs(kappa - target)[2:-2]
    if r.size == 0:
        return {"max": float("nan"), "mean": float("nan")}
    return {"max": float(np.max(r)), "mean": float(np.mean(r))}


def _curve_features(curve: ProfileCurve) -> dict:
    p = curve.params
    th = curve.column("theta")
    dth = curve.derivs[:, 2]
    crossings = polyline_self_intersections(curve.planar)
    graph = _single_signed(np.cos(th))
    return {
        "crossings": crossings,
        "graph": graph,
        "convex": graph and _single_signed(dth),
    }


def find_period(p: SolitonParams, theta0: float, cfg: Optional[IntegrationConfig] = None):
    """Arc length ``T`` with ``theta(T) = theta0 + 2 pi`` (``lam > v3/2``).

    Returns ``(T, y(T), z(T), curve)`` where ``curve`` covers ``[0, 2 T]``.
    """
    cfg = cfg or DEFAULT_CONFIG
    v3 = p.v3
    lam = p.lam
    if abs(lam) <= 0.5 * v3:
        raise ValueError("no period: |lam| <= v3/2")
    direction = 1.0 if lam > 0 else -1.0
    target = theta0 + direction * 2 * math.pi
    bound = 2 * math.pi / (2 * abs(lam) - v3) * 1.05
    rhs = _rhs_factory(lam, v3)
    tr = integrate_adaptive(rhs, (0.0, 0.0, theta0), (0.0, bound), cfg,
                            terminal=[("period", lambda st: st[2] - target)])
    if not tr.events:
        raise RuntimeError("period event not found")
    T = tr.events[0].s
    y_T, z_T = float(tr.events[0].state[0]), float(tr.events[0].state[1])
    curve = integrate_cyl(p, theta0, (0.0, 2.0 * T), cfg)
    return T, y_T, z_T, curve


def classify_cyl(
    p: SolitonParams,
    theta0: float,
    s_range=(-10.0, 10.0),
    cfg: Optional[IntegrationConfig] = None,
) -> RegimeReport:
    """Classify the cylindrical profile with initial angle ``theta0``.

    ``lam < 0`` is accepted: the label is that of the mirrored profile with
    ``(-lam, pi - theta0)``. Geometric features are measured on the sampled
    curve over ``s_range``.
    """
    regime = cyl_regime(p, theta0)
    v3 = p.v3
    if regime in (CylRegime.Plane, CylRegime.RulingsParallelCylinder):
        circle = regime is CylRegime.RulingsParallelCylinder
        feats = {"radius": 1.0 / (2 * abs(p.lam)) if circle else None}
        return RegimeReport(regime.value, p.lam, v3, float(theta0), 0, None, None,
                            convex=circle, embedded=True, graph_over_base=False,
                            features=feats)

    curve = integrate_cyl(p, theta0, s_range, cfg)
    feats = _curve_features(curve)
    crossings = feats.pop("crossings")
    features: dict = {"s_range": [float(curve.s[0]), float(curve.s[-1])],
                      "samples": int(curve.s.size)}
    lam = abs(p.lam)
    period = None
    slopes = None
    axis = None

    if regime is CylRegime.StraightLine:
        dth = curve.derivs[:, 2]
        features["max_abs_curvature"] = float(np.max(np.abs(dth)))
    if regime is CylRegime.SuperCritical:
        T, y_T, z_T, pc = find_period(p, theta0, cfg)
        probe = np.linspace(0.0, T, 5, endpoint=False) + 0.1 * T
        a, b = pc(probe), pc(probe + T)
        features["period_length"] = T
        features["period_check"] = float(np.max(np.abs(b[:, 2] - a[:, 2]
                                                        - math.copysign(2 * math.pi, p.lam))))
        features["period_z_shift"] = z_T
        period = (y_T, 0.0)
    if regime in (CylRegime.SubCriticalSymmetric, CylRegime.SubCriticalGraph):
        theta1 = math.acos(-2 * lam / v3)
        slopes = (math.tan(theta1), -math.tan(theta1))
        th = curve.column("theta")
        features["theta1"] = theta1
        features["end_slopes_measured"] = [float(math.tan(th[0])), float(math.tan(th[-1]))]
    if regime is not CylRegime.StraightLine or abs(math.sin(theta0)) < 1e-12:
        axis = reflect_symmetry_check(curve)

    return RegimeReport(
        regime.value, p.lam, v3, float(theta0),
        self_intersection_count=len(crossings),
        period=period,
        asymptote_slopes=slopes,
        convex=feats["convex"],
        embedded=len(crossings) == 0,
        graph_over_base=feats["graph"],
        symmetry_axis=axis,
        residual=profile_residual(curve),
        features=features,
    )
