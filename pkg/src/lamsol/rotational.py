"""Rotational solitons about the z-axis with density vector ``e3``.

The profile ``(x(s), z(s))`` in the half plane ``x > 0`` obeys

    x' = cos(theta),  z' = sin(theta),
    theta' = 2 lam + cos(theta) - sin(theta) / x,

and along every solution ``x sin(theta) - lam x^2 - int x cos(theta)^2 ds``
is constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

from .geomtypes import (
    AxisSingularity,
    CurveKind,
    ProfileCurve,
    RegimeReport,
    SolitonParams,
)
from .integrate import (
    DEFAULT_CONFIG,
    IntegrationConfig,
    integrate_adaptive,
    integrate_two_sided,
    polyline_self_intersections,
)

AXIS_EPS = 1e-4        # length of the series segment at the axis
AXIS_STOP = 1e-5       # an off-axis trajectory reaching this x is treated as hitting the axis
LAMBDA_TOL = 1e-12
ASYMPTOTE_TOL = 1e-3


class RotRegime(str, Enum):
    Cylinder = "Cylinder"
    HorizontalPlane = "HorizontalPlane"
    AxisSpiralToCylinder = "AxisSpiralToCylinder"
    AxisConvexGraphToCylinder = "AxisConvexGraphToCylinder"
    BowlSoliton = "BowlSoliton"
    AxisConvexEntireGraph = "AxisConvexEntireGraph"
    AxisSelfIntersecting = "AxisSelfIntersecting"
    OffAxisTwoEnded = "OffAxisTwoEnded"
    Winglike = "Winglike"


class EndType(str, Enum):
    AsymptoticToCylinder = "AsymptoticToCylinder"
    SelfIntersecting = "SelfIntersecting"
    ConvexGraphOutsideDisc = "ConvexGraphOutsideDisc"


@dataclass(frozen=True)
class AxisStart:
    """Profile leaving the axis orthogonally at the origin."""


@dataclass(frozen=True)
class OffAxis:
    x0: float
    theta0: float

    def __post_init__(self):
        if not self.x0 > 0:
            raise AxisSingularity(f"off-axis start needs x0 > 0, got {self.x0}")


Start = Union[AxisStart, OffAxis]


def _check_axis(p: SolitonParams):
    if p.v != (0.0, 0.0, 1.0):
        raise ValueError("rotational solitons need the density vector parallel to the axis, v = (0, 0, 1)")


def rot_rhs(state, p: SolitonParams) -> tuple[float, float, float]:
    """Derivative ``(x', z', theta')``; raises :class:`AxisSingularity` for ``x <= 0``."""
    if hasattr(state, "x"):
        x, theta = state.x, state.theta
    else:
        x, theta = state[-3], state[-1]
    if not x > 0:
        raise AxisSingularity(f"x = {x} is on or beyond the rotation axis")
    c, s = math.cos(theta), math.sin(theta)
    return (c, s, 2.0 * p.lam + c - s / x)


def _rhs_factory(lam: float):
    two_lam = 2.0 * lam
    cos, sin, nan = math.cos, math.sin, math.nan

    def rhs(s, y):
        x, th = y[0], y[2]
        c, sn = cos(th), sin(th)
        if x <= 0.0:
            # outside the half plane; the step is rejected and retried smaller
            return np.array((c, sn, nan))
        return np.array((c, sn, two_lam + c - sn / x))

    return rhs


def integrate_rot(
    p: SolitonParams,
    x0: float,
    theta0: float,
    s_range=(-10.0, 10.0),
    cfg: Optional[IntegrationConfig] = None,
    *,
    s_eval=None,
) -> ProfileCurve:
    """Profile through ``(x0, 0)`` with angle ``theta0`` at ``s = 0``.

    Integration in either direction stops at an ``"axis"`` event if the
    curve reaches the rotation axis; the event state carries the crossing
    angle.
    """
    _check_axis(p)
    if not x0 > 0:
        raise AxisSingularity("x0 must be positive; use integrate_rot_from_axis for x0 = 0")
    tr = integrate_two_sided(_rhs_factory(p.lam), (float(x0), 0.0, float(theta0)), 0.0,
                             s_range, cfg, s_eval=s_eval,
                             terminal=[("axis", lambda y: y[0] - AXIS_STOP)])
    return ProfileCurve(CurveKind.Rotational, p, tr.s, tr.y, tr.dy, tr.events,
                        {"x0": float(x0), "theta0": float(theta0), "status": tr.status})


def axis_series(lam: float, s):
    """Taylor expansion of the axis-start profile, accurate to ``O(s^5)``.

    Returns ``(x, z, theta)`` and their ``s``-derivatives as two tuples.
    """
    k = lam + 0.5
    k2 = k * k
    x = s - k2 * s**3 / 6
    z = 0.5 * k * s**2 - (k2 / 8 + k2 * k / 6) * s**4 / 4
    th = k * s - k2 * s**3 / 8
    dx = 1 - 0.5 * k2 * s**2
    dz = k * s - (k2 / 8 + k2 * k / 6) * s**3
    dth = k - 3 * k2 * s**2 / 8
    return (x, z, th), (dx, dz, dth)


def integrate_rot_from_axis(
    p: SolitonParams,
    s_range=(0.0, 20.0),
    cfg: Optional[IntegrationConfig] = None,
    *,
    s_eps: float = AXIS_EPS,
    s_eval=None,
) -> ProfileCurve:
    """Profile meeting the axis orthogonally at the origin, ``theta(0) = 0``.

    The series covers ``[0, s_eps]``; the adaptive integrator continues to
    ``s_range[1]``. Without ``s_eval`` the first sample is the axis point
    itself, with ``theta'(0) = lam + 1/2``. Requested points inside the
    series segment are evaluated from the series.
    """
    _check_axis(p)
    s0, s1 = float(s_range[0]), float(s_range[1])
    if s0 != 0.0:
        raise ValueError("axis-start profiles are parametrized from s = 0")
    if not s1 > s_eps:
        raise ValueError(f"s_range end must exceed the series length {s_eps}")
    state, _ = axis_series(p.lam, s_eps)
    rhs = _rhs_factory(p.lam)
    if s_eval is None:
        tr = integrate_adaptive(rhs, state, (s_eps, s1), cfg)
        s = np.concatenate([[0.0], tr.s])
        states = np.vstack([[0.0, 0.0, 0.0], tr.y])
        derivs = np.vstack([[1.0, 0.0, p.lam + 0.5], tr.dy])
    else:
        ev = np.asarray(s_eval, dtype=float)
        if np.any(ev < 0) or np.any(ev > s1):
            raise ValueError("s_eval points must lie inside s_range")
        near, far = ev[ev <= s_eps], ev[ev > s_eps]
        vals, ders = axis_series(p.lam, near)
        tr = integrate_adaptive(rhs, state, (s_eps, s1), cfg, s_eval=far) if far.size else None
        s = np.concatenate([near, tr.s if tr else []])
        states = np.vstack([np.column_stack(vals).reshape(-1, 3)] + ([tr.y] if tr else []))
        derivs = np.vstack([np.column_stack(ders).reshape(-1, 3)] + ([tr.dy] if tr else []))
    return ProfileCurve(CurveKind.Rotational, p, s, states, derivs, tr.events if tr else (),
                        {"start": "axis", "s_eps": s_eps, "status": tr.status if tr else "completed"})


def first_integral_series(curve: ProfileCurve) -> np.ndarray:
    """``D(s) - D(s_0)`` at every sample, ``s_0`` the first sample.

    ``D = x sin(theta) - lam x^2 - int x x'^2``. The integral of
    ``f = x cos(theta)^2`` is accumulated interval by interval with the
    two-point Hermite rule that uses ``f, f', f''`` at both ends (exact for
    quintics); the derivatives follow from the stored ``theta'`` and the
    profile equation.
    """
    p = curve.params
    s = curve.s
    x, th = curve.column("x"), curve.column("theta")
    dth = curve.derivs[:, 2]
    c, sn = np.cos(th), np.sin(th)
    with np.errstate(divide="ignore", invalid="ignore"):
        ddth = np.where(x > 0, -sn * dth - c * dth / x + sn * c / (x * x), 0.0)
    f = x * c * c
    df = c**3 - 2.0 * x * c * sn * dth
    d2f = -5.0 * c * c * sn * dth - 2.0 * x * np.cos(2 * th) * dth**2 - 2.0 * x * c * sn * ddth
    h = np.diff(s)
    pieces = (0.5 * h * (f[:-1] + f[1:]) + h**2 / 10.0 * (df[:-1] - df[1:])
              + h**3 / 120.0 * (d2f[:-1] + d2f[1:]))
    integral = np.concatenate([[0.0], np.cumsum(pieces)])
    D = x * sn - p.lam * x * x - integral
    return D - D[0]


def first_integral_rot(curve: ProfileCurve) -> float:
    """Largest drift ``max |D(s) - D(s_0)|`` of the first integral."""
    return float(np.max(np.abs(first_integral_series(curve))))


def monotone_functional(curve: ProfileCurve) -> np.ndarray:
    """``x sin(theta) - lam x^2`` along the curve; it never decreases."""
    x, th = curve.column("x"), curve.column("theta")
    return x * np.sin(th) - curve.params.lam * x * x


def embeddedness_check(curve: ProfileCurve):
    """``(embedded, crossings)`` for the ``(x, z)`` profile.

    Embedded means no transverse self-crossing of the polyline and ``x > 0``
    at every sample except possibly the two endpoints.
    """
    crossings = polyline_self_intersections(curve.planar)
    x = curve.column("x")
    inside = bool(np.all(x[1:-1] > 0)) if x.size > 2 else True
    return (not crossings) and inside, crossings


def _crossing_count(values: np.ndarray) -> int:
    sg = np.sign(values)
    sg = sg[sg != 0]
    return int(np.count_nonzero(sg[1:] != sg[:-1]))


def _single_signed(a: np.ndarray) -> bool:
    return a.size > 0 and bool(np.all(a > 0) or np.all(a < 0))


def _slow_rate(lam: float) -> float:
    """Decay rate in arc length of the slowest mode near the cylinder point."""
    if lam == 0.0:
        return 0.0
    disc = 1.0 - 16.0 * lam * lam
    root = math.sqrt(disc) if disc > 0 else 0.0
    # phase-plane eigenvalues are scaled by x = 1/(2|lam|) in arc length
    return abs(1.0 - root) / (4.0 * abs(lam)) * 2.0 * abs(lam)


def axis_s_max(lam: float) -> float:
    rate = _slow_rate(lam)
    if rate == 0.0 or lam < 0:
        return 40.0
    return float(min(400.0, max(40.0, 14.0 / rate)))


def _branch_features(curve: ProfileCurve, mask: np.ndarray, lam: float) -> dict:
    s = curve.s[mask]
    pts = curve.planar[mask]
    th = curve.column("theta")[mask]
    dth = curve.derivs[mask, 2]
    x = pts[:, 0]
    feats = {
        "s_end": float(s[-1] if s[-1] > 0 else s[0]) if s.size else None,
        "self_intersections": len(polyline_self_intersections(pts)) if s.size > 2 else 0,
        "graph": _single_signed(np.cos(th[1:])),
        "convex": _single_signed(np.cos(th[1:])) and _single_signed(dth[1:]),
        "x_range": [float(np.min(x)), float(np.max(x))] if x.size else None,
    }
    if lam != 0.0 and x.size:
        far = x[-1] if s[-1] > 0 else x[0]
        feats["radius_error"] = float(abs(far - 1.0 / (2.0 * abs(lam))))
    return feats


def _axis_label(lam: float) -> RotRegime:
    if lam >= 0.25 - LAMBDA_TOL:
        return RotRegime.AxisSpiralToCylinder
    if lam > LAMBDA_TOL:
        return RotRegime.AxisConvexGraphToCylinder
    if lam >= -LAMBDA_TOL:
        return RotRegime.BowlSoliton
    if lam > -0.5 + LAMBDA_TOL:
        return RotRegime.AxisConvexEntireGraph
    if lam >= -0.5 - LAMBDA_TOL:
        return RotRegime.HorizontalPlane
    return RotRegime.AxisSelfIntersecting


def _end_labels(lam: float):
    """(positive end, negative end) for a profile that avoids the axis."""
    if lam > 0.25:
        return EndType.AsymptoticToCylinder, EndType.SelfIntersecting
    if lam > 0:
        return EndType.AsymptoticToCylinder, EndType.ConvexGraphOutsideDisc
    if lam >= -0.5:
        return EndType.ConvexGraphOutsideDisc, EndType.AsymptoticToCylinder
    return EndType.SelfIntersecting, EndType.AsymptoticToCylinder


def _angle_is(theta: float, target: float) -> bool:
    return abs(math.remainder(theta - target, 2 * math.pi)) < 1e-12


def _report(regime, p, theta0, curve, features, **kw) -> RegimeReport:
    from .cylindrical import profile_residual

    embedded, crossings = embeddedness_check(curve)
    th = curve.column("theta")[1:]
    dth = curve.derivs[1:, 2]
    graph = _single_signed(np.cos(th))
    features = dict(features)
    features["samples"] = int(curve.s.size)
    features["s_range"] = [float(curve.s[0]), float(curve.s[-1])]
    features["first_integral_drift"] = first_integral_rot(curve)
    if curve.events:
        features["axis_hits"] = [{"s": e.s, "theta": float(e.state[2])} for e in curve.events]
    return RegimeReport(
        regime.value, p.lam, p.v3, theta0,
        self_intersection_count=len(crossings),
        convex=graph and _single_signed(dth),
        embedded=embedded,
        graph_over_base=graph,
        residual=profile_residual(curve),
        features=features,
        **kw,
    )


def classify_rot(
    p: SolitonParams,
    start: Start = AxisStart(),
    cfg: Optional[IntegrationConfig] = None,
    *,
    s_max: Optional[float] = None,
) -> RegimeReport:
    """Classify a rotational profile started on the axis or at ``OffAxis(x0, theta0)``."""
    _check_axis(p)
    lam = p.lam
    if isinstance(start, AxisStart):
        return _classify_axis(p, cfg, s_max)
    x0, th0 = float(start.x0), float(start.theta0)
    span = 40.0 if s_max is None else float(s_max)
    curve = integrate_rot(p, x0, th0, (-span, span), cfg)
    radius = 1.0 / (2.0 * abs(lam)) if lam else math.inf
    on_radius = lam != 0 and abs(x0 - radius) <= 1e-12 * radius
    if on_radius and _angle_is(th0, math.copysign(0.5 * math.pi, lam)):
        regime = RotRegime.Cylinder
    elif (abs(lam + 0.5) <= LAMBDA_TOL and _angle_is(th0, 0.0)) or (
            abs(lam - 0.5) <= LAMBDA_TOL and _angle_is(th0, math.pi)):
        regime = RotRegime.HorizontalPlane
    elif abs(lam) <= LAMBDA_TOL:
        regime = RotRegime.Winglike
    else:
        regime = RotRegime.OffAxisTwoEnded
    feats = {
        "positive_branch": _branch_features(curve, curve.s >= 0, lam),
        "negative_branch": _branch_features(curve, curve.s <= 0, lam),
    }
    if regime is RotRegime.OffAxisTwoEnded:
        pos, neg = _end_labels(lam)
        feats["positive_end"] = pos.value
        feats["negative_end"] = neg.value
    return _report(regime, p, th0, curve, feats)


def _classify_axis(p, cfg, s_max) -> RegimeReport:
    lam = p.lam
    regime = _axis_label(lam)
    smax = axis_s_max(lam) if s_max is None else float(s_max)
    curve = integrate_rot_from_axis(p, (0.0, smax), cfg)
    x, z, th = curve.column("x"), curve.column("z"), curve.column("theta")
    feats: dict = {"s_max": smax}
    if lam > 0:
        radius = 1.0 / (2.0 * lam)
        n = _crossing_count(x - radius)
        feats["radius_crossings"] = n
        feats["approach"] = "oscillatory" if n >= 2 else "monotone"
        feats["radius_error"] = float(abs(x[-1] - radius))
        feats["asymptotic_to_cylinder"] = feats["radius_error"] < ASYMPTOTE_TOL
        feats["x_bound_ok"] = bool(np.max(x) < 1.0 / lam)
    if lam <= 0:
        scale = 2.0 * max(1.0, 1.0 / (2.0 * abs(lam))) if lam else 2.0
        feats["x_unbounded"] = bool(np.all(np.diff(x) > 0) and x[-1] > scale)
    feats["exact_plane"] = bool(np.all(z == 0.0) and np.all(th == 0.0))
    feats["theta_range"] = [float(np.min(th)), float(np.max(th))]
    return _report(regime, p, 0.0, curve, feats)
