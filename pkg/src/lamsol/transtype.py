"""Translation-type solitons ``z = f(x) + g(y)`` with linear ``f = a x + b``.

Under the graph orientation ``N = (-f', -g', 1) / sqrt(W)``,
``W = 1 + f'^2 + g'^2``, the soliton equation reduces to

    (1 + a^2) g'' = 2 lam W^{3/2} + W (-v1 a - v2 g' + v3).
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .geomtypes import CurveKind, Event, IntegrationStalled, ProfileCurve, make_params
from .integrate import IntegrationConfig, Trajectory, integrate_two_sided

GP_MAX = 1e6  # |g'| above this is reported as a vertical tangent


def gg_rhs(yvar: float, g: float, gp: float, a: float, v, lam: float) -> float:
    """``g''`` from the reduced equation; ``yvar`` and ``g`` do not enter it."""
    w = 1.0 + a * a + gp * gp
    return (2.0 * lam * w ** 1.5 + w * (-v[0] * a - v[1] * gp + v[2])) / (1.0 + a * a)


def _system(a: float, v, lam: float):
    v1, v2, v3 = (float(c) for c in v)
    one_a2 = 1.0 + a * a
    two_lam = 2.0 * lam

    def rhs(y, u):
        gp = u[1]
        w = one_a2 + gp * gp
        return np.array((gp, (two_lam * w * math.sqrt(w) + w * (v3 - v1 * a - v2 * gp)) / one_a2))

    return rhs


def integrate_gg(
    a: float,
    v,
    lam: float,
    y_range=(-1.0, 1.0),
    g0: float = 0.0,
    gp0: float = 0.0,
    cfg: Optional[IntegrationConfig] = None,
    *,
    y0: float = 0.0,
    b: float = 0.0,
    s_eval=None,
) -> ProfileCurve:
    """Solve for ``g`` with ``g(y0) = g0``, ``g'(y0) = gp0`` over ``y_range``.

    Columns are ``(g, gp)`` against ``y``. If ``|g'|`` exceeds ``GP_MAX`` the
    solution is truncated there with a ``"vertical_tangent"`` event.
    """
    p = make_params(lam, v)
    rhs = _system(float(a), p.v, float(lam))
    lo, hi = float(y_range[0]), float(y_range[1])
    terminal = [("vertical_tangent", lambda u: GP_MAX - abs(u[1]))]
    try:
        tr = integrate_two_sided(rhs, (float(g0), float(gp0)), float(y0), (lo, hi), cfg,
                                 s_eval=s_eval, terminal=terminal)
    except IntegrationStalled as exc:
        # blow-up faster than the event could catch it: stop just short of it
        side = exc.s
        pad = 1e-9 * max(1.0, abs(side))
        lo2, hi2 = (side + pad, hi) if side < y0 else (lo, side - pad)
        tr = integrate_two_sided(rhs, (float(g0), float(gp0)), float(y0), (lo2, hi2), cfg,
                                 s_eval=None if s_eval is None else
                                 [u for u in s_eval if lo2 <= u <= hi2],
                                 terminal=terminal)
        stall = Event(side, "vertical_tangent", exc.state)
        tr = Trajectory(tr.s, tr.y, tr.dy, tr.events + (stall,), "terminated:vertical_tangent")
    meta = {"a": float(a), "b": float(b), "v": list(p.v), "y0": float(y0),
            "g0": float(g0), "gp0": float(gp0), "status": tr.status}
    return ProfileCurve(CurveKind.TranslationG, p, tr.s, tr.y, tr.dy, tr.events, meta)


def translation_residual(fa: float, fb: float, g_curve, v, lam: float) -> dict:
    """Residual of the full translation-surface equation with ``f = fa x + fb``.

    ``g_curve`` is either a TranslationG :class:`ProfileCurve` (``g''`` taken
    from its stored derivatives) or a tuple ``(y, g)`` of sample arrays, in
    which case ``g'`` and ``g''`` come from a cubic spline.
    """
    if isinstance(g_curve, ProfileCurve):
        gp = g_curve.column("gp")
        gpp = g_curve.derivs[:, 1]
    else:
        from scipy.interpolate import CubicSpline

        y, g = (np.asarray(c, dtype=float) for c in g_curve)
        spl = CubicSpline(y, g)
        gp, gpp = spl(y, 1), spl(y, 2)
    v1, v2, v3 = (float(c) for c in v)
    w = 1.0 + fa * fa + gp * gp
    lhs = (1.0 + fa * fa) * gpp  # f'' = 0
    rhs = 2.0 * lam * w**1.5 + w * (-v1 * fa - v2 * gp + v3)
    r = np.abs(lhs - rhs)
    return {"max": float(np.max(r)) if r.size else 0.0,
            "mean": float(np.mean(r)) if r.size else 0.0}
