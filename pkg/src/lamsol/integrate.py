"""Adaptive explicit Runge-Kutta integration, event location and polyline
self-intersection search.

The integrator is the Dormand-Prince 5(4) pair with local extrapolation and a
cubic Hermite dense output built from the states and derivatives at accepted
steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from .geomtypes import BudgetExceeded, Event, IntegrationStalled

__all__ = [
    "IntegrationConfig",
    "Trajectory",
    "integrate_adaptive",
    "integrate_two_sided",
    "hermite_eval",
    "detect_events",
    "Crossing",
    "polyline_self_intersections",
    "polyline_self_intersections_bruteforce",
]


@dataclass(frozen=True)
class IntegrationConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    max_step: float = 0.05
    max_samples: int = 2_000_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")
        if self.max_samples < 2:
            raise ValueError("max_samples must be at least 2")

    def with_tol(self, tol: float) -> "IntegrationConfig":
        return IntegrationConfig(tol, tol, self.max_step, self.max_samples)


DEFAULT_CONFIG = IntegrationConfig()

# Dormand-Prince 5(4)
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# fifth minus fourth order weights
_E1 = 71 / 57600
_E3 = -71 / 16695
_E4 = 71 / 1920
_E5 = -17253 / 339200
_E6 = 22 / 525
_E7 = -1 / 40


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples of an integrated trajectory in integration order.

    ``s`` may be increasing or decreasing (backward integration) but is
    strictly monotone.
    """

    s: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    events: tuple = ()
    status: str = "completed"

    def __len__(self):
        return self.s.size

    @property
    def final(self) -> np.ndarray:
        return self.y[-1]

    def __call__(self, s) -> np.ndarray:
        if self.s.size > 1 and self.s[-1] < self.s[0]:
            return hermite_eval(self.s[::-1], self.y[::-1], self.dy[::-1], s)
        return hermite_eval(self.s, self.y, self.dy, s)

    def ascending(self) -> "Trajectory":
        if self.s.size > 1 and self.s[-1] < self.s[0]:
            return Trajectory(self.s[::-1].copy(), self.y[::-1].copy(), self.dy[::-1].copy(),
                              self.events, self.status)
        return self


def hermite_eval(s_knots: np.ndarray, y: np.ndarray, dy: np.ndarray, s) -> np.ndarray:
    """Piecewise cubic Hermite interpolation on ascending knots.

    Returns shape ``(n,)`` for scalar ``s`` and ``(m, n)`` for an array.
    Points outside the knot range are extrapolated from the end intervals.
    """
    scalar = np.ndim(s) == 0
    q = np.atleast_1d(np.asarray(s, dtype=float))
    if s_knots.size == 1:
        out = np.repeat(y[:1], q.size, axis=0)
        return out[0] if scalar else out
    i = np.clip(np.searchsorted(s_knots, q, side="right") - 1, 0, s_knots.size - 2)
    s0, s1 = s_knots[i], s_knots[i + 1]
    h = (s1 - s0)[:, None]
    u = ((q - s0) / (s1 - s0))[:, None]
    u2, u3 = u * u, u * u * u
    h00 = 2 * u3 - 3 * u2 + 1
    h10 = u3 - 2 * u2 + u
    h01 = -2 * u3 + 3 * u2
    h11 = u3 - u2
    out = h00 * y[i] + h10 * h * dy[i] + h01 * y[i + 1] + h11 * h * dy[i + 1]
    return out[0] if scalar else out


def _hermite_one(s0, s1, y0, y1, d0, d1, s):
    h = s1 - s0
    u = (s - s0) / h
    u2 = u * u
    u3 = u2 * u
    return ((2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * h * d0
            + (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * h * d1)


def _bisect_step(fn, s0, s1, y0, y1, d0, d1, g0, max_iter=52, tol=1e-10):
    """Refine a sign change of ``fn`` inside one Hermite step."""
    a, b = s0, s1
    ga = g0
    sm, ym = s1, y1
    for _ in range(max_iter):
        sm = 0.5 * (a + b)
        ym = _hermite_one(s0, s1, y0, y1, d0, d1, sm)
        gm = fn(ym)
        if abs(gm) < tol and abs(b - a) < 1e-6 * max(1.0, abs(sm)):
            break
        if gm == 0.0:
            break
        if (gm > 0) == (ga > 0):
            a, ga = sm, gm
        else:
            b = sm
    return sm, ym


def _dp_advance(rhs, s, y, k1, hs):
    """Fifth-order Dormand-Prince update over one step of size ``hs``."""
    k2 = rhs(s + _C2 * hs, y + hs * (_A21 * k1))
    k3 = rhs(s + _C3 * hs, y + hs * (_A31 * k1 + _A32 * k2))
    k4 = rhs(s + _C4 * hs, y + hs * (_A41 * k1 + _A42 * k2 + _A43 * k3))
    k5 = rhs(s + _C5 * hs, y + hs * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4))
    k6 = rhs(s + hs, y + hs * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5))
    return y + hs * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)


Rhs = Callable[[float, np.ndarray], np.ndarray]
Terminal = Sequence[tuple]


def integrate_adaptive(
    rhs: Rhs,
    state0,
    s_range,
    cfg: Optional[IntegrationConfig] = None,
    *,
    s_eval=None,
    terminal: Terminal = (),
) -> Trajectory:
    """Integrate ``state' = rhs(s, state)`` from ``s_range[0]`` to ``s_range[1]``.

    Parameters
    ----------
    rhs : callable
        ``rhs(s, y)`` returning an array like ``y``. Non-finite output makes
        the step be rejected and retried with a smaller step.
    state0 : array_like
        Initial state at ``s_range[0]``.
    s_range : (float, float)
        Start and end of integration; a decreasing pair integrates backward.
    cfg : IntegrationConfig, optional
    s_eval : array_like, optional
        If given, only these parameter values (monotone in the direction of
        integration) are recorded, and the integrator lands on each exactly.
    terminal : sequence of (tag, fn)
        Scalar functions of the state; integration stops at the first sign
        change of any of them, which is located by bisection on the dense
        output and recorded as an event.

    Raises
    ------
    IntegrationStalled
        If the step size underflows.
    BudgetExceeded
        If more than ``cfg.max_samples`` samples would be recorded.
    """
    cfg = cfg or DEFAULT_CONFIG
    s0, s1 = float(s_range[0]), float(s_range[1])
    if not (math.isfinite(s0) and math.isfinite(s1)) or s0 == s1:
        raise ValueError(f"degenerate integration range {s_range!r}")
    direction = 1.0 if s1 > s0 else -1.0
    y = np.array(state0, dtype=float)
    rtol, atol = cfg.rel_tol, cfg.abs_tol
    hmax = cfg.max_step

    if s_eval is not None:
        targets = [float(v) for v in np.atleast_1d(s_eval)]
        if any((t - s0) * direction < 0 or (t - s1) * direction > 0 for t in targets):
            raise ValueError("s_eval points must lie inside s_range")
        if any((b - a) * direction <= 0 for a, b in zip(targets, targets[1:])):
            raise ValueError("s_eval must be strictly monotone in the integration direction")
    else:
        targets = None
    t_idx = 0

    k1 = np.asarray(rhs(s0, y), dtype=float)
    if not np.all(np.isfinite(k1)):
        raise IntegrationStalled("right-hand side is not finite at the initial state", s0, y)

    out_s, out_y, out_dy = [], [], []
    if targets is None or (targets and targets[0] == s0):
        out_s.append(s0)
        out_y.append(y.copy())
        out_dy.append(k1.copy())
        if targets is not None:
            t_idx = 1

    term_vals = [fn(y) for _, fn in terminal]
    events = []
    status = "completed"

    s = s0
    h_prop = min(hmax, abs(s1 - s0), 0.1 * rtol ** 0.2)
    while (s1 - s) * direction > 0:
        if targets is not None:
            if t_idx >= len(targets):
                break
            goal = targets[t_idx]
        else:
            goal = s1
        remaining = abs(goal - s)
        if targets is not None and remaining <= 8 * np.finfo(float).eps * max(1.0, abs(s)):
            # target within roundoff of the current point: record it in place
            out_s.append(goal)
            out_y.append(y.copy())
            out_dy.append(np.asarray(rhs(goal, y), dtype=float))
            t_idx += 1
            continue
        h = min(h_prop, hmax)
        landing = h >= remaining * (1 - 1e-12)
        if landing:
            h = remaining
        if h <= 8 * np.finfo(float).eps * max(1.0, abs(s)):
            raise IntegrationStalled(f"step size underflow at s={s!r}", s, y)
        hs = h * direction
        s_new = goal if landing else s + hs

        k2 = rhs(s + _C2 * hs, y + hs * (_A21 * k1))
        k3 = rhs(s + _C3 * hs, y + hs * (_A31 * k1 + _A32 * k2))
        k4 = rhs(s + _C4 * hs, y + hs * (_A41 * k1 + _A42 * k2 + _A43 * k3))
        k5 = rhs(s + _C5 * hs, y + hs * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4))
        k6 = rhs(s + hs, y + hs * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5))
        y_new = y + hs * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        k7 = rhs(s_new, y_new)
        err_vec = hs * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.max(np.abs(err_vec) / scale))
        if not math.isfinite(err):
            h_prop = 0.25 * h
            continue
        if err > 1.0:
            h_prop = h * max(0.2, 0.9 * err ** -0.2)
            continue

        hit = None
        for j, (tag, fn) in enumerate(terminal):
            g_new = fn(y_new)
            g_old = term_vals[j]
            if g_old != 0.0 and (g_new == 0.0 or (g_new > 0) != (g_old > 0)):
                se, ye = _bisect_step(fn, s, s_new, y, y_new, k1, k7, g_old)
                if hit is None or (se - hit[0]) * direction < 0:
                    hit = (se, tag, ye)
            term_vals[j] = g_new
        if hit is not None:
            se, tag, ye = hit
            if (se - s) * direction > 0:
                # the located state comes from the cubic interpolant; redo it at full order
                ye = _dp_advance(rhs, s, y, k1, se - s)
                out_s.append(se)
                out_y.append(ye)
                out_dy.append(np.asarray(rhs(se, ye), dtype=float))
            events.append(Event(se, tag, ye))
            status = f"terminated:{tag}"
            break

        s, y, k1 = s_new, y_new, k7
        if targets is None or landing:
            out_s.append(s)
            out_y.append(y.copy())
            out_dy.append(k1.copy())
            if targets is not None:
                t_idx += 1
            if len(out_s) > cfg.max_samples:
                raise BudgetExceeded(f"more than {cfg.max_samples} samples before s={s1!r}")
        fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        h_prop = max(h_prop, h) * fac if landing else h * fac

    return Trajectory(np.array(out_s), np.array(out_y).reshape(len(out_s), -1),
                      np.array(out_dy).reshape(len(out_s), -1), tuple(events), status)


def integrate_two_sided(
    rhs: Rhs,
    state0,
    s_start: float,
    s_range,
    cfg: Optional[IntegrationConfig] = None,
    *,
    s_eval=None,
    terminal: Terminal = (),
) -> Trajectory:
    """Integrate from ``s_start`` out to both ends of ``s_range``.

    The result is in ascending ``s`` with the initial point appearing once.
    """
    a, b = float(min(s_range)), float(max(s_range))
    if not a <= s_start <= b:
        raise ValueError(f"initial parameter {s_start} outside {s_range!r}")
    ev = None if s_eval is None else np.sort(np.atleast_1d(np.asarray(s_eval, dtype=float)))
    pieces = []
    events = []
    status = []
    if a < s_start:
        sub = None
        if ev is not None:
            sub = ev[ev <= s_start][::-1]
            if sub.size == 0 or sub[0] != s_start:
                sub = np.concatenate([[s_start], sub])
        back = integrate_adaptive(rhs, state0, (s_start, a), cfg, s_eval=sub, terminal=terminal)
        back = back.ascending()
        if ev is not None and s_start not in ev:
            keep = back.s != s_start
            back = Trajectory(back.s[keep], back.y[keep], back.dy[keep], back.events, back.status)
        pieces.append(back)
        events.extend(back.events)
        status.append(back.status)
    if s_start < b:
        sub = None
        if ev is not None:
            sub = ev[ev >= s_start]
            if sub.size == 0 or sub[0] != s_start:
                sub = np.concatenate([[s_start], sub])
        fwd = integrate_adaptive(rhs, state0, (s_start, b), cfg, s_eval=sub, terminal=terminal)
        if ev is not None and s_start not in ev:
            keep = fwd.s != s_start
            fwd = Trajectory(fwd.s[keep], fwd.y[keep], fwd.dy[keep], fwd.events, fwd.status)
        if pieces and pieces[0].s.size and fwd.s.size and fwd.s[0] == pieces[0].s[-1]:
            fwd = Trajectory(fwd.s[1:], fwd.y[1:], fwd.dy[1:], fwd.events, fwd.status)
        pieces.append(fwd)
        events.extend(fwd.events)
        status.append(fwd.status)
    s = np.concatenate([p.s for p in pieces])
    y = np.concatenate([p.y for p in pieces])
    dy = np.concatenate([p.dy for p in pieces])
    events.sort(key=lambda e: e.s)
    bad = [st for st in status if st != "completed"]
    return Trajectory(s, y, dy, tuple(events), bad[0] if bad else "completed")


# ---------------------------------------------------------------------------
# events

def detect_events(trajectory, predicates, tol: float = 1e-10) -> list[Event]:
    """Locate every sign change of each predicate along a sampled trajectory.

    ``trajectory`` is a :class:`Trajectory` or a ``ProfileCurve`` (anything
    with ``s``, a state array and a derivative array). ``predicates`` is a
    mapping ``tag -> fn(state)`` or a sequence of functions, tagged by index.
    Crossings are refined by bisection on the Hermite dense output.
    """
    s = np.asarray(trajectory.s, dtype=float)
    y = getattr(trajectory, "y", None)
    if y is None:
        y = trajectory.states
        dy = trajectory.derivs
    else:
        dy = trajectory.dy
    if s.size > 1 and s[-1] < s[0]:
        s, y, dy = s[::-1], y[::-1], dy[::-1]
    if isinstance(predicates, Mapping):
        items = list(predicates.items())
    else:
        items = list(enumerate(predicates))

    events = []
    for tag, fn in items:
        g = np.array([fn(row) for row in y], dtype=float)
        for i in range(s.size):
            if g[i] == 0.0:
                if i == 0 or g[i - 1] != 0.0:
                    events.append(Event(float(s[i]), tag, y[i].copy()))
                continue
            if i + 1 < s.size and g[i + 1] != 0.0 and (g[i] > 0) != (g[i + 1] > 0):
                se, ye = _bisect_step(fn, s[i], s[i + 1], y[i], y[i + 1], dy[i], dy[i + 1],
                                      g[i], tol=tol)
                events.append(Event(float(se), tag, ye))
    events.sort(key=lambda e: e.s)
    return events


# ---------------------------------------------------------------------------
# polyline self-intersection

class Crossing(NamedTuple):
    i: int
    j: int
    point: tuple[float, float]


_COLLINEAR_EPS = 1e-12


def _segment_crossing(p1, p2, q1, q2):
    """Transverse interior crossing point of [p1,p2] and [q1,q2], or None."""
    dpx, dpy = p2[0] - p1[0], p2[1] - p1[1]
    dqx, dqy = q2[0] - q1[0], q2[1] - q1[1]
    lp = math.hypot(dpx, dpy)
    lq = math.hypot(dqx, dqy)
    if lp == 0.0 or lq == 0.0:
        return None
    o1 = dpx * (q1[1] - p1[1]) - dpy * (q1[0] - p1[0])
    o2 = dpx * (q2[1] - p1[1]) - dpy * (q2[0] - p1[0])
    o3 = dqx * (p1[1] - q1[1]) - dqy * (p1[0] - q1[0])
    o4 = dqx * (p2[1] - q1[1]) - dqy * (p2[0] - q1[0])
    eps = _COLLINEAR_EPS * lp * lq
    if abs(o1) <= eps or abs(o2) <= eps or abs(o3) <= eps or abs(o4) <= eps:
        return None
    if (o1 > 0) == (o2 > 0) or (o3 > 0) == (o4 > 0):
        return None
    t = o3 / (o3 - o4)
    return (p1[0] + t * dpx, p1[1] + t * dpy)


def polyline_self_intersections_bruteforce(points) -> list[Crossing]:
    """Quadratic reference: test every pair of non-adjacent segments."""
    pts = [tuple(map(float, p)) for p in points]
    out = []
    n = len(pts) - 1
    for i in range(n):
        for j in range(i + 2, n):
            hit = _segment_crossing(pts[i], pts[i + 1], pts[j], pts[j + 1])
            if hit is not None:
                out.append(Crossing(i, j, hit))
    return out


def polyline_self_intersections(points) -> list[Crossing]:
    """Transverse crossings between non-adjacent segments of an open polyline.

    Candidate pairs are pruned by sorting segment bounding boxes along x;
    each candidate is then decided by the same exact orientation test as
    :func:`polyline_self_intersections_bruteforce`. Results are ordered by
    ``(i, j)`` with ``i < j`` the segment indices.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must have shape (n, 2)")
    n = pts.shape[0] - 1
    if n < 3:
        return []
    a, b = pts[:-1], pts[1:]
    xmin = np.minimum(a[:, 0], b[:, 0])
    xmax = np.maximum(a[:, 0], b[:, 0])
    ymin = np.minimum(a[:, 1], b[:, 1])
    ymax = np.maximum(a[:, 1], b[:, 1])
    order = np.argsort(xmin, kind="stable")
    xmin_sorted = xmin[order]
    plist = [tuple(p) for p in pts.tolist()]
    found = []
    for k in range(n):
        i = order[k]
        hi = np.searchsorted(xmin_sorted, xmax[i], side="right")
        cand = order[k + 1:hi]
        if cand.size == 0:
            continue
        cand = cand[(ymin[cand] <= ymax[i]) & (ymax[cand] >= ymin[i]) & (np.abs(cand - i) > 1)]
        for j in cand.tolist():
            lo, up = (i, j) if i < j else (j, i)
            hit = _segment_crossing(plist[lo], plist[lo + 1], plist[up], plist[up + 1])
            if hit is not None:
                found.append(Crossing(int(lo), int(up), hit))
    found.sort(key=lambda c: (c.i, c.j))
    return found
