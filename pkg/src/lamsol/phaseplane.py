"""Phase plane ``(theta, x)`` of rotational profiles.

Multiplying the projected rotational system by ``x > 0`` gives the smooth
autonomous field

    theta' = 2 lam x + x cos(theta) - sin(theta),   x' = x cos(theta),

whose orbits coincide with those of the profile equation in ``x > 0``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geomtypes import NotAnEquilibrium, SingularityInfo, Stability
from .integrate import IntegrationConfig, Trajectory, integrate_adaptive

EQUILIBRIUM_TOL = 1e-10
DISC_TOL = 1e-12


def pp_rhs(theta: float, x: float, lam: float) -> tuple[float, float]:
    c = math.cos(theta)
    return (2.0 * lam * x + x * c - math.sin(theta), x * c)


def jacobian_pp(point, lam: float) -> tuple[tuple[float, float], tuple[float, float]]:
    """Linearization of :func:`pp_rhs` at ``point = (theta, x)``."""
    theta, x = float(point[0]), float(point[1])
    c, s = math.cos(theta), math.sin(theta)
    return ((-x * s - c, 2.0 * lam + c), (-x * s, c))


def eigenvalues_2x2(jac) -> tuple[complex, complex]:
    """Eigenvalues from trace and determinant, ordered by increasing real part.

    A discriminant within roundoff of zero is snapped to zero, so a double
    eigenvalue comes back as an exact pair instead of splitting by the
    square root of the rounding error.
    """
    (a, b), (c, d) = jac
    tr = a + d
    det = a * d - b * c
    disc = tr * tr - 4.0 * det
    if abs(disc) < DISC_TOL * max(1.0, tr * tr):
        disc = 0.0
    if disc >= 0:
        r = math.sqrt(disc)
        return complex(0.5 * (tr - r)), complex(0.5 * (tr + r))
    r = cmath.sqrt(disc)
    return 0.5 * (tr - r), 0.5 * (tr + r)


def stability_from_eigenvalues(mu: tuple[complex, complex]) -> Stability:
    m1, m2 = mu
    if m1.imag != 0.0 or m2.imag != 0.0:
        if m1.real == 0.0:
            raise ValueError("purely imaginary eigenvalues: the equilibrium is not hyperbolic")
        return Stability.StableSpiral if m1.real < 0 else Stability.UnstableSpiral
    r1, r2 = m1.real, m2.real
    if r1 == 0.0 or r2 == 0.0:
        raise ValueError("zero eigenvalue: the equilibrium is not hyperbolic")
    if r1 * r2 < 0:
        return Stability.SaddleHyperbolic
    stable = r1 < 0
    if r1 == r2:
        return Stability.StableImproperNode if stable else Stability.UnstableImproperNode
    return Stability.StableNode if stable else Stability.UnstableNode


def q_eigenvalues_formula(lam: float) -> tuple[complex, complex]:
    """``(-1 -+ sqrt(1 - 16 lam^2)) / (4 lam)`` at the off-axis equilibrium."""
    r = cmath.sqrt(1.0 - 16.0 * lam * lam)
    return (-1.0 - r) / (4.0 * lam), (-1.0 + r) / (4.0 * lam)


def _named_points(lam: float) -> dict:
    pts = {"P1": (0.0, 0.0), "P2": (math.pi, 0.0), "P3": (-math.pi, 0.0)}
    if lam > 0:
        pts["Q1"] = (0.5 * math.pi, 1.0 / (2.0 * lam))
    elif lam < 0:
        pts["Q2"] = (-0.5 * math.pi, -1.0 / (2.0 * lam))
    return pts


def classify_singularity(point, lam: float, name: Optional[str] = None) -> SingularityInfo:
    """Jacobian, eigenvalues and stability label at an equilibrium.

    Raises :class:`NotAnEquilibrium` if the field does not vanish at
    ``point`` to within 1e-10.
    """
    theta, x = float(point[0]), float(point[1])
    v = pp_rhs(theta, x, lam)
    if math.hypot(*v) > EQUILIBRIUM_TOL:
        raise NotAnEquilibrium(f"field at {(theta, x)} is {v}, not zero")
    if name is None:
        name = next((k for k, q in _named_points(lam).items()
                     if math.hypot(q[0] - theta, q[1] - x) < 1e-9), "equilibrium")
    jac = jacobian_pp((theta, x), lam)
    mu = eigenvalues_2x2(jac)
    return SingularityInfo(name, (theta, x), jac, mu, stability_from_eigenvalues(mu))


def find_singularities(lam: float) -> list[SingularityInfo]:
    """Equilibria in ``[-pi, pi] x [0, inf)``: P1, P2, P3, plus Q1 or Q2 when ``lam != 0``."""
    return [classify_singularity(pt, lam, name) for name, pt in _named_points(lam).items()]


@dataclass(frozen=True)
class PhaseOrbit:
    """Orbit of the phase-plane field; ``points`` is an ``(N, 2)`` array of ``(theta, x)``."""

    s: np.ndarray
    points: np.ndarray
    status: str
    events: tuple = ()

    @property
    def final(self) -> np.ndarray:
        return self.points[-1]


def trace_trajectory(
    start,
    lam: float,
    s_range=(0.0, 40.0),
    cfg: Optional[IntegrationConfig] = None,
    *,
    x_max: float = 100.0,
) -> PhaseOrbit:
    """Integrate the phase-plane field from ``start = (theta, x)``.

    The orbit is truncated with a ``"boundary"`` event if it leaves the
    half-plane ``x >= 0`` and with an ``"escape"`` event above ``x_max``.
    """
    theta0, x0 = float(start[0]), float(start[1])
    if x0 < 0:
        raise ValueError("phase-plane orbits start in the half-plane x >= 0")
    two_lam = 2.0 * lam
    cos, sin = math.cos, math.sin

    def rhs(s, y):
        c = cos(y[0])
        return np.array((two_lam * y[1] + y[1] * c - sin(y[0]), y[1] * c))

    # a predicate that starts at zero never fires, so orbits on the invariant
    # line x = 0 are only guarded against escape
    terminal = [("boundary", lambda y: y[1]), ("escape", lambda y: x_max - y[1])]
    tr: Trajectory = integrate_adaptive(rhs, (theta0, x0), s_range, cfg, terminal=terminal)
    return PhaseOrbit(np.asarray(tr.s), np.asarray(tr.y), tr.status, tr.events)


def portrait_seeds(lam: float, n_theta: int = 12, n_x: int = 8, x_top: Optional[float] = None):
    """Uniform seed grid over ``[-pi, pi] x (0, x_top]``.

    ``x_top`` defaults to ``3 / (2 |lam|)``, or 3 when ``lam = 0``.
    """
    if x_top is None:
        x_top = 3.0 / (2.0 * abs(lam)) if lam else 3.0
    th = np.linspace(-math.pi, math.pi, n_theta)
    xs = x_top * np.arange(1, n_x + 1) / n_x
    return [(float(a), float(b)) for b in xs for a in th]


PORTRAIT_CONFIG = IntegrationConfig(rel_tol=1e-7, abs_tol=1e-7, max_step=0.1)


def phase_portrait(lam: float, s_range=(0.0, 20.0), cfg=None, *, n_theta: int = 12,
                   n_x: int = 8, x_top: Optional[float] = None) -> list[PhaseOrbit]:
    """Orbits from :func:`portrait_seeds`, at plotting accuracy by default.

    Orbits stop once ``x`` exceeds four times the seed window.
    """
    if x_top is None:
        x_top = 3.0 / (2.0 * abs(lam)) if lam else 3.0
    cfg = cfg or PORTRAIT_CONFIG
    return [trace_trajectory(seed, lam, s_range, cfg, x_max=4.0 * x_top)
            for seed in portrait_seeds(lam, n_theta, n_x, x_top)]
