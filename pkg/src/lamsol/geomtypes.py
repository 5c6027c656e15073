"""Value types shared by the integration, classification and surface modules.

Angles are radians and the tangent angle ``theta`` is always kept as a
continuous lift along a curve; it is never reduced modulo 2*pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Any, Mapping, NamedTuple, Optional

import numpy as np


# ---------------------------------------------------------------------------
# errors

class SolitonError(Exception):
    """Base class for every failure raised by this package."""

    subsystem = "lamsol"

    def __init__(self, *args, subsystem: Optional[str] = None):
        super().__init__(*args)
        if subsystem is not None:
            self.subsystem = subsystem


class InvalidDensityVector(SolitonError, ValueError):
    subsystem = "geomtypes"


class DegenerateDensity(SolitonError, ValueError):
    """The density vector has no component along the profile plane normal."""

    subsystem = "geomtypes"


class BranchDomain(SolitonError, ValueError):
    subsystem = "cylindrical"


class AxisSingularity(SolitonError, ValueError):
    subsystem = "rotational"


class NotAnEquilibrium(SolitonError, ValueError):
    subsystem = "phaseplane"


class IntegrationStalled(SolitonError, RuntimeError):
    """Step size underflow. ``s`` and ``state`` hold the last accepted point."""

    subsystem = "integrate"

    def __init__(self, message: str, s: float, state: np.ndarray):
        super().__init__(message)
        self.s = s
        self.state = np.asarray(state, dtype=float)


class BudgetExceeded(SolitonError, RuntimeError):
    subsystem = "integrate"


# ---------------------------------------------------------------------------
# problem instance

_UNIT_SLACK = 1e-15


@dataclass(frozen=True)
class SolitonParams:
    """Constant ``lam`` and unit density vector ``v`` of ``2H = 2 lam + <N, v>``."""

    lam: float
    v: tuple[float, float, float]

    def __post_init__(self):
        v = tuple(float(c) for c in self.v)
        if len(v) != 3:
            raise InvalidDensityVector(f"density vector must have 3 components, got {len(v)}")
        if abs(math.sqrt(sum(c * c for c in v)) - 1.0) > 1e-12:
            raise InvalidDensityVector(f"density vector {v} is not a unit vector; use make_params")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def v3(self) -> float:
        return self.v[2]

    def flipped(self) -> "SolitonParams":
        """Parameters seen by the same surface with the opposite unit normal."""
        return SolitonParams(-self.lam, self.v)


def make_params(lam: float, v=(0.0, 0.0, 1.0)) -> SolitonParams:
    """Build :class:`SolitonParams`, normalizing ``v`` to unit length.

    A vector that is already unit (to within rounding) is kept bit-for-bit so
    that normalizing twice gives exactly the same value as normalizing once.
    """
    vec = np.asarray(v, dtype=float).reshape(-1)
    if vec.shape != (3,) or not np.all(np.isfinite(vec)):
        raise InvalidDensityVector(f"density vector must be 3 finite numbers, got {v!r}")
    norm = math.sqrt(float(vec @ vec))
    if norm == 0.0:
        raise InvalidDensityVector("density vector must be nonzero")
    if abs(norm - 1.0) > _UNIT_SLACK:
        vec = vec / norm
    return SolitonParams(float(lam), tuple(float(c) for c in vec))


# ---------------------------------------------------------------------------
# states and curves

class CylState(NamedTuple):
    s: float
    y: float
    z: float
    theta: float


class RotState(NamedTuple):
    s: float
    x: float
    z: float
    theta: float


class TransState(NamedTuple):
    y: float
    g: float
    gp: float


class CurveKind(str, Enum):
    Cylindrical = "Cylindrical"
    Rotational = "Rotational"
    TranslationG = "TranslationG"


class Event(NamedTuple):
    s: float
    tag: Any
    state: np.ndarray


_COLUMNS = {
    CurveKind.Cylindrical: ("y", "z", "theta"),
    CurveKind.Rotational: ("x", "z", "theta"),
    CurveKind.TranslationG: ("g", "gp"),
}


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ProfileCurve:
    """Generating curve sampled along its parameter.

    ``s`` is strictly increasing. ``states[i]`` holds the kind's columns
    (see :attr:`columns`) and ``derivs[i]`` their derivatives with respect to
    ``s``; together they define a cubic Hermite dense output.
    """

    kind: CurveKind
    params: SolitonParams
    s: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    events: tuple = ()
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", CurveKind(self.kind))
        object.__setattr__(self, "s", _frozen(self.s))
        object.__setattr__(self, "states", _frozen(self.states))
        object.__setattr__(self, "derivs", _frozen(self.derivs))
        object.__setattr__(self, "events", tuple(self.events))
        object.__setattr__(self, "meta", MappingProxyType(dict(self.meta)))
        if self.states.shape != self.derivs.shape or self.states.shape[0] != self.s.shape[0]:
            raise ValueError("s, states and derivs must have matching lengths")
        if self.s.size > 1 and not np.all(np.diff(self.s) > 0):
            raise ValueError("curve samples must be strictly increasing in s")

    def __eq__(self, other):
        if not isinstance(other, ProfileCurve):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.params == other.params
            and np.array_equal(self.s, other.s)
            and np.array_equal(self.states, other.states)
            and np.array_equal(self.derivs, other.derivs)
            and dict(self.meta) == dict(other.meta)
        )

    __hash__ = None

    def __len__(self):
        return self.s.size

    @property
    def columns(self) -> tuple[str, ...]:
        return _COLUMNS[self.kind]

    def column(self, name: str) -> np.ndarray:
        return self.states[:, self.columns.index(name)]

    @property
    def samples(self) -> list:
        if self.kind is CurveKind.Cylindrical:
            return [CylState(s, *row) for s, row in zip(self.s.tolist(), self.states.tolist())]
        if self.kind is CurveKind.Rotational:
            return [RotState(s, *row) for s, row in zip(self.s.tolist(), self.states.tolist())]
        return [TransState(s, *row) for s, row in zip(self.s.tolist(), self.states.tolist())]

    @property
    def planar(self) -> np.ndarray:
        """(N, 2) array of the curve's points in its own plane."""
        if self.kind is CurveKind.TranslationG:
            return np.column_stack([self.s, self.states[:, 0]])
        return self.states[:, :2].copy()

    def __call__(self, s) -> np.ndarray:
        """Hermite dense output at ``s`` (scalar or array)."""
        from .integrate import hermite_eval

        return hermite_eval(self.s, self.states, self.derivs, s)

    def events_tagged(self, tag) -> list[Event]:
        return [e for e in self.events if e.tag == tag]


# ---------------------------------------------------------------------------
# reports

@dataclass(frozen=True)
class RegimeReport:
    """Outcome of a classifier: a regime label plus measured geometric features."""

    regime: str
    lam: float
    v3: float
    theta0: Optional[float] = None
    self_intersection_count: int = 0
    period: Optional[tuple[float, float]] = None
    asymptote_slopes: Optional[tuple[float, float]] = None
    convex: bool = False
    embedded: bool = False
    graph_over_base: bool = False
    symmetry_axis: Optional[float] = None
    residual: Optional[Mapping[str, float]] = None
    features: Mapping[str, Any] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        def clean(x):
            if isinstance(x, Enum):
                return x.value
            if isinstance(x, (np.floating, np.integer, np.bool_)):
                return x.item()
            if isinstance(x, (tuple, list)):
                return [clean(i) for i in x]
            if isinstance(x, Mapping):
                return {str(k): clean(v) for k, v in x.items()}
            if isinstance(x, float) and not math.isfinite(x):
                return None
            return x

        return {
            "regime": clean(self.regime),
            "lambda": self.lam,
            "v3": self.v3,
            "theta0": self.theta0,
            "self_intersection_count": int(self.self_intersection_count),
            "period": clean(self.period),
            "asymptote_slopes": clean(self.asymptote_slopes),
            "convex": bool(self.convex),
            "embedded": bool(self.embedded),
            "graph_over_base": bool(self.graph_over_base),
            "symmetry_axis": self.symmetry_axis,
            "residual": clean(self.residual),
            "features": clean(self.features),
        }


class Stability(str, Enum):
    SaddleHyperbolic = "SaddleHyperbolic"
    StableNode = "StableNode"
    StableImproperNode = "StableImproperNode"
    StableSpiral = "StableSpiral"
    UnstableNode = "UnstableNode"
    UnstableImproperNode = "UnstableImproperNode"
    UnstableSpiral = "UnstableSpiral"


@dataclass(frozen=True)
class SingularityInfo:
    name: str
    location: tuple[float, float]
    jacobian: tuple[tuple[float, float], tuple[float, float]]
    eigenvalues: tuple[complex, complex]
    stability: Stability

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "theta": self.location[0],
            "x": self.location[1],
            "jacobian": [list(row) for row in self.jacobian],
            "eigenvalues": [[mu.real, mu.imag] for mu in self.eigenvalues],
            "stability": self.stability.value,
        }


@dataclass(frozen=True, eq=False)
class SurfaceGrid:
    """Parametric surface sampled on a uniform ``(s, t)`` grid.

    Every field array is indexed ``[i_s, i_t]``; ``valid`` marks the samples
    whose normal and mean curvature are meaningful.
    """

    s: np.ndarray
    t: np.ndarray
    positions: np.ndarray
    normals: np.ndarray
    mean_curvature: np.ndarray
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    W: np.ndarray
    valid: np.ndarray
    kind: Optional[CurveKind] = None
    params: Optional[SolitonParams] = None

    def __post_init__(self):
        for name in ("s", "t", "positions", "normals", "mean_curvature", "E", "F", "G", "W"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        valid = np.array(self.valid, dtype=bool)
        valid.setflags(write=False)
        object.__setattr__(self, "valid", valid)

    @property
    def shape(self) -> tuple[int, int]:
        return self.positions.shape[:2]

    @classmethod
    def from_positions(cls, s, t, positions, **kw) -> "SurfaceGrid":
        """Grid with positions only; the remaining fields are NaN."""
        positions = np.asarray(positions, dtype=float)
        ns, nt = positions.shape[:2]
        nan = np.full((ns, nt), np.nan)
        return cls(s, t, positions, np.full((ns, nt, 3), np.nan), nan, nan, nan, nan, nan,
                   np.ones((ns, nt), dtype=bool), **kw)
