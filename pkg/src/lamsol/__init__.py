"""Numerical toolkit for lambda-translating solitons, surfaces with
``2H = 2 lam + <N, v>``: cylindrical, rotational and translation-type
profiles, their classification, and surface-level verification."""

from .geomtypes import (
    AxisSingularity,
    BranchDomain,
    BudgetExceeded,
    CurveKind,
    CylState,
    DegenerateDensity,
    IntegrationStalled,
    InvalidDensityVector,
    NotAnEquilibrium,
    ProfileCurve,
    RegimeReport,
    RotState,
    SingularityInfo,
    SolitonError,
    SolitonParams,
    Stability,
    SurfaceGrid,
    TransState,
    make_params,
)
from .integrate import IntegrationConfig

__version__ = "0.1.0"
