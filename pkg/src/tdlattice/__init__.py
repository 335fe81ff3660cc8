"""Option pricing with time-dependent r, q and sigma on volatility-adapted lattices."""

from .boundary import ExerciseBoundary
from .btm import (
    LatticeSolution,
    extract_boundary_btm,
    price_btm,
    symmetry_transform,
    theta,
    theta_dual,
)
from .coefficients import (
    CoefficientCurve,
    CoefficientSet,
    ConditionReport,
    check_conditions,
    eval_coefficients,
)
from .contract import OptionSpec
from .eds import (
    GridSolution,
    a_coeff,
    a_coeff_swapped,
    eds_symmetry_residual,
    extract_boundary_eds,
    near_maturity_bounds,
    solve_eds,
    step_operator,
)
from .errors import ConfigError, DomainError, LatticeError, ModelError, ResourceError, StabilityError
from .partition import TimePartition, build_partition, interpolated_dt

__all__ = [
    "CoefficientCurve",
    "CoefficientSet",
    "ConditionReport",
    "ConfigError",
    "DomainError",
    "ExerciseBoundary",
    "GridSolution",
    "LatticeError",
    "LatticeSolution",
    "ModelError",
    "OptionSpec",
    "ResourceError",
    "StabilityError",
    "TimePartition",
    "a_coeff",
    "a_coeff_swapped",
    "build_partition",
    "check_conditions",
    "eds_symmetry_residual",
    "eval_coefficients",
    "extract_boundary_btm",
    "extract_boundary_eds",
    "interpolated_dt",
    "near_maturity_bounds",
    "price_btm",
    "solve_eds",
    "step_operator",
    "symmetry_transform",
    "theta",
    "theta_dual",
]
