"""Shooting-method toolkit for Neumann problems ``u'' + (lambda a+ - mu a-) g(u) = 0``."""

from .errors import (DomainError, InfeasibleError, NeumannError, NumericalBlowUpError,
                     PreconditionError, RefinementError, SignStructureError,
                     UnsupportedStructureError, ValidationError)
from .integrator import (PlanarState, ProblemDef, Tolerance, Trajectory, integrate,
                         ode_residual, poincare, shoot)
from .nonlinearity import Nonlinearity
from .shooting import (Continuum, IntersectionPoint, ShootingOptions, Solution, SolveResult,
                       build_continuum, find_solutions, intersect, refine, scan_roots, solve,
                       sweep)
from .thresholds import ThresholdParams, ThresholdReport, certify
from .transforms import RadialSpec, periodic_extend, radial_lift, radial_reduce
from .weight import Piece, ScaledWeight, WeightSpec, example_weight

__version__ = "0.1.0"

__all__ = [
    "Continuum", "DomainError", "InfeasibleError", "IntersectionPoint", "NeumannError",
    "Nonlinearity", "NumericalBlowUpError", "Piece", "PlanarState", "PreconditionError",
    "ProblemDef", "RadialSpec", "RefinementError", "ScaledWeight", "ShootingOptions",
    "SignStructureError", "Solution", "SolveResult", "ThresholdParams", "ThresholdReport",
    "Tolerance", "Trajectory", "UnsupportedStructureError", "ValidationError", "WeightSpec",
    "build_continuum", "certify", "example_weight", "find_solutions", "integrate", "intersect",
    "ode_residual", "periodic_extend", "poincare", "radial_lift", "radial_reduce", "refine",
    "scan_roots", "shoot", "solve", "sweep",
]
