"""Numerical companion for Gevrey-class analyticity of periodic KdV flows."""

from . import data
from .errors import (BudgetError, CalibrationError, ConfigError, DomainError,
                     EstimatorUndefinedError, FitUndefinedError, GridMismatchError, InputError,
                     InstabilityError, KdvGevreyError, NoContractionError, OverflowGuardError,
                     PreconditionError, RegionDegeneracyError, RepresentationError)
from .gevrey import GevreyParams, RadiusEstimate, embedding_constant, estimate_radius, gevrey_norm
from .solver import SolverConfig, Trajectory, evolve, picard_iterate, step
from .spectral import GridSpec, RealField, SpectralField, forward, inverse

__version__ = "0.1.0"

__all__ = [
    "BudgetError", "CalibrationError", "ConfigError", "DomainError", "EstimatorUndefinedError",
    "FitUndefinedError", "GridMismatchError", "InputError", "InstabilityError", "KdvGevreyError",
    "NoContractionError", "OverflowGuardError", "PreconditionError", "RegionDegeneracyError",
    "RepresentationError", "GevreyParams", "RadiusEstimate", "embedding_constant",
    "estimate_radius", "gevrey_norm", "SolverConfig", "Trajectory", "evolve", "picard_iterate",
    "step", "GridSpec", "RealField", "SpectralField", "forward", "inverse", "data",
]
