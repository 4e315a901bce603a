"""Exception hierarchy shared by every module.

Each class carries the CLI exit code it maps to, so drivers can translate
failures without a lookup table.
"""


class KdvGevreyError(Exception):
    exit_code = 2


class InputError(KdvGevreyError, ValueError):
    """Malformed or non-finite input data."""


class ConfigError(KdvGevreyError, ValueError):
    exit_code = 1


class RepresentationError(KdvGevreyError, ValueError):
    """Spectral coefficients do not describe a real field."""


class OverflowGuardError(KdvGevreyError, OverflowError):
    """An exponential weight would exceed the configured guard."""


class DomainError(KdvGevreyError, ValueError):
    pass


class EstimatorUndefinedError(KdvGevreyError):
    """Too few spectral modes to fit a decay rate."""


class InstabilityError(KdvGevreyError, FloatingPointError):
    exit_code = 3

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class NoContractionError(KdvGevreyError):
    exit_code = 3

    def __init__(self, message, delta=None):
        super().__init__(message)
        self.delta = delta


class FitUndefinedError(KdvGevreyError):
    pass


class GridMismatchError(KdvGevreyError, ValueError):
    pass


class RegionDegeneracyError(KdvGevreyError, ValueError):
    pass


class PreconditionError(KdvGevreyError, ValueError):
    pass


class BudgetError(KdvGevreyError):
    pass


class CalibrationError(KdvGevreyError):
    exit_code = 4
