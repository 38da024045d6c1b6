"""Exception hierarchy shared by every module."""


class GVarError(Exception):
    """Base class for all package errors."""


class DomainError(GVarError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class RangeError(GVarError, ValueError):
    """Not enough history (or data) for the requested window."""


class DegenerateInputError(GVarError, ValueError):
    """Input has no dispersion (flat window, zero variance)."""


class ConfigurationError(GVarError, ValueError):
    """Invalid configuration, e.g. an unstable grid or a bad CLI option."""


class EvaluationError(GVarError, ValueError):
    """A caller-supplied function returned a non-finite value."""


class AlignmentError(GVarError, ValueError):
    """Forecasts and realized returns do not line up."""


class DataError(GVarError):
    """Input data cannot support the requested fit."""


class IngestionError(DataError):
    """A price file could not be read or produced no usable rows."""


class CalibrationError(GVarError):
    """No candidate estimation window meets the acceptance band."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class FitError(GVarError):
    """Likelihood optimisation failed; ``best`` holds the best-so-far fit."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
