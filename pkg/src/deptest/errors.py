"""Exception hierarchy shared by every module."""


class DeptestError(Exception):
    """Base class for all package errors."""


class InvalidInputError(DeptestError, ValueError):
    """Malformed or out-of-domain input (non-finite values, bad shapes, bad flags)."""


class InsufficientSampleError(InvalidInputError):
    """The sample is too small for the requested statistic."""


class DegenerateInputError(DeptestError, ValueError):
    """A statistic is undefined on this input (e.g. zero marginal dispersion)."""


class CalibrationMissingError(DeptestError, LookupError):
    """No critical value is available for the requested (statistic, n, alpha)."""


class SchemaError(DeptestError, ValueError):
    """A persisted artifact does not match its schema.

    The message names the offending field.
    """
