"""Deep-testing for bivariate independence.

Margin-free features of a bivariate sample (a copula histogram image and a
vector of dependence indicators) are scored by a trained classifier, and the
score is turned into a test by Monte-Carlo calibration under independence.
"""
__version__ = "0.1.0"

from .errors import (
    CalibrationMissingError,
    DegenerateInputError,
    DeptestError,
    InsufficientSampleError,
    InvalidInputError,
    SchemaError,
)
from .sample import BivariateSample, PseudoSample, TiesWarning, ranks, to_pseudo

__all__ = [
    "BivariateSample",
    "CalibrationMissingError",
    "DegenerateInputError",
    "DeptestError",
    "InsufficientSampleError",
    "InvalidInputError",
    "PseudoSample",
    "SchemaError",
    "TiesWarning",
    "__version__",
    "ranks",
    "to_pseudo",
]
