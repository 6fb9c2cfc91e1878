"""Limiting search-cost law of the move-to-front rule under random popularities."""

from .errors import ConvergenceError, DegenerateInputError, DomainError, SizeError
from .limit_law import LimitLaw, cdf, density, laplace_limit, moment, quantile
from .weights import WeightFamily, dirac, gamma, geometric, mixture, poisson

__all__ = [
    "ConvergenceError",
    "DegenerateInputError",
    "DomainError",
    "SizeError",
    "LimitLaw",
    "WeightFamily",
    "cdf",
    "density",
    "dirac",
    "gamma",
    "geometric",
    "laplace_limit",
    "mixture",
    "moment",
    "poisson",
    "quantile",
]
