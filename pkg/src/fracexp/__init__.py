"""Series approximations of Riemann-Liouville fractional derivatives.

Two families are provided: an expansion in integer-order derivatives and an
expansion through moments of the function, with its higher-order
generalization. On top of them sit tabular differentiation, a fractional
initial value solver and two variational problems reduced to classical
boundary value problems.
"""

from .errors import (
    AccuracyError,
    DomainError,
    FracError,
    IllPosedError,
    InputFormatError,
    IntegrationError,
    NonConvergenceError,
    UnsupportedProblemError,
)
from .expansions import ExpansionSpec, Method, Side, SmoothInput, approximate, evaluate_grid
from .specfun import FracOrder, coeff_table

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "DomainError",
    "ExpansionSpec",
    "FracError",
    "FracOrder",
    "IllPosedError",
    "InputFormatError",
    "IntegrationError",
    "Method",
    "NonConvergenceError",
    "Side",
    "SmoothInput",
    "UnsupportedProblemError",
    "approximate",
    "coeff_table",
    "evaluate_grid",
]
