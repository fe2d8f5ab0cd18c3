"""Exception hierarchy shared by all fracexp modules."""

from __future__ import annotations


class FracError(Exception):
    """Base class for every error raised by fracexp."""


class DomainError(FracError, ValueError):
    """An argument lies outside the domain of an operation."""


class AccuracyError(FracError, ArithmeticError):
    """A requested tolerance could not be met within the work budget."""


class IntegrationError(FracError, RuntimeError):
    """An ODE integration stopped before reaching its end point."""

    def __init__(self, message: str, t_fail: float | None = None):
        super().__init__(message)
        self.t_fail = t_fail


class IllPosedError(FracError, ArithmeticError):
    """A boundary value problem produced a singular shooting system."""


class NonConvergenceError(FracError, ArithmeticError):
    """An iterative procedure hit its iteration cap.

    ``last_norm`` holds the last successive-difference norm observed.
    """

    def __init__(self, message: str, last_norm: float | None = None):
        super().__init__(message)
        self.last_norm = last_norm


class UnsupportedProblemError(FracError, NotImplementedError):
    """The problem is outside what the chosen method can handle."""


class InputFormatError(FracError, ValueError):
    """Malformed user input: a CSV row, a JSON document or an expression.

    ``location`` is a row number or character offset when one is known.
    """

    def __init__(self, message: str, location: int | None = None):
        super().__init__(message)
        self.location = location
