"""Exception hierarchy.

Numerical failures derive from :class:`NumericalError` so that the command
line front end can map them to a single exit status.
"""

from __future__ import annotations


class FracAiryError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(FracAiryError, ValueError):
    """Invalid user input: parameters outside their domain, unknown keys."""


class OrderOutOfRange(ConfigError):
    """A fractional order was not in the open interval (0, 1)."""


class DomainError(ConfigError):
    """An argument is outside the domain of the function being evaluated."""


class SectorViolation(DomainError):
    """The argument lies outside the sector where an estimate is valid."""


class IncompatibleData(ConfigError):
    """Boundary data do not vanish at t = 0 (corner compatibility)."""


class CoverageError(FracAiryError):
    """A verification report is missing required checks."""


class Unsupported(FracAiryError):
    """The requested combination of options has no defined result."""


class NumericalError(FracAiryError, ArithmeticError):
    """Base class for failures of a numerical procedure."""


class NonConvergence(NumericalError):
    """A series or iteration did not reach its tolerance within its cap."""


class NoConvergence(NonConvergence):
    """Fixed-point iteration did not converge.

    Carries the last observed contraction ratio.
    """

    def __init__(self, message: str, ratio: float = float("nan")) -> None:
        super().__init__(message)
        self.ratio = ratio


class QuadratureFailure(NumericalError):
    """A quadrature did not meet its tolerance."""


class GridTooCoarse(NumericalError):
    """A refinement-based error estimate exceeded the requested tolerance."""


class SingularMatrix(NumericalError):
    """The instantaneous coefficient matrix of a Volterra system is singular."""


class Instability(NumericalError):
    """Values exceeded the overflow guard during time marching."""


class SingularPoint(NumericalError):
    """Evaluation requested exactly at a point where the value is undefined."""
