"""Exception types shared across the package."""


class UHermiteError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(UHermiteError, ValueError):
    """An argument lies outside the domain of the operation."""


class SolverError(UHermiteError, ArithmeticError):
    """An iterative solver did not reach its residual tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class CertificationError(UHermiteError, ArithmeticError):
    """Root isolation could not certify the expected number of roots."""

    def __init__(self, message, found=None, expected=None):
        super().__init__(message)
        self.found = found
        self.expected = expected


class PoleError(UHermiteError, ZeroDivisionError):
    """A logarithm was requested at (numerically) a zero of the argument."""


class QuadratureError(UHermiteError, ArithmeticError):
    """Numerical integration failed to converge."""
