"""Exception hierarchy shared by all modules."""


class WignerError(Exception):
    """Base class for numerical failures raised by this package."""


class PoleError(WignerError, ZeroDivisionError):
    """Evaluation requested at (or numerically on top of) a pole."""


class DomainError(WignerError, ValueError):
    """Argument outside the domain of the function."""


class NotPositiveDefinite(WignerError, ValueError):
    """Cholesky factorization hit a nonpositive pivot."""


class NoConvergence(WignerError):
    """Refinement budget exhausted before reaching the tolerance.

    The best available estimate is attached as ``result``.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class CrossCheckFailure(WignerError):
    """Two independent routes to the same quantity disagree."""


class BudgetExceeded(WignerError):
    """An enumeration would exceed the configured point budget."""


class TableTooSmall(WignerError, ValueError):
    """A coefficient table is too short for the requested truncation."""


class StripViolation(WignerError, ValueError):
    """Re s lies outside the strip where the requested limit exists."""


class IllConditioned(WignerError):
    """Extrapolation fit matrix is numerically singular."""
