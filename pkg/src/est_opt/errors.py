"""Exception types raised by the library and mapped to CLI exit codes."""


class EstError(Exception):
    """Base class for all library errors."""


class DomainError(EstError, ValueError):
    """An argument lies outside the domain of the operation."""


class NotConvergedError(EstError):
    """An iterative procedure exhausted its budget.

    ``best`` carries the best iterate found (or ``None``).
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class QuadratureNotConvergedError(NotConvergedError):
    pass


class NoInteriorStationaryPointError(EstError):
    pass


class InfeasibleError(EstError):
    """A converged rate pair violates ``0 < r_e < r_b``."""
