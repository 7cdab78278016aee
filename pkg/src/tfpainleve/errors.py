"""Exception hierarchy shared by the solvers."""


class SolverError(Exception):
    """Base class for numerical failures raised by this package."""


class DomainError(SolverError, ValueError):
    """Argument outside the domain where a formula is defined."""


class PivotBreakdown(SolverError):
    pass


class NonFiniteState(SolverError):
    """An explicit integrator produced a non-finite state.

    ``times`` and ``states`` hold the trajectory up to the last finite state.
    """

    def __init__(self, message, times=None, states=None):
        super().__init__(message)
        self.times = times
        self.states = states


class NoBracket(SolverError):
    pass


class NewtonStall(SolverError):
    pass


class NonPositive(SolverError):
    pass


class PositivityViolation(SolverError):
    pass


class Singular(SolverError):
    pass


class OutOfRange(SolverError):
    pass


class Breakdown(SolverError):
    """The Thomas-Fermi construction cannot reach x = 0 for this eta."""

    def __init__(self, message, eta=None):
        super().__init__(message)
        self.eta = eta


class NonPositiveNu(SolverError):
    pass


class PositivityLost(SolverError):
    pass


class NotConverged(SolverError):
    pass


class WindowTooSmall(SolverError):
    pass


class GridMismatch(SolverError):
    pass
