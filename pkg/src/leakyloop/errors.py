"""Exception hierarchy shared by all modules."""


class LeakyLoopError(Exception):
    """Base class for library errors."""


class ArgumentError(LeakyLoopError, ValueError):
    """An argument violates the documented preconditions."""


class NonClosableError(LeakyLoopError):
    """Closure projection failed; the deformation is too large."""


class PreconditionError(LeakyLoopError):
    """Input object is valid but unsuitable for the requested operation."""


class ConvergenceError(LeakyLoopError):
    """An iterative method ran out of budget."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class NoBoundStateError(LeakyLoopError):
    """Bracket expansion could not locate ``lambda_max = 1``.

    The true operator always has a bound state, so this signals a grid too
    coarse for the coupling.
    """


class SingularChordError(LeakyLoopError):
    """A zero chord was met while evaluating a negative power."""


class OnSupportError(LeakyLoopError):
    """Evaluation point lies on the interaction support."""
