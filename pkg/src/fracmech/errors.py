"""Exception hierarchy shared by all solvers."""


class FracmechError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(FracmechError, ValueError):
    """An input violates the invariants of its domain type."""


class PoleError(ParameterError):
    """A function was evaluated at one of its poles."""


class NumericalError(FracmechError, RuntimeError):
    """A numerical procedure failed to reach its tolerance.

    ``module`` and ``parameter`` name the place where the failure happened so
    that front ends can report it precisely.
    """

    def __init__(self, message: str, *, module: str = "", parameter: str = "") -> None:
        super().__init__(message)
        self.module = module
        self.parameter = parameter


class SeriesConvergenceError(NumericalError):
    """A truncated series did not reach its tolerance within the term budget."""


class SingularSystemError(NumericalError):
    """A triangular system has a vanishing leading coefficient."""


class BracketError(NumericalError):
    """A root could not be bracketed on the interval where it must lie."""
