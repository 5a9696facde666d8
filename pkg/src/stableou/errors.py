"""Exception types shared across the package.

The split matters for the CLI: validation problems (bad parameters, bad
shapes, degenerate data) exit with code 1, numerical-accuracy failures
with code 2.
"""


class StableOUError(Exception):
    """Base class for all package errors."""


class ParameterError(StableOUError, ValueError):
    """A parameter is outside its documented domain."""


class ShapeError(StableOUError, ValueError):
    """Array arguments have inconsistent or unsupported shapes."""


class DegenerateDataError(StableOUError, ValueError):
    """Data is degenerate for the requested operation (zero norms, singular Gram matrix, ...)."""


class PoleError(StableOUError, ValueError):
    """A special function was evaluated at one of its poles."""


class UnstableRegimeError(StableOUError, ValueError):
    """The requested quantity is infinite because (p, alpha) falls in the unstable regime."""


class AccuracyError(StableOUError, ArithmeticError):
    """A numerical routine could not reach its accuracy target.

    ``estimate`` carries the best value achieved so callers can inspect it.
    """

    def __init__(self, message: str, estimate: float | None = None):
        super().__init__(message)
        self.estimate = estimate
