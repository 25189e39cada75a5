"""Error types shared across the package."""


class WeakGammaError(Exception):
    """Base class for every error raised by this package."""


class DomainError(WeakGammaError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ModelError(WeakGammaError, ValueError):
    """A measure model is ill-posed (non-integrable, degenerate gap, bad flags)."""


class NumericError(WeakGammaError, ArithmeticError):
    """A numerical routine failed to converge or produced inconsistent output."""


class SamplingError(WeakGammaError, RuntimeError):
    """A Monte Carlo sampler did not reach an acceptable state."""
