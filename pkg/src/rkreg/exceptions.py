"""Exception types raised by rkreg."""


class RkregError(ValueError):
    """Base class for all rkreg-specific errors."""


class ContractionViolation(RkregError):
    """A stepsize-kernel combination would push an update out of the convex regime."""


class InvalidStepsize(RkregError):
    """A density stepsize exceeds 1, breaking the convex-combination recursion."""


class DegenerateDenominator(RkregError):
    """A kernel weight sum or density estimate is zero where a ratio is needed."""


class DivergentXi(RkregError):
    """The inverse linear-rate limit of a stepsize sequence diverges."""


class ZeroDensity(RkregError):
    """The design density vanishes at a point where a constant is requested."""


class ConditionViolated(RkregError):
    """A limit-theorem side condition fails for the supplied configuration."""


class PoleAtDenominator(RkregError):
    """The variance factor is evaluated at or beyond its pole."""
