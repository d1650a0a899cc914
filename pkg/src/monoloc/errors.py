"""Exception types raised across the package."""


class MonolocError(Exception):
    """Base class for all package errors."""


class RationalAlphaError(MonolocError, ValueError):
    """The frequency became rational within the requested expansion depth."""


class CapacityError(MonolocError, OverflowError):
    """A convergent denominator left the supported integer range."""


class PrecisionError(MonolocError):
    """A structural check failed because working precision ran out."""


class PhaseCollisionError(PrecisionError):
    """Two orbit points coincide to working precision."""


class LipschitzViolation(MonolocError, ValueError):
    """A potential violates its declared two-sided Lipschitz bounds."""

    def __init__(self, msg, x=None, y=None):
        super().__init__(msg)
        self.x = x
        self.y = y


class ConditioningError(MonolocError, ArithmeticError):
    """Energy too close to an eigenvalue of the box for a stable Green's function."""

    def __init__(self, msg, distance=None):
        super().__init__(msg)
        self.distance = distance


class BracketError(MonolocError):
    """Eigenvalue bracketing produced the wrong number of roots."""


class ConfigError(MonolocError, ValueError):
    """Invalid experiment configuration."""
