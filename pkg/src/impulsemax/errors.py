"""Typed errors and warnings shared across the package."""


class ImpulseError(Exception):
    """Base class for all package errors."""


class MalformedConfig(ImpulseError):
    """Configuration text is not valid JSON or misses required keys."""


class InvalidParameter(ImpulseError):
    """A parameter violates its domain (wrong sign, weights not summing to one, ...)."""


class IntegrabilityViolation(ImpulseError):
    """A reward grows too fast for the discount rate (e.g. exponent with Psi(b) >= r)."""


class DomainError(ImpulseError):
    """Evaluation outside the domain of a model quantity."""


class UnsupportedModel(ImpulseError):
    """The requested quantity is undefined for this process/reward combination."""


class NoRoot(ImpulseError):
    """A root could not be bracketed (non-spectrally-negative or degenerate model)."""


class Divergent(ImpulseError):
    """An expectation diverges (integrand grows at least as fast as the tail decays)."""


class UnsupportedVariant(ImpulseError):
    """The operation is not available for this law variant."""


class ShapeViolation(ImpulseError):
    """The representing function does not have the required one-dip shape."""


class RewardAtZeroPositive(ImpulseError):
    """g(0) > 0 makes the restart value infinite; the problem is ill-posed."""


class InconsistentMetadata(ImpulseError):
    """Declared shape metadata contradicts sampled function values."""


class OutOfRange(ImpulseError):
    """Argument outside the documented bracket (e.g. c not in [0, c*])."""


class NoSignChange(ImpulseError):
    """The fixed-point residual does not change sign on [0, c*]."""


class Assumption2Violated(ImpulseError):
    """The below-threshold negativity condition failed the numerical audit."""


class InfiniteValueRegime(ImpulseError):
    """The value function is +infinity everywhere; pointwise evaluation is undefined."""


class AuditFailed(ImpulseError):
    """A verification inequality failed beyond tolerance at some grid point."""


class ResolutionTooCoarse(ImpulseError):
    """Simulation step too coarse to resolve the requested threshold."""


class UnstableStep(UserWarning):
    """dt exceeds 0.01/r; discretization error may dominate."""
