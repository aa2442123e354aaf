"""Exception types shared across the toolkit."""


class RobustSpecError(Exception):
    """Base class for all toolkit errors."""


class ParameterError(RobustSpecError):
    """A constructor or operation parameter is outside its valid range."""


class DomainError(RobustSpecError):
    """An evaluation point lies outside the function's domain."""


class AbsoluteContinuityError(RobustSpecError):
    """PMF supports are incompatible with the requested density ratios."""


class NotPositiveDefiniteError(RobustSpecError):
    """A covariance factorization failed even after jitter escalation."""


class UniquenessViolationError(RobustSpecError):
    """Two distinct set members both pass the dominated-element test."""


class EstimationInfeasibleError(RobustSpecError):
    """Every Monte Carlo estimate in a run was censored."""


class ConfigError(RobustSpecError):
    """An experiment configuration document violates its schema."""
