"""Exception hierarchy shared by all fracwave modules."""


class FracwaveError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(FracwaveError):
    """A run setup is invalid (bad config value, degenerate geometry, empty cloud)."""


class DomainError(FracwaveError):
    """An argument lies outside the mathematical domain of an operation."""


class CoverageError(FracwaveError):
    """A query point is outside the coverage of a velocity field."""


class ConditioningError(FracwaveError):
    """A dense linear system is singular or too ill-conditioned to trust.

    Attributes
    ----------
    rcond : float or None
        Reciprocal condition number estimate of the offending matrix,
        when one could be computed.
    """

    def __init__(self, message, rcond=None):
        super().__init__(message)
        self.rcond = rcond


class InstabilityError(FracwaveError):
    """Time marching produced non-finite values.

    Attributes
    ----------
    step_index : int
        Time layer index at which the blow-up was detected.
    max_magnitude : float
        Largest coefficient magnitude seen at the failing step.
    """

    def __init__(self, message, step_index, max_magnitude):
        super().__init__(message)
        self.step_index = step_index
        self.max_magnitude = max_magnitude
