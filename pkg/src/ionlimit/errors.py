"""Exception types raised across the package."""


class InvalidInputError(ValueError):
    """Argument outside the documented domain (non-finite, negative time, ...)."""


class ZeroPulseError(InvalidInputError):
    """Pulse shape vanishes identically on its support."""


class UnsupportedDomainError(ValueError):
    """Special-function parameters outside the implemented restriction."""


class AccuracyError(RuntimeError):
    """Quadrature did not reach the requested accuracy.

    Attributes
    ----------
    estimate : float
        Last absolute error estimate (difference between successive refinements).
    """

    def __init__(self, message, estimate):
        super().__init__(f"{message} (error estimate {estimate:.3e})")
        self.estimate = estimate


class NoBoundStateError(RuntimeError):
    pass


class GridTooSmallError(RuntimeError):
    pass


class BoundaryContaminationError(RuntimeError):
    pass


class DisplacementExceedsGridError(RuntimeError):
    pass


class WrapAroundError(RuntimeError):
    pass


class NormError(ValueError):
    pass


class RegimeError(ValueError):
    """Operation requires a different pulse regime."""


class PartitionError(ValueError):
    pass
