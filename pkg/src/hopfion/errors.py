"""Exception types raised across the package."""


class HopfionError(Exception):
    """Base class for all package errors."""


class AntipodalLog(HopfionError, ValueError):
    pass


class BadDims(HopfionError, ValueError):
    pass


class KindViolation(HopfionError, ValueError):
    pass


class FormatError(HopfionError, ValueError):
    pass


class DegreeError(HopfionError, ValueError):
    pass


class DomainError(HopfionError, ValueError):
    pass


class NotClosed(HopfionError, ValueError):
    pass


class LiftMismatch(HopfionError, ValueError):
    pass


class HarmonicObstruction(HopfionError):
    """A global lift was requested for a field with nonzero primary class."""


class UnwrapInconsistent(HopfionError):
    pass


class IntegralityFailure(HopfionError):
    """Computed integer data is too far from the integers to be trusted."""


class ClassMismatch(HopfionError):
    """Two fields do not share a primary class."""


class GlueFailure(HopfionError):
    pass


class StepFailure(HopfionError):
    pass
