"""Exception types raised across the package."""


class HCWalkError(Exception):
    """Base class for all package errors."""


class SizeExceeded(HCWalkError):
    """An explicit graph would exceed the vertex guard."""


class ZeroLegs(HCWalkError, ValueError):
    pass


class UnsupportedLoops(HCWalkError, ValueError):
    pass


class SingularSystem(HCWalkError):
    """The first-passage system has no unique solution (target unreachable)."""


class NonUnitary(HCWalkError):
    pass


class DarkStateDetected(HCWalkError):
    """The initial state overlaps an eigenvector of the measured step that
    never reaches the target, so the hit probability does not sum to one."""


class MaxStepsExceeded(HCWalkError):
    """Raised when a measured walk runs out of steps.

    The partial :class:`~hcwalk.reduced.HittingSummary` is attached as
    ``summary``.
    """

    def __init__(self, message, summary=None):
        super().__init__(message)
        self.summary = summary


class NoPlateau(HCWalkError):
    def __init__(self, message, summary=None):
        super().__init__(message)
        self.summary = summary


class ConfigError(HCWalkError, ValueError):
    pass
