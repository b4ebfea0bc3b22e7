"""Exception types raised by the library."""


class RkhsError(Exception):
    """Base class for all library errors."""


class KernelDomainError(RkhsError, ValueError):
    """A point lies outside the domain of the kernel."""


class SingularDiagonalError(KernelDomainError):
    """A kernel that is infinite on the diagonal was evaluated there."""


class DimensionError(RkhsError, ValueError):
    """Array shapes do not agree."""


class NestingError(RkhsError, ValueError):
    """A chain of point sets is not nested."""


class ZeroMeasureError(RkhsError, ValueError):
    """A measure with zero self-pairing was given where a nonzero one is needed."""


class ConfigError(RkhsError, ValueError):
    """A job configuration failed validation."""
