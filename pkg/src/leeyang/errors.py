"""Exception types raised across the package.

Every error is a ``ValueError`` subclass so callers that only care about bad
input can catch one thing.
"""


class LeeYangError(ValueError):
    """Base class for all package errors."""


# polycore
class OverlappingSupport(LeeYangError):
    pass


class SameVariable(LeeYangError):
    pass


class LengthMismatch(LeeYangError):
    pass


class TooManyVariables(LeeYangError):
    pass


# measures
class DegenerateMeasure(LeeYangError):
    pass


class InvalidMeasure(LeeYangError):
    pass


# gibbs
class TooManySites(LeeYangError):
    pass


class EmptySupport(LeeYangError):
    pass


class NonSpinHalf(LeeYangError):
    pass


class NoCouplings(LeeYangError):
    pass


# analysis
class ZeroPolynomial(LeeYangError):
    pass


class NotHalfPlaneFree(LeeYangError):
    pass


class VanishingInDisk(LeeYangError):
    pass


class PoleAtMinusOne(LeeYangError):
    pass


class NotInRightHalfPlane(LeeYangError):
    pass


class OutsideDisk(LeeYangError):
    pass


# correlations / ursell
class VanishingPartition(LeeYangError):
    """The partition function (or a denominator correlation) is numerically zero."""


class WindowTooSmall(LeeYangError):
    pass


class RangeViolation(LeeYangError):
    pass
