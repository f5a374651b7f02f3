"""Exception hierarchy.

Every computational failure raises a subclass of :class:`IlzError`; the CLI
prints the class name on stderr and exits with status 1.
"""


class IlzError(Exception):
    """Base class for all library errors."""


class NotNormalized(IlzError, ValueError):
    pass


class TooSmall(IlzError, ValueError):
    pass


class DimensionMismatch(IlzError, ValueError):
    pass


class PoleAtOne(IlzError, ValueError):
    pass


class PoleAtD(IlzError, ValueError):
    pass


class PoleAtZero(IlzError, ValueError):
    pass


class PoleAtNonPositiveInteger(IlzError, ValueError):
    pass


class DivergentRegion(IlzError, ValueError):
    pass


class NotUnitCovolume(IlzError, ValueError):
    pass


class OutOfAccuracyEnvelope(IlzError, ValueError):
    pass


class UnsupportedField(IlzError, ValueError):
    pass


class InsufficientDecay(IlzError, ValueError):
    pass


class BadSigma(IlzError, ValueError):
    pass


class NoPositiveBound(IlzError, ArithmeticError):
    pass


class Overflow(IlzError, OverflowError):
    pass
