"""Exception types shared across the package."""


class ShadowLabError(Exception):
    """Base class for all package errors."""


class DegenerateCoefficients(ShadowLabError, ValueError):
    pass


class InvalidParameter(ShadowLabError, ValueError):
    pass


class IdentityMap(ShadowLabError, ValueError):
    pass


class NotSelfMap(ShadowLabError, ValueError):
    pass


class PoleEvaluation(ShadowLabError, ZeroDivisionError):
    pass


class OutsideDisk(ShadowLabError, ValueError):
    pass


class PoleTooClose(ShadowLabError, ValueError):
    pass


class WrongClass(ShadowLabError, ValueError):
    pass


class ZeroVector(ShadowLabError, ValueError):
    pass


class ZeroAtFixedPoint(ShadowLabError, ValueError):
    pass


class NotInN(ShadowLabError, ValueError):
    """Input to the backward operator does not vanish on the M cells."""


class NotPseudoOrbit(ShadowLabError, ValueError):
    pass


class NoConvergenceWarning(UserWarning):
    pass


class IllConditionedWarning(UserWarning):
    pass
