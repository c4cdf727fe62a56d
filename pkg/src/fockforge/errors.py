"""Exception hierarchy shared by all fockforge modules."""


class FockForgeError(Exception):
    """Base class for every error raised by this package."""


class IndexOutOfRange(FockForgeError, IndexError):
    pass


class NonConvergentTail(FockForgeError, ValueError):
    pass


class DimensionTooSmall(FockForgeError, ValueError):
    pass


class DimensionMismatch(FockForgeError, ValueError):
    pass


class OutsideDomain(FockForgeError, ValueError):
    pass


class SeriesNotConverged(FockForgeError, ValueError):
    pass


class TailTooHeavy(FockForgeError, ValueError):
    pass


class FormMismatch(FockForgeError, ValueError):
    pass


class MomentMatrixNotPositive(FockForgeError, ValueError):
    pass


class OrderTooLarge(FockForgeError, ValueError):
    pass


class QuadratureError(FockForgeError, ArithmeticError):
    """Constructed nodes/weights violate a moment or domain condition."""


class UnnormalizedP(FockForgeError, ValueError):
    pass


class InvalidDensity(FockForgeError, ValueError):
    pass


class CapExceeded(FockForgeError, ValueError):
    pass


class BlockCountMismatch(FockForgeError, ValueError):
    pass


class CrossCheckFailure(FockForgeError, ArithmeticError):
    pass


class DivisionDegenerate(FockForgeError, ZeroDivisionError):
    pass


class ConfigInvalid(FockForgeError, ValueError):
    pass
