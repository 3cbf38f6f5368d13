"""Exception types shared across the package."""


class CharsumError(ValueError):
    pass


class NonInvertible(CharsumError):
    pass


class NotCoprime(CharsumError):
    pass


class NotPrime(CharsumError):
    pass


class NotPrimitive(CharsumError):
    pass


class RangeTooLarge(CharsumError):
    pass


class UnsupportedModulus(CharsumError):
    pass


class ModulusTooLarge(CharsumError):
    pass


class CoefficientVanishes(CharsumError):
    pass


class PoleProximity(CharsumError):
    pass


class PoleAtOne(CharsumError):
    pass


class QuadratureNotConverged(ArithmeticError):
    pass


class TruncationInsufficient(ArithmeticError):
    pass


class EmptyFamily(CharsumError):
    pass


class OverlappingBoxes(CharsumError):
    pass
