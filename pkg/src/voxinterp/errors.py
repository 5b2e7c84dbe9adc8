"""Exception types raised across the toolkit."""


class VoxInterpError(Exception):
    """Base class for all toolkit errors."""


class FormatError(VoxInterpError, ValueError):
    pass


class UnsupportedError(VoxInterpError, ValueError):
    pass


class UnsupportedRateError(UnsupportedError):
    pass


class EmptyAudioError(VoxInterpError, ValueError):
    pass


class EmptyInputError(VoxInterpError, ValueError):
    pass


class TooShortError(VoxInterpError, ValueError):
    pass


class InsufficientVoicingError(VoxInterpError, ValueError):
    pass


class InsufficientFormantsError(VoxInterpError, ValueError):
    pass


class InvalidFormantsError(VoxInterpError, ValueError):
    pass


class MinusInfinityError(VoxInterpError, ValueError):
    """Level of an all-zero signal (log of zero)."""


class ZeroVarianceError(VoxInterpError, ValueError):
    def __init__(self, descriptor):
        super().__init__(f"descriptor {descriptor!r} has zero variance")
        self.descriptor = descriptor


class ZeroVectorError(VoxInterpError, ValueError):
    pass


class RangeError(VoxInterpError, ValueError):
    pass


class SingularError(VoxInterpError, ValueError):
    pass


class DegenerateError(VoxInterpError, ValueError):
    pass


class InsufficientDataError(VoxInterpError, ValueError):
    pass


class TieError(VoxInterpError, ValueError):
    def __init__(self, message, namings=None):
        super().__init__(message)
        self.namings = namings or []


class DivergenceError(VoxInterpError, ArithmeticError):
    pass


class ColorSourceError(VoxInterpError, KeyError):
    pass
