"""Exception types raised across the package."""


class WvapError(Exception):
    """Base class for every error raised by :mod:`wvap`."""


class InvalidSize(WvapError, ValueError):
    pass


class IndexOutOfRange(WvapError, IndexError):
    pass


class DimensionMismatch(WvapError, ValueError):
    pass


class DimensionTooLarge(WvapError, ValueError):
    pass


class NotHermitian(WvapError, ValueError):
    pass


class NotUnitary(WvapError, ValueError):
    pass


class OrthogonalSelection(WvapError, ZeroDivisionError):
    """Pre- and post-selected states are orthogonal (overlap below 1e-12)."""


class ImpossibleOutcome(WvapError, ValueError):
    """The post-selection click has (numerically) zero probability."""


class IncompleteProjectors(WvapError, ValueError):
    pass


class InvalidConfig(WvapError, ValueError):
    pass


class OddParityW(InvalidConfig):
    """Reflection index ``w`` has odd popcount."""
