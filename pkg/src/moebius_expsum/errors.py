class ExpsumError(Exception):
    """Base class for library errors."""


class CapacityError(ExpsumError):
    """A table or buffer would exceed the configured memory budget."""


class PrecisionError(ExpsumError):
    """Fixed-point phase precision is too low for the requested index."""


class InsufficientTermsError(ExpsumError):
    """A finite continued fraction ran out before the requested length."""


class SelectionError(ExpsumError):
    """No convergent denominator straddles the requested x."""


class InvariantError(ExpsumError):
    """A computed identity failed its error budget."""
