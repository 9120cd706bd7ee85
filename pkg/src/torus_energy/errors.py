"""Exception types raised by the package."""


class TorusEnergyError(Exception):
    """Base class for all package errors."""


class InvalidInputError(TorusEnergyError, ValueError):
    """Malformed or mismatched input (dimensions, spaces, file contents)."""


class OutOfRangeError(TorusEnergyError, ValueError):
    """A parameter lies outside the range where an operation is defined."""


class UndefinedEnergyError(TorusEnergyError, ArithmeticError):
    """An energy or potential would combine +inf and -inf."""


class UndefinedRatioError(TorusEnergyError, ArithmeticError):
    """A ratio has a zero or non-finite denominator or factor."""


class SingularGradientError(TorusEnergyError, ArithmeticError):
    """Gradient requested at coincident points."""


class PreconditionError(TorusEnergyError, ValueError):
    """An operation's precondition does not hold (e.g. a ball touches a singularity)."""


class DivergedError(TorusEnergyError, ArithmeticError):
    """An integral is not finite for the requested kernel or profile."""
