"""Exception types raised by the package."""


class BackflowError(Exception):
    """Base class for all package errors."""


class SameModeError(BackflowError, ValueError):
    """A two-state superposition was requested with identical modes."""


class NormViolation(BackflowError, ValueError):
    """A state passed to a flux routine is not unit-normalized."""


class WindowTooSmall(BackflowError, ValueError):
    """The positive-momentum window holds fewer than two states."""


class NotSymmetric(BackflowError, ValueError):
    """A matrix handed to the symmetric eigensolver is not symmetric."""


class ConvergenceFailure(BackflowError, ArithmeticError):
    """An eigensolver result failed its residual contract."""


class NoInteriorMax(BackflowError, ArithmeticError):
    """The best point of a coarse scan sits on the edge of the range."""


class NonPositiveData(BackflowError, ValueError):
    """Log-log fitting was given zero or negative data."""
