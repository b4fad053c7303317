"""Exception types shared across the solver."""


class AimError(Exception):
    """Base class for all solver errors."""


class InvalidInputError(AimError, ValueError):
    """An argument violates a precondition (non-finite, wrong range, ...)."""


class PoleError(AimError):
    """Reciprocal of a jet whose value at the expansion point is zero."""


class OrderExhaustedError(AimError):
    """An operation needs more Taylor orders than the jet carries."""


class OverflowError_(AimError):
    """Non-finite coefficients appeared during the iteration.

    Signals a rescaling bug rather than a user error.
    """


class WrongFormError(AimError):
    """A problem builder was called for the wrong omega_L regime."""


class NoRootError(AimError):
    """No stabilized root was found in the scanned bracket."""

    def __init__(self, message, sign_trace=None):
        super().__init__(message)
        self.sign_trace = sign_trace or []


class NotExactlySolvableError(AimError):
    """A claimed exact-termination root is not expansion-point independent."""


class InvalidBracketError(AimError):
    """Bisection bracket endpoints have the same sign."""


class InsufficientBracketError(AimError):
    """Fewer stabilized roots were found than levels requested."""


class TruncationFailureError(AimError):
    """Oracle eigenvalue did not converge under domain extension."""


class GridTooCoarseWarning(UserWarning):
    """Two roots closer than the scan grid step; results may mislabel levels."""
