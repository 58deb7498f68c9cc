"""Exception types shared across the package."""


class WPencilError(Exception):
    """Base class for all package errors."""


class SingularSystem(WPencilError):
    """A shift-polynomial (circulant) system has no unique solution."""


class PeriodMismatch(WPencilError):
    """Operands carry sequences of different periods."""


class InsufficientDepth(WPencilError):
    """A truncated series was asked for a coefficient it cannot certify."""


class NonInvertible(WPencilError):
    """The leading coefficient of an operator vanishes somewhere."""


class BranchUnavailable(WPencilError):
    """The requested root needs a scalar field the caller did not allow."""


class DomainError(WPencilError):
    """A functional was evaluated outside its domain (e.g. log of a non-positive value)."""


class ZeroLambda(WPencilError):
    """The push-forward pencil is undefined at lambda = 0."""


class DegenerateFrame(WPencilError):
    """A polygon frame of consecutive vertices is singular."""


class DegenerateSeed(DegenerateFrame):
    """The seed frame handed to polygon reconstruction is singular."""
