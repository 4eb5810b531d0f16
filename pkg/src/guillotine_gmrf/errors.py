"""Exception hierarchy shared by every module."""


class GuillotineError(Exception):
    """Base class for all package errors."""


class SingularPivot(GuillotineError):
    """An eliminated block is numerically singular."""


class NotPositiveDefinite(GuillotineError):
    """A matrix that must be positive definite is not."""


class LayoutMismatch(GuillotineError):
    """Block sizes or labels disagree between operands."""


class DimensionMismatch(GuillotineError):
    """Fibre dimensions are inconsistent."""


class ShapeMismatch(GuillotineError):
    """Rectangle or half-strip shapes cannot be glued."""


class DegenerateMode(GuillotineError):
    """A sine-mode characteristic equation has no admissible root pair."""


class QuadratureNotConverged(GuillotineError):
    """Grid doubling did not reach the requested tolerance."""


class AssumptionViolated(GuillotineError):
    """A spectral non-degeneracy assumption fails for this input."""


class NotEven(GuillotineError):
    """A fold was requested for a symbol that is not even."""


class NotDihedral(GuillotineError):
    """An operation needing dihedral invariance got a generic weight."""


class TruncationExceeded(GuillotineError):
    """The truncation order is too small for the requested geometry."""


class ParseError(GuillotineError, ValueError):
    """A text file does not follow the expected format."""
