"""Exception hierarchy shared by every module."""


class ImsvError(Exception):
    """Base class for all errors raised by the package."""


class ArgumentError(ImsvError, ValueError):
    """Bad argument shape or value (length mismatch, invalid parameter)."""


class UnsupportedModelError(ImsvError):
    """F-function outside the supported class (odd or high momentum powers)."""


class ForbiddenRegionError(ImsvError):
    """Negative momentum radicand: the point is classically forbidden."""


class ContinuumRegionError(ImsvError):
    """Spectral parameter at or beyond the accumulation point a^2/2."""


class BracketError(ImsvError):
    """Root bracket without a sign change."""


class ConvergenceError(ImsvError):
    """Iteration limit reached before the tolerance was met."""


class BranchSingularityError(ImsvError):
    """Jacobian with respect to the separation constants is singular."""


class BranchTrackingError(ImsvError):
    """Eigenvector node count no longer matches the requested quantum number."""


class TruncationError(ImsvError):
    """Grid too narrow: the state has not decayed at the boundary."""


class GridError(ImsvError, ValueError):
    """Grid too coarse or malformed."""


class DegenerateStateError(ImsvError):
    """No grid point survives the node mask."""


class NotPositiveSemidefiniteError(ImsvError):
    """Matrix square root requested for an indefinite operand."""


class DiscretizationError(ImsvError):
    """Discretized operator lost a property the continuum operator has."""
