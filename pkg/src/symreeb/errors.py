"""Exception hierarchy.

Validation problems (bad input, violated preconditions) and numerical
failures (degeneracy, non-convergence) are kept apart so the command line
runner can map them to distinct exit codes.
"""


class SymreebError(Exception):
    """Base class for all library errors."""

    exit_code = 3


class ValidationError(SymreebError, ValueError):
    """Input rejected before any numerics ran."""

    exit_code = 2


class DomainError(ValidationError):
    """Point outside the domain of a map (collision locus, v = 0, ...)."""


class NumericalError(SymreebError, RuntimeError):
    """A numerical stage failed; ``stage`` names it."""

    exit_code = 3

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


class DegeneracyError(NumericalError):
    """The path or chord is degenerate, so the requested index is undefined."""


class IllConditionedError(NumericalError):
    """Spectral gap or projection conditioning too small; refine the discretization."""


class RefineError(NumericalError):
    """A sampled quantity is under-resolved (grid too coarse)."""


class ConsistencyError(NumericalError):
    """An internal structural check failed (e.g. eigenvalue count per winding)."""


class GeometryError(NumericalError):
    """Geometric precondition failed (level not star-shaped, frame degenerate)."""


class CollisionError(NumericalError):
    """A trajectory entered an exclusion ball around a collision point."""


class SearchFailure(NumericalError):
    """Newton/shooting search did not converge from any seed."""
