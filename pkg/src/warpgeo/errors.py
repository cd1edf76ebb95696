"""Exception types shared across the package."""


class WarpGeoError(Exception):
    """Base class for all package errors."""


class DomainError(WarpGeoError, ValueError):
    """An argument lies outside the domain of an operation."""


class CoordinateDegeneracyError(DomainError):
    """A query sits on (or too close to) a coordinate pole."""


class MaskedPointError(WarpGeoError):
    """A quantity was requested at a point where it is not defined."""


class SingularPointError(MaskedPointError):
    """A field was evaluated at its singular point."""


class ConstructionError(WarpGeoError):
    """A metric construction failed; ``r`` records where, if known."""

    def __init__(self, message, r=None):
        super().__init__(message)
        self.r = r


class ToleranceError(WarpGeoError):
    """Adaptive refinement hit its budget before meeting the tolerance."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class PreconditionError(WarpGeoError, ValueError):
    """Input violates a documented precondition."""


class ConditioningError(WarpGeoError):
    """A least-squares design is too poorly conditioned to trust."""


class ChartExitError(WarpGeoError):
    """A geodesic left the coordinate chart; the partial trajectory is kept."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class AccuracyError(WarpGeoError):
    """Conserved-quantity drift exceeded the accuracy gauge."""


class AdmissibilityError(WarpGeoError, ValueError):
    """An (w, f) pair fails the admissibility invariants."""
