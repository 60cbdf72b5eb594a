"""Exception types raised across the package."""


class FlatFlowError(Exception):
    """Base class for all package errors."""


class DomainError(FlatFlowError, ValueError):
    """An argument lies outside the domain of an operation."""


class ValidationError(FlatFlowError, ValueError):
    """An object fails a structural check (self-intersection, convexity, ...)."""


class OutOfTubeError(DomainError):
    """A point lies outside the tubular neighbourhood where projection is smooth."""


class InfiniteDistanceError(DomainError):
    """The H^-1 distance is infinite because the enclosed areas differ."""


class MeshError(FlatFlowError):
    """Meshing of the elastic domain failed."""


class SolverError(FlatFlowError):
    """A linear solve failed or produced a singular system."""


class StepFailure(FlatFlowError):
    """A minimizing-movement step could not produce a valid curve."""


class NonConvergenceError(StepFailure):
    """The step optimizer stalled above tolerance.

    The best iterate found is attached as ``best``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class BackendFailure(StepFailure):
    """The Euler-Lagrange fixed-point iteration diverged."""


class GraphBreakdownError(StepFailure):
    """The new curve is no longer a simple normal graph over the previous one."""
