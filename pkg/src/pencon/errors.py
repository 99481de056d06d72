"""Exception types raised across the package."""


class PenconError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(PenconError, ValueError):
    pass


class AmbientMismatch(DimensionMismatch):
    pass


class NotDirect(PenconError, ValueError):
    """Two subspaces intersect nontrivially where a direct sum is required."""


class ConjugateUnavailable(PenconError):
    pass


class UnknownName(PenconError, KeyError):
    pass


class CapabilityMissing(PenconError, ValueError):
    pass


class BoxTooLarge(PenconError, ValueError):
    pass


class Infeasible(PenconError):
    pass


class DualUnbounded(PenconError):
    pass


class NotConverged(PenconError):
    """Iterative solve stopped before the certificate tolerance was met.

    The partial :class:`~pencon.solvers.SolveReport` is kept on ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NonPositiveC(PenconError, ValueError):
    """``argmin Phi`` meets the nullspace of ``L``."""


class NotBracketed(PenconError, ValueError):
    pass


class RouteDisagreement(PenconError):
    """Redundant computations of a threshold disagree."""
