"""Exception taxonomy shared by all solver modules."""


class SelfGravError(Exception):
    """Base class for all package errors."""


class DomainError(SelfGravError):
    """Invalid physical parameters or configuration."""


class SingularInputError(DomainError):
    """Evaluation requested exactly at a non-integrable kernel singularity."""


class ResolutionError(DomainError):
    """Grid too coarse to represent the state (width below 5 cells)."""


class NumericsError(SelfGravError):
    """A numerical procedure failed to converge.

    Carries a ``diagnostics`` dict with whatever the failing routine knew
    (residual history, quadrature error estimates, scan profiles).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
