"""Exception types shared across the package."""


class DataInvalidError(ValueError):
    """Input data violates a structural invariant (periods, nonvanishing, schema)."""


class ConvergenceError(RuntimeError):
    """A solver or quadrature failed to reach its requested tolerance.

    Carries a ``residuals`` dict so callers can report what was achieved.
    """

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = dict(residuals or {})


class ResolutionError(ConvergenceError):
    """Grid or mesh resolution is insufficient for the requested tolerance."""
