"""Exception hierarchy shared by all blockade_lab modules."""


class BlockadeLabError(Exception):
    """Base class for every library-specific error."""


class InvalidArgumentError(BlockadeLabError, ValueError):
    """An argument violates a documented precondition."""


class CapacityError(BlockadeLabError):
    """A composite Hilbert dimension exceeds the configured cap."""


class SingularMatrixError(BlockadeLabError):
    """Linear system singular to tolerance; carries a condition estimate."""

    def __init__(self, message, condition_estimate=None):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class NumericalError(BlockadeLabError):
    """A numerical routine failed to meet its accuracy contract."""


class PoleError(BlockadeLabError):
    """Closed-form denominator vanished (parameters sit on a resonance)."""


class DegenerateParameterError(BlockadeLabError):
    """Parameters below the guard where an optimal relation degenerates."""


class UndefinedCorrelationError(BlockadeLabError):
    """Correlation function requested for a mode with no population."""


class DegenerateSteadyStateError(BlockadeLabError):
    """Liouvillian null space is not one-dimensional."""


class InstabilityError(BlockadeLabError):
    """Time integration produced divergent matrix entries."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class ConfigError(BlockadeLabError):
    """Run configuration failed schema or semantic validation."""
