"""Exception types shared across the toolkit."""


class GaltError(Exception):
    """Base class for all toolkit-specific errors."""


class ConfigError(GaltError):
    """Invalid or inconsistent mission/solver configuration."""


class EphemerisRangeError(GaltError):
    """Epoch outside the validity window of the mean-element model."""


class ConvergenceError(GaltError):
    """An iterative routine (Kepler, Lambert, root find) failed to converge."""


class FrameError(GaltError):
    """Operation mixed states expressed in incompatible frames."""


class IntegrationError(GaltError):
    """Numerical propagation failed or hit a physical stop condition."""


class EvaluationError(GaltError):
    """NLP callback evaluation failed; carries the offending point."""

    def __init__(self, message, y=None):
        super().__init__(message)
        self.y = y


class InfeasibleArrivalError(GaltError):
    """Arrival conditions yield a non-physical (negative) payload."""
