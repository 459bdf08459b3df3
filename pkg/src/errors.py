"""
Exception types raised by the simulation library.
"""


class SimulationError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(SimulationError, ValueError):
    """A parameter is outside its documented range."""


class DegenerateGeometryError(InvalidArgumentError):
    """An antenna coincides with a scatterer while path loss is active."""


class DomainError(InvalidArgumentError):
    """A closed-form bound was evaluated outside its validity region."""

    def __init__(self, message: str, threshold: float):
        super().__init__(message)
        self.threshold = threshold


class EmptyFilterError(SimulationError):
    """The interference covariance leaves no negligible eigenmodes."""


class QuadratureError(SimulationError):
    """Numerical integration did not reach the requested accuracy."""

    def __init__(self, message: str, value: float, error: float):
        super().__init__(message)
        self.value = value
        self.error = error


class ConfigError(SimulationError, ValueError):
    """Experiment configuration is malformed."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key
