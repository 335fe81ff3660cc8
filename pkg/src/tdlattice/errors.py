"""Exception types raised by the pricing engines."""


class LatticeError(Exception):
    """Base class for every error raised by :mod:`tdlattice`."""


class DomainError(LatticeError, ValueError):
    """An argument lies outside the domain of the operation."""


class ResourceError(LatticeError):
    """The requested discretisation would exceed a configured size cap."""


class ModelError(LatticeError):
    """The tree branching condition ``d*eta_n < rho_n < u*eta_n`` fails at some step."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class StabilityError(LatticeError):
    """The explicit scheme weights leave (0, 1) at some step."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ConfigError(LatticeError, ValueError):
    """A run configuration could not be parsed; ``field`` names the offending entry."""

    def __init__(self, message, field=None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field
