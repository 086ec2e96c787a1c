"""Exception types shared across the package."""


class BiphotonError(Exception):
    """Base class for all package-specific errors."""


class DomainError(BiphotonError, ValueError):
    """An argument is outside the physically meaningful domain."""


class BoundaryError(DomainError):
    """A classification was requested exactly on an undefined boundary."""


class PreconditionError(BiphotonError, ValueError):
    """A documented precondition of an operation was violated."""


class ConfigError(BiphotonError):
    """Invalid or inconsistent configuration (CLI exit code 2)."""


class FitError(BiphotonError, RuntimeError):
    """A least-squares fit failed to converge."""


class SamplingError(BiphotonError, RuntimeError):
    """Rejection sampling exceeded its attempt budget."""
