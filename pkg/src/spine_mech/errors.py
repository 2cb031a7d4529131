"""Exception hierarchy. CLI exit codes are keyed off these classes."""


class SpineMechError(Exception):
    """Base class for every error raised by the toolkit."""


class ConfigError(SpineMechError, ValueError):
    """Invalid or inconsistent configuration (CLI exit code 2)."""


class DomainError(SpineMechError, ValueError):
    """Input outside the domain of a model operation (CLI exit code 3)."""


class SingularityError(DomainError):
    """Evaluation at or beyond a kinematic singularity."""


class GeometryError(DomainError):
    """Geometric relation has no real solution."""


class NoRealSolutionError(GeometryError):
    """Linkage loop cannot close for the requested contraction."""


class ConvergenceError(DomainError):
    """Iterative solver failed to reach tolerance."""


class RangeError(DomainError):
    """Lookup outside a calibration table (no extrapolation)."""


class DataError(SpineMechError, ValueError):
    """Malformed experiment-log input (CLI exit code 4)."""

    def __init__(self, message, row=None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row
