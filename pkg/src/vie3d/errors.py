"""Exception types raised by the solver pipeline."""


class VIEError(Exception):
    """Base class for all package errors."""


class ParameterError(VIEError, ValueError):
    """Invalid physical or numerical parameter."""


class SingularityError(VIEError, ValueError):
    """Kernel evaluated at its singular point."""


class EmptyScattererError(VIEError, ValueError):
    """The voxelization contains no interior cell."""


class GridTooCoarseError(VIEError, ValueError):
    """The voxelization contains no interior node."""


class SolverError(VIEError, RuntimeError):
    """Direct solve failed (singular or ill-conditioned matrix)."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class NonConvergenceError(VIEError, RuntimeError):
    """Iterative solve did not reach the requested tolerance."""

    def __init__(self, message, best_residual=None, iterations=None):
        super().__init__(message)
        self.best_residual = best_residual
        self.iterations = iterations


class ConfigError(VIEError, ValueError):
    """Malformed or schema-violating experiment configuration."""
