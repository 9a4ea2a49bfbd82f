"""Exception types shared across the package.

The CLI maps these onto process exit codes: configuration problems exit
with 2, numerical failures (divergence guard, non-convergence, non-finite
data) with 3, and I/O trouble with 4.
"""


class MildNSError(Exception):
    """Base class for all package errors."""


class ConfigError(MildNSError, ValueError):
    """Invalid parameters: exponent constraints, bad lattice sizes, bad configs."""


class SmallnessError(ConfigError):
    """Datum fails the smallness condition and no override was requested."""


class MeshError(ConfigError):
    """A time mesh is too coarse or a requested time is off the mesh."""


class WindowError(ConfigError):
    """A requested time or radius leaves the lattice validity window."""


class DataError(MildNSError, ValueError):
    """Field data is malformed: wrong shape, wrong dtype, or non-finite."""


class NumericalError(MildNSError, RuntimeError):
    """Base class for runtime numerical failures."""


class DivergenceError(NumericalError):
    """Picard iterate crossed the divergence guard threshold."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class NonConvergenceError(NumericalError):
    """Iteration budget exhausted without meeting the stopping rule."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class CalibrationError(ConfigError):
    """An operation needs calibrated constants that are not available."""
