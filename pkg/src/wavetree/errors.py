"""Exception types shared across the package."""


class WavetreeError(Exception):
    """Base class for package errors."""


class GridMismatchError(WavetreeError):
    """Operands live on different grids."""


class ConfigError(WavetreeError):
    """Invalid configuration or scenario spec (CLI exit code 2)."""


class ResolvabilityError(ConfigError):
    """Spec parameters the grid cannot resolve; names the violated constraint."""


class NumericsError(WavetreeError):
    """Numerical abort: overflow, truncation leakage, non-finite state (CLI exit code 3)."""


class InvalidDecompositionError(WavetreeError):
    """Decomposition violates its invariants (sum, independence, norms)."""
