"""
Exception hierarchy for pirogov.

Every error raised on purpose by the library derives from PirogovError and
carries the CLI exit code it maps to.
"""


class PirogovError(Exception):
    """Base exception for pirogov errors."""

    exit_code = 1
    code = "error"


class ConfigurationError(PirogovError):
    """Exception raised when a configuration or run request fails validation."""

    exit_code = 2
    code = "validation"


class GeometryError(ConfigurationError):
    """Exception raised for invalid regions, points or torus sizes."""

    code = "geometry"


class BoundaryConditionError(ConfigurationError):
    """Exception raised when a configuration violates the padded boundary condition."""

    code = "boundary"


class SeriesError(ConfigurationError):
    """Exception raised when a series operation precondition fails."""

    code = "series"


class BackendMismatchError(SeriesError):
    """Exception raised when exact and float series are combined."""

    code = "backend_mismatch"


class OrderMismatchError(SeriesError):
    """Exception raised when series of different truncation orders are combined."""

    code = "order_mismatch"


class DisconnectedGraphError(ConfigurationError):
    """Exception raised when the Ursell function is asked for a disconnected graph."""

    code = "disconnected"


class RegimeError(PirogovError):
    """Exception raised when parameters fall outside the certified regime."""

    exit_code = 3
    code = "regime"


class CapExceededError(PirogovError):
    """Exception raised when an exhaustive enumeration would exceed its cap."""

    exit_code = 4
    code = "cap_exceeded"


class InductionOrderError(PirogovError):
    """Exception raised when an outer weight is requested before its interior weights."""

    code = "induction_order"
