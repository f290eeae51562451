"""Exception types shared across the package.

Every exception carries a stable, grep-able ``prefix`` that the CLI prints
to stderr in front of the message.
"""


class ZoomSRError(Exception):
    """Base class for all package errors."""

    prefix = "ERR_DATA"


class ShapeError(ZoomSRError):
    """Dimension or shape mismatch between operands."""

    prefix = "ERR_SHAPE"


class SingularSystemError(ZoomSRError):
    """Weighted normal equations are numerically singular."""

    prefix = "ERR_SINGULAR"


class DivergenceError(ZoomSRError):
    """An iterative solver made the objective worse repeatedly."""

    prefix = "ERR_DIVERGE"


class DataIOError(ZoomSRError):
    """Malformed, truncated or unreadable input/output file."""

    prefix = "ERR_IO"


class ConfigError(ZoomSRError):
    """Invalid configuration file: unknown key or bad value."""

    prefix = "ERR_CONFIG"


class InvalidParameterError(ZoomSRError):
    """A domain value violates its documented invariant."""

    prefix = "ERR_DATA"


class DegenerateInputError(ZoomSRError):
    """Input is valid in shape but degenerate for the operation."""

    prefix = "ERR_DATA"
