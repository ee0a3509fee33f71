"""Exception types shared across the package."""


class WidomlabError(Exception):
    """Base class for all package-specific failures."""


class GeometryError(WidomlabError, ValueError):
    """Invalid or degenerate geometry."""


class SchemaError(GeometryError):
    """Malformed geometry document; the message carries the offending path."""


class IllConditionedSystemError(WidomlabError):
    """Collocation system too ill-conditioned to trust."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class InsufficientResolutionError(WidomlabError):
    """Discretization too coarse for the requested tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class TraceError(WidomlabError):
    """Level-curve tracing failed."""


class LevelTooLargeError(TraceError):
    """Requested level exceeds the threshold where component curves merge."""


class DegreeTooSmallError(WidomlabError, ValueError):
    """Polynomial degree too small for the component mass vector."""
