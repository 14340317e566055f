"""Shared exception types."""


class DivergenceError(RuntimeError):
    """A quadrature or series is non-integrable / non-summable."""


class CapacityError(RuntimeError):
    """A requested discretization exceeds the configured node budget."""


class ResolutionError(RuntimeError):
    """The grid is too coarse to resolve the requested quantity."""


class ConfigError(ValueError):
    """A configuration file violates the schema or cannot be parsed.

    line carries a best-effort 1-based anchor into the source file.
    """

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line
