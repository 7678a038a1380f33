"""Exception types shared across the package."""


class BnnPipeError(Exception):
    """Base class for all errors raised by this package."""


class ModelError(BnnPipeError):
    """Invalid model file or model structure."""


class IRParseError(BnnPipeError):
    """Malformed pipeline IR text."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"{message} at line {line}"
        super().__init__(message)
        self.line = line


class CapacityError(BnnPipeError):
    """Model does not fit the target pipeline."""
