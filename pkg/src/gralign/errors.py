"""Exception types shared across the package."""


class GralignError(Exception):
    """Base class for all package errors."""


class ParameterError(GralignError):
    """A function was called with out-of-range or inconsistent parameters."""


class ParseError(GralignError):
    """An input file is malformed. Carries the offending line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(GralignError):
    """A benchmark configuration is invalid or references missing files."""


class DegenerateInputError(GralignError):
    """Input data admits no meaningful result (e.g. zero-variance PCA input)."""
