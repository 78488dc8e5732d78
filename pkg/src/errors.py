"""
HJF — Errors

Library code raises these; only the CLI turns them into exit codes.
"""
from src.config import EXIT_NOT_FOUND, EXIT_PRECONDITION


class HJFError(Exception):
    """Base class for every error the toolkit raises on purpose."""
    exit_code = EXIT_PRECONDITION


class PreconditionError(HJFError, ValueError):
    """An operation was called outside its documented pre-conditions."""


class PrecisionError(PreconditionError):
    """A coefficient beyond the stored window was requested."""

    def __init__(self, message: str, required: int | None = None):
        super().__init__(message)
        self.required = required


class ParseError(HJFError, ValueError):
    """A file or literal could not be parsed."""


class NotFound(HJFError):
    """A bounded search finished without a hit. Soft failure."""
    exit_code = EXIT_NOT_FOUND


class StageError(HJFError):
    """Wraps the failure of one pipeline stage."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", EXIT_PRECONDITION)
