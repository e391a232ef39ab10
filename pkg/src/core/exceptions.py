"""Custom exceptions for the text synopsis generator."""

from typing import Any

# Process exit codes shared by every command
EXIT_OK = 0
EXIT_RUNTIME_ERROR = 1
EXIT_USAGE_ERROR = 2


class SynopsisError(Exception):
    """Base exception for all synopsis generator errors."""

    def __init__(
        self,
        message: str,
        *,
        exit_code: int = EXIT_RUNTIME_ERROR,
        error_code: str | None = None,
        details: list[dict[str, Any]] | None = None,
        context: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message)
        self.message = message
        self.exit_code = exit_code
        self.error_code = error_code or self.__class__.__name__
        self.details = details or []
        self.context = context or {}


class ValidationError(SynopsisError):
    """Raised when a user supplied document fails validation."""

    def __init__(self, message: str, **kwargs: Any) -> None:
        super().__init__(message, exit_code=EXIT_USAGE_ERROR, **kwargs)


class ConfigError(SynopsisError):
    """Raised when a configuration is inconsistent or leaves nothing to do."""

    def __init__(self, message: str, **kwargs: Any) -> None:
        super().__init__(message, exit_code=EXIT_USAGE_ERROR, **kwargs)


class NotFoundError(SynopsisError):
    """Raised when a requested video, file or checkpoint is not found."""

    def __init__(self, message: str, **kwargs: Any) -> None:
        super().__init__(message, exit_code=EXIT_USAGE_ERROR, **kwargs)


class FormatError(SynopsisError):
    """Raised when a binary or JSON-lines file is malformed."""

    def __init__(
        self, message: str, *, offset: int | None = None, **kwargs: Any
    ) -> None:
        super().__init__(message, exit_code=EXIT_RUNTIME_ERROR, **kwargs)
        self.offset = offset
        if offset is not None:
            self.context.setdefault("offset", offset)


class DimensionError(SynopsisError, ValueError):
    """Raised when tensor shapes do not agree."""


class DomainError(SynopsisError, ValueError):
    """Raised when an input lies outside an operation's domain (e.g. empty)."""


class ContractError(SynopsisError, ValueError):
    """Raised when a caller breaks an operation's precondition."""


class TokenIndexError(SynopsisError, IndexError):
    """Raised when a token index falls outside the vocabulary."""


class TrainingError(SynopsisError):
    """Raised when optimisation diverges."""

    def __init__(self, message: str, *, step: int | None = None, **kwargs: Any) -> None:
        super().__init__(message, exit_code=EXIT_RUNTIME_ERROR, **kwargs)
        self.step = step
        if step is not None:
            self.context.setdefault("step", step)
