"""Turn exceptions escaping a command into a JSON error report and an exit code."""

import sys
import traceback
from typing import Any, TextIO

from pydantic import ValidationError as PydanticValidationError

from ..core.exceptions import EXIT_RUNTIME_ERROR, EXIT_USAGE_ERROR, SynopsisError
from ..core.logging import get_logger, get_run_id, log_event
from ..core.metrics import get_metrics_collector
from ..core.models.errors import ErrorDetail, ErrorResponse

logger = get_logger(__name__)


class ErrorHandler:
    """Builds one ErrorResponse per failure; tracebacks only at DEBUG level."""

    def __init__(self, command: str, include_debug_info: bool = False) -> None:
        self.command = command
        self.include_debug_info = include_debug_info

    def handle(self, exc: BaseException, stream: TextIO | None = None) -> int:
        """Report ``exc`` on stderr and return the process exit code."""
        if isinstance(exc, SynopsisError):
            response = self._handle_synopsis_error(exc)
        elif isinstance(exc, PydanticValidationError):
            response = self._handle_pydantic_validation_error(exc)
        elif isinstance(exc, FileNotFoundError | IsADirectoryError | PermissionError):
            response = self._handle_os_error(exc)
        else:
            response = self._handle_unexpected_error(exc)

        get_metrics_collector().record_error(type(exc).__name__, self.command)
        log_event(
            logger,
            "error_handled",
            level="error",
            error_type=type(exc).__name__,
            error_message=str(exc),
            exit_code=response.exit_code,
            error_code=response.error,
        )
        out = stream or sys.stderr
        out.write(response.model_dump_json(exclude_none=True) + "\n")
        out.flush()
        return response.exit_code

    def _response(self, **kwargs: Any) -> ErrorResponse:
        response = ErrorResponse(command=self.command, run_id=get_run_id(), **kwargs)
        if self.include_debug_info:
            response.traceback = traceback.format_exception(*sys.exc_info())
        return response

    def _handle_synopsis_error(self, exc: SynopsisError) -> ErrorResponse:
        details = [
            ErrorDetail(**detail) if isinstance(detail, dict) else detail
            for detail in exc.details
        ]
        response = self._response(
            error=exc.error_code,
            message=exc.message,
            details=details or None,
            exit_code=exc.exit_code,
        )
        if exc.context:
            response.debug_info = {"context": exc.context}
        if self.include_debug_info:
            response.debug_info = {
                "context": exc.context,
                "exception_type": type(exc).__name__,
            }
        return response

    def _handle_pydantic_validation_error(
        self, exc: PydanticValidationError
    ) -> ErrorResponse:
        details = [
            ErrorDetail(
                field=".".join(str(loc) for loc in error.get("loc", [])),
                message=error.get("msg", "Validation failed"),
                code=error.get("type", "validation_error"),
            )
            for error in exc.errors()
        ]
        fields = ", ".join(d.field for d in details if d.field) or exc.title
        return self._response(
            error="DataValidationError",
            message=f"{exc.title} validation failed: {fields}",
            details=details,
            exit_code=EXIT_USAGE_ERROR,
        )

    def _handle_os_error(self, exc: OSError) -> ErrorResponse:
        return self._response(
            error="FileError",
            message=f"{exc.strerror or exc}: {exc.filename}",
            exit_code=EXIT_USAGE_ERROR,
        )

    def _handle_unexpected_error(self, exc: BaseException) -> ErrorResponse:
        if not self.include_debug_info:
            return self._response(
                error="InternalError",
                message=f"{type(exc).__name__}: {exc}",
                exit_code=EXIT_RUNTIME_ERROR,
            )
        return self._response(
            error=type(exc).__name__,
            message=str(exc),
            exit_code=EXIT_RUNTIME_ERROR,
            debug_info={
                "exception_type": type(exc).__name__,
                "exception_module": type(exc).__module__,
            },
        )
