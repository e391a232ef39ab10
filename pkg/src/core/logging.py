"""Structured logging configuration using structlog with context management."""

import logging
import sys
from contextvars import ContextVar
from typing import Any

import structlog
from structlog.stdlib import filter_by_level

# Thread-safe context variables
_run_id_context: ContextVar[str | None] = ContextVar("run_id", default=None)
_phase_context: ContextVar[str | None] = ContextVar("phase", default=None)
_video_id_context: ContextVar[str | None] = ContextVar("video_id", default=None)


def setup_logging(
    level: str = "INFO",
    fmt: str = "json",
    service_name: str = "text-synopsis-generator",
) -> None:
    """Configure structured logging for a command run.

    Diagnostics go to stderr; stdout is reserved for command data.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        fmt: "json" or "console"
        service_name: Name attached to every log entry
    """
    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=getattr(logging, level.upper()),
        force=True,
    )

    shared_processors = [
        structlog.stdlib.add_log_level,
        structlog.stdlib.add_logger_name,
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.processors.StackInfoRenderer(),
        structlog.processors.format_exc_info,
        structlog.processors.UnicodeDecoder(),
        structlog.processors.CallsiteParameterAdder(
            parameters=[
                structlog.processors.CallsiteParameter.FUNC_NAME,
                structlog.processors.CallsiteParameter.LINENO,
            ]
        ),
    ]

    def add_run_context(
        logger: Any, method_name: str, event_dict: dict[str, Any]
    ) -> dict[str, Any]:
        """Add service name and the current run context to all log entries."""
        event_dict["service"] = service_name
        if run_id := get_run_id():
            event_dict["run_id"] = run_id
        if phase := get_phase():
            event_dict["phase"] = phase
        if video_id := get_video_id():
            event_dict.setdefault("video", video_id)
        return event_dict

    renderer: Any
    if fmt == "console":
        renderer = structlog.dev.ConsoleRenderer(colors=False)
    else:
        renderer = structlog.processors.JSONRenderer(sort_keys=True)

    structlog.configure(
        processors=[
            filter_by_level,
            *shared_processors,  # type: ignore[list-item]
            add_run_context,
            renderer,
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=False,
    )


def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    """Get a configured logger instance.

    Args:
        name: Logger name (typically __name__)

    Returns:
        Configured structlog logger
    """
    return structlog.get_logger(name)  # type: ignore[no-any-return]


def log_event(
    logger: structlog.stdlib.BoundLogger, event: str, level: str = "info", **kwargs: Any
) -> None:
    """Log a structured event with additional context.

    Args:
        logger: Logger instance
        event: Event description
        level: Log level
        **kwargs: Additional structured data
    """
    log_method = getattr(logger, level.lower())
    log_method(event, **kwargs)


def set_run_id(run_id: str) -> None:
    """Set the run ID in the logging context."""
    _run_id_context.set(run_id)


def get_run_id() -> str | None:
    """Get the current run ID from the logging context."""
    return _run_id_context.get()


def set_phase(phase: str | None) -> None:
    """Set the pipeline phase (pretrain, joint, infer, eval)."""
    _phase_context.set(phase)


def get_phase() -> str | None:
    """Get the current pipeline phase."""
    return _phase_context.get()


def set_video_id(video_id: str | None) -> None:
    """Set the video being processed."""
    _video_id_context.set(video_id)


def get_video_id() -> str | None:
    """Get the video being processed."""
    return _video_id_context.get()


def clear_context() -> None:
    """Clear the logging context."""
    _run_id_context.set(None)
    _phase_context.set(None)
    _video_id_context.set(None)
