"""Error handling utilities and helpers."""

from typing import Any, NoReturn

# Error message constants
NOT_FOUND_MSG = "{resource} '{identifier}' not found"
DIMENSION_MSG = "{op}: incompatible shapes {shapes}"
FORMAT_MSG = "{what} at byte {offset}"


def raise_not_found(
    resource: str, identifier: Any, context: dict[str, Any] | None = None
) -> NoReturn:
    """Raise a standardized not found error.

    Args:
        resource: Type of resource (e.g., "video", "checkpoint")
        identifier: Resource identifier
        context: Additional context
    """
    from .exceptions import NotFoundError

    raise NotFoundError(
        NOT_FOUND_MSG.format(resource=resource.capitalize(), identifier=identifier),
        error_code=f"{resource.upper().replace(' ', '_')}_NOT_FOUND",
        context=context or {},
    )


def raise_validation_error(
    message: str,
    field: str | None = None,
    details: list[dict[str, Any]] | None = None,
) -> NoReturn:
    """Raise a standardized validation error.

    Args:
        message: Error message
        field: Field that failed validation
        details: Additional error details
    """
    from .exceptions import ValidationError

    error_details = details or []
    if field:
        error_details.insert(
            0,
            {
                "field": field,
                "message": message,
            },
        )

    raise ValidationError(message=message, details=error_details)


def raise_dimension_error(op: str, *shapes: tuple[int, ...]) -> NoReturn:
    """Raise a dimension error naming the operation and every shape involved."""
    from .exceptions import DimensionError

    rendered = " vs ".join(str(tuple(s)) for s in shapes)
    raise DimensionError(
        DIMENSION_MSG.format(op=op, shapes=rendered),
        error_code="DIMENSION_MISMATCH",
        context={"op": op, "shapes": [list(s) for s in shapes]},
    )


def raise_format_error(what: str, offset: int, path: str | None = None) -> NoReturn:
    """Raise a format error pointing at the offending byte offset."""
    from .exceptions import FormatError

    context: dict[str, Any] = {}
    if path is not None:
        context["path"] = path
    raise FormatError(
        FORMAT_MSG.format(what=what, offset=offset),
        offset=offset,
        error_code="BAD_FORMAT",
        context=context,
    )
