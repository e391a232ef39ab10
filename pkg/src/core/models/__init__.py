"""Core models."""

from .errors import ErrorDetail, ErrorResponse

__all__ = ["ErrorResponse", "ErrorDetail"]
