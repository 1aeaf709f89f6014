from __future__ import annotations

from typing import Any

__all__ = (
    "AgeError",
    "InputError",
    "DomainError",
    "CapacityError",
    "ConfigurationError",
    "StateError",
)


class AgeError(Exception):
    """Base class for every error raised by pyage."""

    def to_dict(self) -> dict[str, Any]:
        return {"error": type(self).__name__, "message": str(self)}


class InputError(AgeError, ValueError):
    """
    Malformed input data.

    The message is prefixed with ``path:line`` when those are known.
    """

    def __init__(
        self, message: str, path: str | None = None, line: int | None = None
    ) -> None:
        self.path = path
        self.line = line
        if path is not None and line is not None:
            message = f"{path}:{line}: {message}"
        elif path is not None:
            message = f"{path}: {message}"
        super().__init__(message)

    def to_dict(self) -> dict[str, Any]:
        doc = super().to_dict()
        if self.path is not None:
            doc["path"] = self.path
        if self.line is not None:
            doc["line"] = self.line
        return doc


class DomainError(AgeError, ValueError):
    """A mathematical precondition does not hold for the given values."""


class CapacityError(AgeError, ValueError):
    """A dense computation was requested above the configured size cap."""


class ConfigurationError(AgeError, ValueError):
    """Invalid run configuration, thresholds or split sizes."""


class StateError(AgeError, RuntimeError):
    """An operation was called in the wrong lifecycle state."""
