"""Custom exceptions for the detection pipeline."""

from typing import Optional


class DetectionError(Exception):
    """Base exception for the detection pipeline."""

    pass


class ConfigurationError(DetectionError):
    """Raised when configuration is invalid."""

    pass


class ArgumentError(DetectionError, ValueError):
    """Raised when an operation receives an argument outside its domain."""

    pass


class EventParseError(DetectionError):
    """Raised when a text record cannot be parsed."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None) -> None:
        self.path = path
        self.line = line
        location = f"{path}:{line}" if path is not None and line is not None else (path or "")
        super().__init__(f"{location}: {message}" if location else message)


class EventValidationError(DetectionError):
    """Raised when parsed records violate bounds or ordering."""

    def __init__(self, message: str, index: Optional[int] = None) -> None:
        self.index = index
        super().__init__(message if index is None else f"record {index}: {message}")


class DegenerateProjectionError(DetectionError):
    """Raised when a warped pixel has a vanishing homogeneous component."""

    pass


class EmptyWindowError(DetectionError):
    """Raised when a window holds no usable pixels."""

    pass


class StageError(DetectionError):
    """Raised by the pipeline with the name of the failing stage."""

    def __init__(self, stage: str, message: str) -> None:
        self.stage = stage
        super().__init__(f"[{stage}] {message}")
