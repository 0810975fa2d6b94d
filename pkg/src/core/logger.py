"""Structured logging configuration."""

import contextvars
import json
import logging
import sys
from datetime import datetime, timezone
from typing import Any, Optional

from .settings import PipelineSettings

_window_id: contextvars.ContextVar[Optional[str]] = contextvars.ContextVar("window_id", default=None)

# Attributes every LogRecord carries; anything else arrived through ``extra``.
_RESERVED = set(logging.LogRecord("", 0, "", 0, "", None, None).__dict__) | {"message", "asctime"}


class JSONFormatter(logging.Formatter):
    """JSON formatter for structured logging."""

    def format(self, record: logging.LogRecord) -> str:
        """Format log record as JSON."""
        log_data: dict[str, Any] = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }

        window_id = _window_id.get()
        if window_id is not None:
            log_data["window_id"] = window_id

        context = {k: v for k, v in record.__dict__.items() if k not in _RESERVED}
        if context:
            log_data["context"] = context

        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)

        return json.dumps(log_data, default=str)


class TextFormatter(logging.Formatter):
    """Text formatter for human-readable logging."""

    FORMAT = "%(asctime)s - %(name)s - %(levelname)s [%(filename)s:%(lineno)d] - %(message)s"

    def __init__(self) -> None:
        super().__init__(fmt=self.FORMAT, datefmt="%Y-%m-%d %H:%M:%S")


def setup_logging(settings: PipelineSettings) -> None:
    """Setup logging for the pipeline."""
    root_logger = logging.getLogger()
    root_logger.setLevel(settings.log_level)
    root_logger.handlers.clear()

    formatter: logging.Formatter = JSONFormatter() if settings.log_format == "json" else TextFormatter()

    # stdout stays free for report output unless asked otherwise
    handler = logging.StreamHandler(sys.stdout if settings.log_to_stdout else sys.stderr)
    handler.setFormatter(formatter)
    root_logger.addHandler(handler)


def get_logger(name: str) -> logging.Logger:
    """Get logger with specific name."""
    return logging.getLogger(name)


class LogContext:
    """Context manager binding a window id to every record logged inside it."""

    def __init__(self, window_id: str) -> None:
        self.window_id = window_id
        self.token: Optional[contextvars.Token[Optional[str]]] = None

    def __enter__(self) -> "LogContext":
        self.token = _window_id.set(self.window_id)
        return self

    def __exit__(self, *args: Any) -> None:
        if self.token is not None:
            _window_id.reset(self.token)
            self.token = None
