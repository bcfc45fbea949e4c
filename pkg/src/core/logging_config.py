"""Logging configuration."""
import json
import logging
import sys
from datetime import datetime, timezone
from typing import Optional, TextIO

from src.core.config import config

# LogRecord attributes that are not user-supplied context
_RESERVED = set(vars(logging.makeLogRecord({}))) | {"message", "asctime"}


class JSONFormatter(logging.Formatter):
    """JSON log formatter for structured logging."""

    def format(self, record: logging.LogRecord) -> str:
        """Format log record as JSON."""
        log_data = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }

        # Context passed through ``extra=`` (step, t, path, ...)
        for key, value in vars(record).items():
            if key not in _RESERVED and not key.startswith("_"):
                log_data[key] = value

        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)

        return json.dumps(log_data, default=str)


def setup_logging(level: Optional[str] = None, stream: Optional[TextIO] = None):
    """Configure application logging.

    Standard output is reserved for command results, so records go to
    standard error unless another stream is given.
    """
    level = level or config.LOG_LEVEL
    root_logger = logging.getLogger()
    root_logger.setLevel(level)

    # Re-running setup replaces our handler instead of stacking a second one
    for handler in list(root_logger.handlers):
        if getattr(handler, "_lab_handler", False):
            root_logger.removeHandler(handler)

    console_handler = logging.StreamHandler(stream or sys.stderr)
    console_handler.setLevel(level)
    console_handler._lab_handler = True  # type: ignore[attr-defined]

    if config.DEBUG:
        formatter = logging.Formatter(
            fmt="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
        )
    else:
        formatter = JSONFormatter()

    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    return root_logger
