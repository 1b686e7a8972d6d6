"""
Structured Logging Infrastructure for borninfeld-lab

Provides JSON-formatted structured logging with support for contextual
solver information. Records go to standard error so that standard output
stays reserved for CSV data.
"""

import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional

# Context attributes copied from a record into structured output
CONTEXT_FIELDS = (
    "component",
    "event_type",
    "beta",
    "separation",
    "iteration",
    "grad_norm",
    "action",
    "method",
)


class JSONFormatter(logging.Formatter):
    """
    JSON log formatter for structured logging.

    Formats log records as JSON with ISO8601 timestamps and solver context.
    """

    def format(self, record: logging.LogRecord) -> str:
        """
        Format log record as JSON.

        Args:
            record: Log record to format

        Returns:
            JSON-formatted log string
        """
        log_data: Dict[str, Any] = {
            "timestamp": datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }

        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)

        if hasattr(record, "extra_fields"):
            log_data.update(record.extra_fields)

        for field in CONTEXT_FIELDS:
            if hasattr(record, field):
                log_data[field] = getattr(record, field)

        return json.dumps(log_data, default=str)


class TextFormatter(logging.Formatter):
    """
    Human-readable text formatter for interactive runs.

    Formats logs in a readable format with colors (when supported).
    """

    COLORS = {
        "DEBUG": "\033[36m",  # Cyan
        "INFO": "\033[32m",  # Green
        "WARNING": "\033[33m",  # Yellow
        "ERROR": "\033[31m",  # Red
        "CRITICAL": "\033[35m",  # Magenta
    }
    RESET = "\033[0m"

    def __init__(self, use_colors: bool = True):
        """
        Initialize text formatter.

        Args:
            use_colors: Whether to use ANSI colors
        """
        super().__init__()
        self.use_colors = use_colors and sys.stderr.isatty()

    def format(self, record: logging.LogRecord) -> str:
        """
        Format log record as colored text.

        Args:
            record: Log record to format

        Returns:
            Formatted log string
        """
        timestamp = datetime.now(timezone.utc).strftime("%Y-%m-%d %H:%M:%S")
        level = record.levelname
        if self.use_colors:
            level = f"{self.COLORS.get(level, '')}{level}{self.RESET}"

        formatted = f"{timestamp} [{level}] {record.name}: {record.getMessage()}"

        if record.exc_info:
            formatted += "\n" + self.formatException(record.exc_info)

        if hasattr(record, "beta"):
            formatted += f" [beta={record.beta}]"
        if hasattr(record, "separation"):
            formatted += f" [r={record.separation}]"
        if hasattr(record, "iteration"):
            formatted += f" [it={record.iteration}]"

        return formatted


def setup_logger(
    name: str = "borninfeld",
    level: str = "INFO",
    log_format: str = "json",
    log_file: Optional[Path] = None,
) -> logging.Logger:
    """
    Set up a logger with appropriate handlers and formatters.

    Args:
        name: Logger name
        level: Log level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_format: Format type ('json' or 'text')
        log_file: Optional file path for file logging

    Returns:
        Configured logger instance

    Example:
        >>> logger = setup_logger("borninfeld", level="INFO", log_format="text")
        >>> logger.info("solve started", extra={"beta": 0.3, "separation": 2.0})
    """
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, level.upper()))
    logger.handlers.clear()

    formatter: logging.Formatter
    if log_format == "json":
        formatter = JSONFormatter()
    else:
        formatter = TextFormatter()

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if log_file:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(JSONFormatter())  # Always use JSON for files
        logger.addHandler(file_handler)

    logger.propagate = False

    return logger


class LoggerAdapter(logging.LoggerAdapter):
    """
    Logger adapter that adds solve context to all log messages.

    Useful for tagging every record of one sweep point with its beta and
    separation.
    """

    def process(self, msg: str, kwargs: Dict[str, Any]) -> tuple[str, Dict[str, Any]]:
        """
        Process log message and add extra context.

        Args:
            msg: Log message
            kwargs: Keyword arguments

        Returns:
            Tuple of (message, kwargs) with added context
        """
        extra = dict(kwargs.get("extra") or {})
        extra.update(self.extra or {})
        kwargs["extra"] = extra
        return msg, kwargs


def create_run_logger(
    base_logger: logging.Logger, beta: float, separation: Optional[float] = None
) -> LoggerAdapter:
    """
    Create a logger adapter with sweep-point context.

    Args:
        base_logger: Base logger to adapt
        beta: Born parameter of the sweep point
        separation: Charge separation of the sweep point, if any

    Returns:
        Logger adapter with run context
    """
    context: Dict[str, Any] = {"beta": beta}
    if separation is not None:
        context["separation"] = separation
    return LoggerAdapter(base_logger, context)
