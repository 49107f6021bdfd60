"""Logging configuration for structured run logs."""
import logging
import sys
from fractions import Fraction
from typing import Optional, TextIO

ROOT_LOGGER = "opensets"


def setup_logging(
    level: int = logging.INFO,
    log_file: Optional[str] = None,
    trace_id: Optional[str] = None,
    stream: Optional[TextIO] = None
) -> logging.Logger:
    """
    Setup structured logging for OpenSets.

    Args:
        level: Logging level (default INFO)
        log_file: Optional file path for log output
        trace_id: Optional trace ID for correlating the lines of one run
        stream: Console stream (default stderr, keeps stdout free for JSON)

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(ROOT_LOGGER)
    logger.setLevel(level)
    logger.propagate = False

    # Remove existing handlers
    logger.handlers = []

    if trace_id:
        formatter = logging.Formatter(
            f'%(asctime)s - %(name)s - [TRACE:{trace_id}] - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )
    else:
        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )

    console_handler = logging.StreamHandler(stream if stream is not None else sys.stderr)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if log_file:
        try:
            file_handler = logging.FileHandler(log_file)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)
        except OSError as e:
            logger.warning(f"Could not create file handler: {e}")

    return logger


def get_logger(name: str = ROOT_LOGGER) -> logging.Logger:
    """
    Get a logger below the project root logger.

    Args:
        name: Logger name; module names are nested under "opensets"

    Returns:
        Logger instance
    """
    root = logging.getLogger(ROOT_LOGGER)
    if not root.handlers:
        setup_logging()

    if name == ROOT_LOGGER or name.startswith(ROOT_LOGGER + "."):
        return logging.getLogger(name)
    return logging.getLogger(f"{ROOT_LOGGER}.{name}")


class StructuredLogger:
    """
    Wrapper for structured logging with key/value fields.
    Rationals are rendered as exact "p/q" strings.
    """

    def __init__(self, logger: logging.Logger, trace_id: str):
        """Initialize with base logger and trace ID."""
        self.logger = logger
        self.trace_id = trace_id

    def _format_message(self, message: str, **kwargs) -> str:
        """Append keyword fields to the message."""
        fields = {}
        for key, value in kwargs.items():
            if isinstance(value, Fraction):
                fields[key] = f"{value.numerator}/{value.denominator}"
            else:
                fields[key] = value

        if fields:
            return f"{message} | {fields}"
        return message

    def info(self, message: str, **kwargs):
        """Log info level message."""
        self.logger.info(self._format_message(message, **kwargs))

    def warning(self, message: str, **kwargs):
        """Log warning level message."""
        self.logger.warning(self._format_message(message, **kwargs))

    def error(self, message: str, **kwargs):
        """Log error level message."""
        self.logger.error(self._format_message(message, **kwargs))

    def debug(self, message: str, **kwargs):
        """Log debug level message."""
        self.logger.debug(self._format_message(message, **kwargs))
