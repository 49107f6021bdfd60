"""Utility modules for OpenSets."""
from .export import export_to_csv, export_to_json, export_to_markdown
from .logging_config import setup_logging, get_logger
from .rationals import format_rational, to_fraction

__all__ = [
    "export_to_csv",
    "export_to_json",
    "export_to_markdown",
    "setup_logging",
    "get_logger",
    "format_rational",
    "to_fraction"
]
