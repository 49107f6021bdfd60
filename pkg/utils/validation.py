"""Input validation utilities."""
import os
from pathlib import Path
from typing import Optional


def validate_input_length(text: str, max_length: int, field_name: str = "Field") -> tuple[bool, Optional[str]]:
    """
    Validate input doesn't exceed maximum length.

    Args:
        text: Input text
        max_length: Maximum allowed length
        field_name: Name of field for error message

    Returns:
        Tuple of (is_valid, error_message)
    """
    if len(text) > max_length:
        return False, f"{field_name} exceeds maximum length of {max_length} characters (current: {len(text)})"

    return True, None


def validate_expression(text: str, max_length: int) -> tuple[bool, Optional[str]]:
    """
    Validate a function expression before parsing.

    Args:
        text: Expression text
        max_length: Maximum allowed length

    Returns:
        Tuple of (is_valid, error_message)
    """
    if not text.strip():
        return False, "Function expression is empty"

    if not text.isascii():
        return False, "Function expression must be ASCII"

    return validate_input_length(text, max_length, "Function expression")


def validate_level_count(levels: int, minimum: int = 1) -> tuple[bool, Optional[str]]:
    """
    Validate a level count.

    Args:
        levels: Requested number of levels
        minimum: Smallest accepted count

    Returns:
        Tuple of (is_valid, error_message)
    """
    if levels < minimum:
        return False, f"Level count must be at least {minimum} (got {levels})"

    return True, None


def validate_output_path(path: str, field_name: str = "Output path") -> tuple[bool, Optional[str]]:
    """
    Validate that a file can be written at path.

    The parent directory must exist and be writable; an existing file must be
    writable too.

    Args:
        path: Target file path
        field_name: Name of field for error message

    Returns:
        Tuple of (is_valid, error_message)
    """
    target = Path(path)
    if target.is_dir():
        return False, f"{field_name} {path} is a directory"

    parent = target.parent if str(target.parent) else Path(".")
    if not parent.is_dir():
        return False, f"{field_name} directory {parent} does not exist"

    if target.exists() and not os.access(target, os.W_OK):
        return False, f"{field_name} {path} is not writable"

    if not os.access(parent, os.W_OK):
        return False, f"{field_name} directory {parent} is not writable"

    return True, None


def sanitize_filename(filename: str) -> str:
    """
    Sanitize a generated artifact filename.

    Args:
        filename: Input filename

    Returns:
        Filename made of safe characters only
    """
    safe_chars = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-_."
    sanitized = "".join(c if c in safe_chars else "_" for c in filename)

    if sanitized.startswith((".", "-")):
        sanitized = "file_" + sanitized

    return sanitized or "unnamed_file"
