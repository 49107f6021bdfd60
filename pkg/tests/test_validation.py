"""Tests for validation utilities."""
import pytest

from utils.validation import (
    sanitize_filename,
    validate_expression,
    validate_input_length,
    validate_level_count,
    validate_output_path
)


class TestValidateInputLength:
    """Test input length validation."""

    def test_valid_length(self):
        """Test input within length limit."""
        is_valid, error = validate_input_length("x1 + 1", 10)

        assert is_valid is True
        assert error is None

    def test_exceeds_length(self):
        """Test input exceeding length limit."""
        is_valid, error = validate_input_length("x" * 11, 10, "Expression")

        assert is_valid is False
        assert "Expression" in error
        assert "11" in error


class TestValidateExpression:
    """Test expression pre-checks."""

    def test_valid_expression(self):
        """Test an ordinary expression passes."""
        assert validate_expression("min(x1, 1.2)", 4096) == (True, None)

    @pytest.mark.parametrize("text", ["", "   "])
    def test_empty(self, text):
        """Test blank expressions are rejected."""
        is_valid, error = validate_expression(text, 4096)

        assert is_valid is False
        assert "empty" in error

    def test_non_ascii(self):
        """Test non-ASCII expressions are rejected."""
        is_valid, error = validate_expression("x1 · 2", 4096)

        assert is_valid is False
        assert "ASCII" in error

    def test_too_long(self):
        """Test the length limit applies."""
        is_valid, _ = validate_expression("x1+" * 2000 + "1", 4096)

        assert is_valid is False


class TestValidateLevelCount:
    """Test level count validation."""

    def test_positive(self):
        """Test counts from 1 pass."""
        assert validate_level_count(1) == (True, None)

    def test_zero(self):
        """Test zero levels are rejected."""
        is_valid, error = validate_level_count(0)

        assert is_valid is False
        assert "at least 1" in error


class TestValidateOutputPath:
    """Test output path checks."""

    def test_writable(self, tmp_path):
        """Test a new file in an existing directory passes."""
        assert validate_output_path(str(tmp_path / "report.json")) == (True, None)

    def test_missing_directory(self, tmp_path):
        """Test a missing parent directory is rejected."""
        is_valid, error = validate_output_path(str(tmp_path / "missing" / "report.json"), "out_json")

        assert is_valid is False
        assert "out_json" in error

    def test_directory_target(self, tmp_path):
        """Test a directory is not a file target."""
        is_valid, error = validate_output_path(str(tmp_path))

        assert is_valid is False
        assert "directory" in error


class TestSanitizeFilename:
    """Test filename sanitization."""

    def test_safe_filename(self):
        """Test a mask filename is unchanged."""
        assert sanitize_filename("mask_L12.pgm") == "mask_L12.pgm"

    def test_special_characters(self):
        """Test unsafe characters are replaced."""
        assert sanitize_filename("mask L1/2.pgm") == "mask_L1_2.pgm"

    @pytest.mark.parametrize("name", [".hidden", "-rf"])
    def test_leading_dot_or_dash(self, name):
        """Test names cannot start with a dot or a dash."""
        assert sanitize_filename(name) == "file_" + name

    def test_empty_filename(self):
        """Test empty names get a placeholder."""
        assert sanitize_filename("") == "unnamed_file"
