"""Tests for the exact rational helpers."""
from fractions import Fraction

import pytest

from utils.rationals import format_rational, parse_rational, to_fraction


class TestToFraction:
    """Test conversion to exact rationals."""

    def test_float_keeps_binary_value(self):
        """Test a double converts to its exact binary-rational value."""
        assert to_fraction(0.1) == Fraction(3602879701896397, 36028797018963968)
        assert to_fraction(0.5) == Fraction(1, 2)

    def test_decimal_string_is_exact(self):
        """Test decimal literals keep their decimal value."""
        assert to_fraction("1.2") == Fraction(6, 5)
        assert to_fraction(" 3/4 ") == Fraction(3, 4)

    @pytest.mark.parametrize("value", [float("inf"), float("nan")])
    def test_non_finite_rejected(self, value):
        """Test non-finite doubles have no rational form."""
        with pytest.raises(ValueError):
            to_fraction(value)


class TestFormatRational:
    """Test "p/q" rendering."""

    def test_integer_keeps_denominator(self):
        """Test integers render with denominator 1."""
        assert format_rational(Fraction(2)) == "2/1"

    def test_parse_inverts_format(self):
        """Test parse_rational reads back what format_rational writes."""
        assert parse_rational(format_rational(Fraction(-7, 3))) == Fraction(-7, 3)
