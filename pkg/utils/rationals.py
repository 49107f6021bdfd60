"""Exact rational helpers: parsing, "p/q" formatting and float conversion."""
import math
from fractions import Fraction
from typing import Union

RationalLike = Union[int, float, str, Fraction]


def to_fraction(value: RationalLike) -> Fraction:
    """
    Convert a value to an exact Fraction.

    Floats convert to their exact binary-rational value, strings accept
    "p/q", integers and decimal literals ("1.2" is 6/5).

    Raises:
        ValueError: for non-finite floats or unparsable strings
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float) and not math.isfinite(value):
        raise ValueError(f"non-finite value {value!r} has no rational form")
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


def format_rational(value: Fraction) -> str:
    """Render a rational as "p/q" (always with a denominator, e.g. "1/1")."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def parse_rational(text: str) -> Fraction:
    """Inverse of format_rational; also accepts integer and decimal literals."""
    return to_fraction(text)
