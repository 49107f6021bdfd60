"""Exact scalar calculus: coefficient sequences, interval sets and level sets."""
from .coefficients import CoefficientSequence, make_sequence, parse_sequence_spec, validate
from .intervals import Interval, RationalIntervalSet
from .scalar import audit, check_openness, expand_point, level_sets, uniform_error_bounds

__all__ = [
    "CoefficientSequence",
    "make_sequence",
    "parse_sequence_spec",
    "validate",
    "Interval",
    "RationalIntervalSet",
    "audit",
    "check_openness",
    "expand_point",
    "level_sets",
    "uniform_error_bounds",
]
