"""Sampled decompositions, semicontinuity checks, the dyadic baseline and smooth minorants."""
from .baseline import compare, dyadic_value
from .decomposition import Decomposition, decompose, error_report, verify_invariants
from .semicontinuity import dini_harness, sampled_defect
from .smooth_minorant import inscribe_ball, minorize, open_core

__all__ = [
    "compare",
    "dyadic_value",
    "Decomposition",
    "decompose",
    "error_report",
    "verify_invariants",
    "dini_harness",
    "sampled_defect",
    "inscribe_ball",
    "minorize",
    "open_core",
]
