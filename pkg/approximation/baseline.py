"""Classical dyadic simple-function approximation, for comparison."""
import math
from fractions import Fraction
from typing import Dict, Iterable, List

import numpy as np

from approximation.decomposition import Decomposition
from models.reports import ComparisonReport, ComparisonRow
from utils.logging_config import get_logger
from utils.rationals import RationalLike, to_fraction

logger = get_logger(__name__)

MAX_DYADIC_LEVEL = 1000
CAP_RULE = "phi_n(v) = min(2^-n * floor(2^n * v), 2^n)"


def _check_level(n: int):
    if not 0 <= n <= MAX_DYADIC_LEVEL:
        raise ValueError(f"dyadic level must lie in 0..{MAX_DYADIC_LEVEL}, got {n}")


def dyadic_fraction(v: RationalLike, n: int) -> Fraction:
    """Exact phi_n(v) = min(2^-n * floor(2^n * v), 2^n)."""
    _check_level(n)
    v = to_fraction(v)
    if v < 0:
        raise ValueError(f"dyadic_value needs v >= 0, got {v}")
    scale = 2 ** n
    return min(Fraction(math.floor(v * scale), scale), Fraction(scale))


def dyadic_value(v: RationalLike, n: int) -> float:
    """phi_n(v) as a double (exact for binary-rational v)."""
    return float(dyadic_fraction(v, n))


def dyadic_values(values: np.ndarray, n: int) -> np.ndarray:
    """Vectorized phi_n over double values; scaling by 2^n is exact in binary."""
    _check_level(n)
    values = np.asarray(values, dtype=np.float64)
    cap = math.ldexp(1.0, n)
    return np.minimum(np.ldexp(np.floor(np.ldexp(values, n)), -n), cap)


def dyadic_sup_errors(values: np.ndarray, levels: Iterable[int]) -> Dict[int, float]:
    """Sup over samples of v - phi_n(v) for each level."""
    values = np.asarray(values, dtype=np.float64)
    errors = {}
    for n in sorted(set(levels)):
        errors[n] = float(np.max(values - dyadic_values(values, n))) if values.size else 0.0
    return errors


def compare(dec: Decomposition, dyadic_levels: Iterable[int]) -> ComparisonReport:
    """
    Side-by-side sup-error curves of the greedy construction and the dyadic baseline.

    Rows cover the union of both level ranges; a method without a value at a
    level leaves its column empty.
    """
    dyadic = dyadic_sup_errors(dec.values, dyadic_levels)
    all_levels = sorted(set(range(1, dec.levels + 1)) | set(dyadic))

    rows: List[ComparisonRow] = []
    for level in all_levels:
        greedy = float(dec.sup_error[level - 1]) if 1 <= level <= dec.levels else None
        rows.append(ComparisonRow(level=level, greedy_sup_error=greedy, dyadic_sup_error=dyadic.get(level)))

    notes = [
        f"dyadic cap rule: {CAP_RULE}",
        "dyadic pieces are preimages of half-open intervals [k 2^-n, (k+1) 2^-n), which are not open in general",
        "greedy pieces are preimages of the audited level sets U_n",
    ]
    logger.debug(f"compare: {dec.levels} greedy levels, {len(dyadic)} dyadic levels")
    return ComparisonReport(cap_rule=CAP_RULE, rows=rows, notes=notes)
