"""
Greedy open-set decomposition of a sampled nonnegative function.

Every sample is expanded through the exact rational recursion at its
double-precision value f(x_i). Samples sharing a value share a mask column,
so the recursion runs once per distinct value.
"""
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from calculus.coefficients import CoefficientSequence
from calculus.scalar import ScaledTerms, uniform_error_bounds
from dsl.ast import FunctionAST
from dsl.evaluator import evaluate_many
from models.config import DEFAULT_EPSILONS
from models.domain import SampledDomain
from models.reports import NOT_REACHED, ErrorReport, LevelError, Violation
from utils.errors import DomainSpecError
from utils.logging_config import get_logger
from utils.rationals import format_rational

logger = get_logger(__name__)

CHUNK_SIZE = 4096
VMAX_MARGIN = Fraction(11, 10)

GRID_CAVEAT = (
    "sup error is taken over grid nodes; it underestimates the true sup norm "
    "by at most the modulus of continuity of the error over half a mesh width"
)
FINITE_CAVEAT = "sup error is taken over every point of the finite metric space"

# violation kinds reported by verify_invariants
MONOTONE = "monotone"
UNDERAPPROXIMATION = "underapproximation"
OFF_SET_BOUND = "off-set-bound"
UNIFORM_BOUND = "uniform-bound"

ChunkArgs = Tuple[List[float], List[int], Tuple[int, ...], int]
ChunkResult = Tuple[np.ndarray, np.ndarray, List[float], np.ndarray]


def _expand_chunk(args: ChunkArgs) -> ChunkResult:
    """
    Expand a chunk of distinct values.

    Returns:
        (bits of shape (levels, k), per-level max error, per-level
        count-weighted error sums, boundary-fragile flags)
    """
    values, counts, numerators, denominator = args
    levels = len(numerators)
    bits = np.zeros((levels, len(values)), dtype=bool)
    errors = np.zeros((len(values), levels), dtype=np.float64)
    fragile = np.zeros(len(values), dtype=bool)

    for idx, v in enumerate(values):
        num, den = float(v).as_integer_ratio()
        ulp_num, ulp_den = math.ulp(float(v)).as_integer_ratio()
        lhs = num * denominator
        scale = den * denominator
        tolerance = ulp_num * scale
        s = 0
        error = lhs / scale
        row = errors[idx]
        for n, a in enumerate(numerators):
            gap = lhs - (a + s) * den
            if gap > 0:
                s += a
                bits[n, idx] = True
                error = (lhs - s * den) / scale
            # |v - threshold| within one ulp of v
            if abs(gap) * ulp_den <= tolerance:
                fragile[idx] = True
            row[n] = error

    sup = errors.max(axis=0) if len(values) else np.zeros(levels)
    weights = np.asarray(counts, dtype=np.float64)
    weighted = [math.fsum(errors[:, n] * weights) for n in range(levels)]
    return bits, sup, weighted, fragile


def _run_chunks(chunks: List[ChunkArgs], workers: int) -> List[ChunkResult]:
    """Results in chunk order, whatever the worker count."""
    if workers <= 1 or len(chunks) <= 1:
        return [_expand_chunk(chunk) for chunk in chunks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_expand_chunk, chunks))


def default_vmax(values: np.ndarray) -> Fraction:
    """Analysed value range: 10% above the largest sampled value (1 for f == 0)."""
    top = float(values.max()) if values.size else 0.0
    if top <= 0:
        return Fraction(1)
    return VMAX_MARGIN * Fraction(top)


@dataclass(frozen=True, eq=False)
class Decomposition:
    """
    Membership masks and error curves of f over a sampled domain.

    Masks are stored bit-packed per level; mask(n) unpacks level n.
    """
    domain: SampledDomain
    fn: FunctionAST
    seq: CoefficientSequence
    levels: int
    values: np.ndarray
    vmax: Fraction
    packed_masks: np.ndarray
    sup_error: np.ndarray
    mean_error: np.ndarray
    member_counts: np.ndarray
    fragile: np.ndarray

    @property
    def size(self) -> int:
        return int(self.values.shape[0])

    def mask(self, level: int) -> np.ndarray:
        """Membership of every sample in G_level (levels start at 1)."""
        if not 1 <= level <= self.levels:
            raise IndexError(f"level {level} outside 1..{self.levels}")
        return np.unpackbits(self.packed_masks[level - 1], count=self.size).astype(bool)

    def masks(self) -> np.ndarray:
        """All masks, shape (levels, samples)."""
        return np.unpackbits(self.packed_masks, axis=1, count=self.size).astype(bool)

    def mask_grid(self, level: int) -> np.ndarray:
        """Mask of one level in the domain's grid shape."""
        return self.mask(level).reshape(self.domain.shape)

    def partial_sum_values(self, level: int) -> np.ndarray:
        """S_level at every sample, as doubles."""
        if not 0 <= level <= self.levels:
            raise IndexError(f"level {level} outside 0..{self.levels}")
        terms = np.array([float(a) for a in self.seq.terms(level)], dtype=np.float64)
        return terms @ self.masks()[:level].astype(np.float64)

    @property
    def boundary_fragile_count(self) -> int:
        return int(self.fragile.sum())

    @property
    def max_value(self) -> float:
        return float(self.values.max()) if self.size else 0.0

    def with_flipped_bit(self, level: int, sample: int) -> "Decomposition":
        """Copy with one membership bit inverted (error curves left as they were)."""
        if not 0 <= sample < self.size:
            raise IndexError(f"sample {sample} outside 0..{self.size - 1}")
        masks = self.masks()
        masks[level - 1, sample] = ~masks[level - 1, sample]
        return replace(self, packed_masks=np.packbits(masks, axis=1))


def decompose(
    domain: SampledDomain,
    fn: FunctionAST,
    seq: CoefficientSequence,
    levels: int,
    workers: int = 1,
    chunk_size: int = CHUNK_SIZE
) -> Decomposition:
    """
    Apply the greedy recursion at every sample of the domain.

    Args:
        domain: Sampled compact domain
        fn: Parsed function (dimension must match the domain)
        seq: Coefficient sequence
        levels: Number of levels N >= 1
        workers: Worker processes; output is identical for every count
        chunk_size: Distinct values per work item

    Returns:
        Decomposition

    Raises:
        NegativeValue: f < 0 at some sample
        DomainError: f cannot be evaluated at some sample
    """
    if levels < 1:
        raise ValueError(f"level count must be >= 1, got {levels}")
    if fn.dim != domain.dim:
        raise DomainSpecError(f"function has dimension {fn.dim}, domain has dimension {domain.dim}")

    values = evaluate_many(fn, domain.coordinates_array())
    distinct, inverse, counts = np.unique(values, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    scaled = ScaledTerms.from_sequence(seq, levels)

    chunks: List[ChunkArgs] = [
        (distinct[i:i + chunk_size].tolist(), counts[i:i + chunk_size].tolist(), scaled.numerators, scaled.denominator)
        for i in range(0, len(distinct), chunk_size)
    ]
    logger.debug(f"decompose: {values.size} samples, {len(distinct)} distinct values, {len(chunks)} chunks")
    results = _run_chunks(chunks, workers)

    bits = np.concatenate([r[0] for r in results], axis=1)
    sup = np.max(np.stack([r[1] for r in results]), axis=0)
    weighted = [math.fsum(r[2][n] for r in results) for n in range(levels)]
    fragile_distinct = np.concatenate([r[3] for r in results])

    masks = bits[:, inverse]
    fragile = fragile_distinct[inverse]
    if fragile.any():
        logger.warning(f"{int(fragile.sum())} samples lie within one ulp of a level threshold (boundary-fragile)")

    return Decomposition(
        domain=domain,
        fn=fn,
        seq=seq,
        levels=levels,
        values=values,
        vmax=default_vmax(values),
        packed_masks=np.packbits(masks, axis=1),
        sup_error=sup,
        mean_error=np.asarray(weighted, dtype=np.float64) / values.size,
        member_counts=masks.sum(axis=1),
        fragile=fragile,
    )


def eps_key(eps: float) -> str:
    """Table key of a tolerance, e.g. "0.01"."""
    return repr(float(eps))


def n_eps_table(sup_error: Sequence[float], eps_values: Iterable[float]) -> Dict[str, object]:
    """N(eps): least level with sup error <= eps, or "not reached"."""
    table: Dict[str, object] = {}
    for eps in sorted(set(float(e) for e in eps_values), reverse=True):
        reached = np.flatnonzero(np.asarray(sup_error) <= eps)
        table[eps_key(eps)] = int(reached[0]) + 1 if reached.size else NOT_REACHED
    return table


def error_report(dec: Decomposition, eps: Optional[Iterable[float]] = None) -> ErrorReport:
    """
    Per-level sup/mean error, fraction of samples in G_n and the N(eps) table.

    Args:
        dec: Decomposition
        eps: Extra tolerances (the defaults 0.1, 0.01, 0.001 are always included)

    Returns:
        ErrorReport
    """
    eps_values = set(DEFAULT_EPSILONS) | set(float(e) for e in (eps or []))
    rows = [
        LevelError(
            level=n,
            sup_error=float(dec.sup_error[n - 1]),
            mean_error=float(dec.mean_error[n - 1]),
            frac_in_G=float(dec.member_counts[n - 1]) / dec.size,
        )
        for n in range(1, dec.levels + 1)
    ]
    return ErrorReport(
        levels=rows,
        n_eps=n_eps_table(dec.sup_error, eps_values),
        boundary_fragile_samples=dec.boundary_fragile_count,
        caveat=GRID_CAVEAT if dec.domain.is_grid else FINITE_CAVEAT,
    )


def _fiber_representatives(dec: Decomposition) -> Tuple[np.ndarray, np.ndarray]:
    """First sample of every distinct (value, mask column) pair, and the group sizes."""
    columns = np.packbits(dec.masks().T, axis=1)
    value_bytes = dec.values.astype(np.float64).view(np.uint8).reshape(dec.size, 8)
    keys = np.concatenate([value_bytes, columns], axis=1)
    _, first, sizes = np.unique(keys, axis=0, return_index=True, return_counts=True)
    order = np.argsort(first)
    return first[order], sizes[order]


def verify_invariants(dec: Decomposition) -> List[Violation]:
    """
    Check the decomposition's invariants exactly at every sample.

    (a) S_n nondecreasing in n, (b) S_n < f where f > 0 and S_n = 0 where
    f = 0, (c) f - S_n <= a_{n+1} wherever mask_{n+1} = 0, (d) f - S_n <= B_n
    with B_n the derived uniform bound for M = max f.

    Returns:
        Violations (empty on a correct build), one per sample fiber and check
    """
    scaled = ScaledTerms.from_sequence(dec.seq, dec.levels)
    d = scaled.denominator
    numerators = scaled.numerators
    top = Fraction(dec.max_value)
    # scaled by d, compared against (v - S_n) * den * d
    bounds = [b * d for b in uniform_error_bounds(dec.seq, dec.levels, top)]
    masks = dec.masks()

    violations: List[Violation] = []
    representatives, sizes = _fiber_representatives(dec)
    for sample, size in zip(representatives.tolist(), sizes.tolist()):
        num, den = float(dec.values[sample]).as_integer_ratio()
        lhs = num * d
        column = masks[:, sample]
        shared = f" ({size} samples share this fiber)" if size > 1 else ""
        found = set()

        def flag(kind: str, level: int, detail: str):
            if kind not in found:
                found.add(kind)
                violations.append(Violation(kind=kind, sample=sample, level=level, detail=detail + shared))

        # n = 0: the first level may only be skipped when v <= a_1
        if not column[0] and lhs - 0 > numerators[0] * den:
            flag(OFF_SET_BOUND, 0, f"mask_1 = 0 but f - S_0 > a_1 at f = {format_rational(Fraction(num, den))}")

        s = 0
        for n in range(1, dec.levels + 1):
            previous = s
            if column[n - 1]:
                s += numerators[n - 1]
            if s < previous:
                flag(MONOTONE, n, f"S_{n} < S_{n - 1}")
            if num > 0 and s * den >= lhs:
                flag(UNDERAPPROXIMATION, n, f"S_{n} = {format_rational(Fraction(s, d))} >= f")
            if num == 0 and s != 0:
                flag(UNDERAPPROXIMATION, n, f"S_{n} = {format_rational(Fraction(s, d))} but f = 0")
            if n < dec.levels and not column[n] and lhs - s * den > numerators[n] * den:
                flag(OFF_SET_BOUND, n, f"mask_{n + 1} = 0 but f - S_{n} > a_{n + 1}")
            bound = bounds[n - 1]
            if (lhs - s * den) > bound * den:
                flag(UNIFORM_BOUND, n, f"f - S_{n} exceeds the derived bound {format_rational(bound / d)}")

    if violations:
        logger.warning(f"verify_invariants: {len(violations)} violations")
    return violations
