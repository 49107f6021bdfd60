"""
Pointwise greedy recursion and its exact lift to scalar level sets.

For a value v >= 0 the recursion is

    s_0 = 0,  b_n = [v > a_n + s_{n-1}],  s_n = s_{n-1} + a_n * b_n

and the level set U_n collects every v with b_n = 1. Since membership of a
point x in G_n depends only on v = f(x), G_n = f^-1(U_n).

All rationals handled here are integers over one common denominator; the
Fraction views are built only at the API boundary.
"""
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator, List, Optional, Sequence, Tuple

from calculus.coefficients import CoefficientSequence
from calculus.intervals import Interval, RationalIntervalSet
from models.config import DEFAULT_CROSS_VALIDATION_SAMPLES, DEFAULT_PIECE_CAP
from models.reports import (
    LevelAudit,
    OpennessAuditReport,
    SemicontinuityMode,
    SemicontinuityVerdict,
    Verdict,
    VerdictMethod,
)
from utils.errors import CrossValidationMismatch, InexactSequence, PieceBudgetExceeded
from utils.logging_config import get_logger
from utils.rationals import RationalLike, format_rational, to_fraction

logger = get_logger(__name__)

PRECISION_FLOOR = Fraction(1, 2 ** 64)

# scaled piece: (lo, lo_closed, hi, hi_closed, value), all endpoints and values
# are integer numerators over the profile's denominator
ScaledPiece = Tuple[int, bool, int, bool, int]


class ScaledTerms:
    """Terms a_1..a_N written as integer numerators over a common denominator."""

    def __init__(self, terms: Sequence[Fraction], extra_denominator: int = 1):
        self.terms = tuple(terms)
        self.denominator = math.lcm(extra_denominator, *(t.denominator for t in self.terms))
        self.numerators = tuple(t.numerator * (self.denominator // t.denominator) for t in self.terms)

    @classmethod
    def from_sequence(cls, seq: CoefficientSequence, n: int, extra_denominator: int = 1) -> "ScaledTerms":
        return cls(seq.terms(n), extra_denominator)

    def scale(self, value: Fraction) -> int:
        """Numerator of value over the common denominator (must divide exactly)."""
        scaled = value * self.denominator
        if scaled.denominator != 1:
            raise ValueError(f"{value} is not representable over the common denominator")
        return scaled.numerator


def expand_scaled(
    v_num: int,
    v_den: int,
    numerators: Sequence[int],
    denominator: int
) -> Tuple[List[int], List[int]]:
    """
    Run the recursion for v = v_num / v_den with integer-scaled terms.

    Returns:
        (bits, scaled partial sums) with s_n = sums[n-1] / denominator
    """
    lhs = v_num * denominator
    s = 0
    bits: List[int] = []
    sums: List[int] = []
    for a in numerators:
        if lhs > (a + s) * v_den:
            s += a
            bits.append(1)
        else:
            bits.append(0)
        sums.append(s)
    return bits, sums


@dataclass(frozen=True)
class ExpansionTrace:
    """Bits, partial sums and errors of the recursion at one value v."""
    v: Fraction
    bits: Tuple[int, ...]
    partial_sums: Tuple[Fraction, ...]
    errors: Tuple[Fraction, ...]

    @property
    def final_sum(self) -> Fraction:
        return self.partial_sums[-1]

    @property
    def final_error(self) -> Fraction:
        return self.errors[-1]


def expand_point(v: RationalLike, seq: CoefficientSequence, levels: int) -> ExpansionTrace:
    """
    Expand one nonnegative value through the greedy recursion.

    Args:
        v: Value f(x) >= 0 (floats are taken at their exact binary value)
        seq: Coefficient sequence
        levels: Number of levels N >= 1

    Returns:
        ExpansionTrace with exact rational partial sums and errors
    """
    v = to_fraction(v)
    if v < 0:
        raise ValueError(f"expand_point needs v >= 0, got {v}")
    if levels < 1:
        raise ValueError(f"level count must be >= 1, got {levels}")

    scaled = ScaledTerms.from_sequence(seq, levels)
    bits, sums = expand_scaled(v.numerator, v.denominator, scaled.numerators, scaled.denominator)
    partial_sums = tuple(Fraction(s, scaled.denominator) for s in sums)
    return ExpansionTrace(
        v=v,
        bits=tuple(bits),
        partial_sums=partial_sums,
        errors=tuple(v - s for s in partial_sums),
    )


@dataclass(frozen=True)
class PiecewiseConstantProfile:
    """
    The scalar partial sum s_n on [0, vmax] as a partition into pieces.

    Each piece carries its endpoint attachment flags, so every breakpoint
    belongs to exactly one piece (possibly a degenerate point piece).
    """
    denominator: int
    scaled_pieces: Tuple[ScaledPiece, ...]

    def __len__(self) -> int:
        return len(self.scaled_pieces)

    @cached_property
    def intervals(self) -> List[Interval]:
        d = self.denominator
        return [Interval(Fraction(lo, d), lc, Fraction(hi, d), hc) for lo, lc, hi, hc, _ in self.scaled_pieces]

    @cached_property
    def values(self) -> List[Fraction]:
        return [Fraction(value, self.denominator) for *_, value in self.scaled_pieces]

    @property
    def breakpoints(self) -> List[Fraction]:
        """All piece boundaries, ascending and without repeats."""
        points = sorted({Fraction(p[0], self.denominator) for p in self.scaled_pieces}
                        | {Fraction(p[2], self.denominator) for p in self.scaled_pieces})
        return points

    def value_at(self, v: RationalLike) -> Fraction:
        """s_n(v) for v in [0, vmax]."""
        v = to_fraction(v)
        for interval, value in zip(self.intervals, self.values):
            if interval.contains(v):
                return value
        raise ValueError(f"{v} lies outside the profile range")

    def midpoints(self) -> List[Fraction]:
        """One interior point per non-degenerate piece."""
        return [(i.lo + i.hi) / 2 for i in self.intervals if not i.is_degenerate]

    def lsc_failures(self) -> List[Fraction]:
        """
        Breakpoints where s_n is not lower semi-continuous.

        At a breakpoint the attached value must not exceed the value of
        either adjacent piece.
        """
        failures: List[int] = []
        pieces = self.scaled_pieces
        for k, (lo, lc, hi, hc, value) in enumerate(pieces):
            prev_value = pieces[k - 1][4] if k > 0 else None
            next_value = pieces[k + 1][4] if k + 1 < len(pieces) else None
            if lo == hi:
                neighbours = [x for x in (prev_value, next_value) if x is not None]
                if any(value > x for x in neighbours):
                    failures.append(lo)
                continue
            if hc and next_value is not None and value > next_value:
                failures.append(hi)
            if lc and prev_value is not None and value > prev_value:
                failures.append(lo)
        return [Fraction(p, self.denominator) for p in sorted(set(failures))]


@dataclass(frozen=True)
class LevelState:
    """U_n and s_n after one level of the set recursion."""
    index: int
    term: Fraction
    denominator: int
    scaled_upper: Tuple[Tuple[int, bool, int, bool], ...]
    profile: PiecewiseConstantProfile

    def upper_set(self) -> RationalIntervalSet:
        """U_n truncated to [0, vmax]."""
        d = self.denominator
        return RationalIntervalSet.of(
            Interval(Fraction(lo, d), lc, Fraction(hi, d), hc) for lo, lc, hi, hc in self.scaled_upper
        )


@dataclass(frozen=True)
class LevelSetResult:
    """Outcome of level_sets."""
    vmax: Fraction
    sets: Tuple[RationalIntervalSet, ...]
    profile: PiecewiseConstantProfile
    tail: Interval
    tail_value: Fraction
    terminated_at: Optional[int] = None
    precision_warning: Optional[str] = None

    def __iter__(self):
        # allows `sets, profile = level_sets(...)`
        return iter((self.sets, self.profile))


def _merge_equal(pieces: List[ScaledPiece]) -> List[ScaledPiece]:
    """Merge neighbouring pieces carrying the same value."""
    merged: List[ScaledPiece] = []
    for piece in pieces:
        if merged and merged[-1][4] == piece[4]:
            lo, lc, _, _, value = merged[-1]
            merged[-1] = (lo, lc, piece[2], piece[3], value)
        else:
            merged.append(piece)
    return merged


def _split_level(pieces: List[ScaledPiece], a: int):
    """One level: U = {v : v > a + s(v)} piece by piece, then s += a on U."""
    upper: List[Tuple[int, bool, int, bool]] = []
    updated: List[ScaledPiece] = []
    for lo, lc, hi, hc, value in pieces:
        t = a + value
        if t < lo or (t == lo and not lc):
            upper.append((lo, lc, hi, hc))
            updated.append((lo, lc, hi, hc, value + a))
        elif t >= hi:
            updated.append((lo, lc, hi, hc, value))
        else:
            upper.append((t, False, hi, hc))
            updated.append((lo, lc, t, True, value))
            updated.append((t, False, hi, hc, value + a))
    return upper, _merge_equal(updated)


def iterate_levels(
    seq: CoefficientSequence,
    levels: int,
    vmax: RationalLike,
    piece_cap: int = DEFAULT_PIECE_CAP
) -> Iterator[LevelState]:
    """
    Lift the recursion from points to sets, one level at a time.

    Stops early (with a warning) when a term falls below 2^-64 * vmax.

    Raises:
        InexactSequence: the sequence has approximated terms
        PieceBudgetExceeded: the partition grows beyond piece_cap
    """
    vmax = to_fraction(vmax)
    if levels < 1:
        raise ValueError(f"level count must be >= 1, got {levels}")
    if vmax <= 0:
        raise ValueError(f"vmax must be positive, got {vmax}")
    if not seq.exact:
        raise InexactSequence(
            f"{seq.family.value} terms are approximations; exact level sets need an exactly rational sequence"
        )

    scaled = ScaledTerms.from_sequence(seq, levels, extra_denominator=vmax.denominator)
    d = scaled.denominator
    pieces: List[ScaledPiece] = [(0, True, scaled.scale(vmax), True, 0)]
    floor = vmax * PRECISION_FLOOR

    for n, (term, a) in enumerate(zip(scaled.terms, scaled.numerators), start=1):
        if term < floor:
            logger.warning(f"level {n}: term {format_rational(term)} below 2^-64 * vmax, stopping")
            return
        upper, pieces = _split_level(pieces, a)
        if len(pieces) > piece_cap:
            raise PieceBudgetExceeded(n, len(pieces), piece_cap)
        logger.debug(f"level {n}: {len(pieces)} pieces, {len(upper)} intervals in U")
        yield LevelState(
            index=n,
            term=term,
            denominator=d,
            scaled_upper=tuple(upper),
            profile=PiecewiseConstantProfile(d, tuple(pieces)),
        )


def level_sets(
    seq: CoefficientSequence,
    levels: int,
    vmax: RationalLike,
    piece_cap: int = DEFAULT_PIECE_CAP
) -> LevelSetResult:
    """
    Compute U_1..U_N on [0, vmax] and the final scalar profile s_N.

    Args:
        seq: Exactly rational coefficient sequence
        levels: Number of levels N >= 1
        vmax: Upper end of the analysed value range (> 0)
        piece_cap: Maximum number of profile pieces

    Returns:
        LevelSetResult; the tail above the analysed range is the open ray
        (a_1 + ... + a_N, +inf), on which every bit fires
    """
    vmax = to_fraction(vmax)
    sets: List[RationalIntervalSet] = []
    profile: Optional[PiecewiseConstantProfile] = None
    for state in iterate_levels(seq, levels, vmax, piece_cap):
        sets.append(state.upper_set())
        profile = state.profile

    terminated_at = None
    warning = None
    if len(sets) < levels:
        terminated_at = len(sets) + 1
        warning = f"terms below 2^-64 * vmax from level {terminated_at}; analysis stopped"
    if profile is None:
        profile = PiecewiseConstantProfile(vmax.denominator, ((0, True, vmax.numerator, True, 0),))

    total = seq.partial_sum(len(sets))
    return LevelSetResult(
        vmax=vmax,
        sets=tuple(sets),
        profile=profile,
        tail=Interval(total, False, None, False),
        tail_value=total,
        terminated_at=terminated_at,
        precision_warning=warning,
    )


@dataclass(frozen=True)
class OpennessVerdict:
    """Openness of a scalar set in the subspace [0, upper] (or [0, +inf))."""
    is_open: bool
    witnesses: Tuple[Fraction, ...] = ()


def check_openness(u: RationalIntervalSet, upper: Optional[RationalLike] = None) -> OpennessVerdict:
    """
    Decide whether U is open in [0, +inf), or in [0, upper] for truncated sets.

    Every closed endpoint other than 0 (and other than `upper`) is returned
    as a witness v*: for continuous f with v* interior to its range,
    f^-1(U) is not open.
    """
    witnesses = u.closed_endpoints(upper)
    return OpennessVerdict(is_open=not witnesses, witnesses=tuple(witnesses))


def profile_lsc_verdict(profile: PiecewiseConstantProfile) -> SemicontinuityVerdict:
    """
    Exact l.s.c. verdict for the scalar partial sum s_n on [0, vmax].

    When s_n is l.s.c., S_n = s_n o f is l.s.c. for every continuous f and
    f - S_n is u.s.c., even if some U_j is not open.
    """
    failures = profile.lsc_failures()
    return SemicontinuityVerdict(
        mode=SemicontinuityMode.LSC,
        method=VerdictMethod.EXACT_SCALAR,
        verdict=Verdict.FAILS if failures else Verdict.HOLDS,
        witnesses=[format_rational(p) for p in failures],
    )


def uniform_error_bounds(seq: CoefficientSequence, levels: int, bound: RationalLike) -> List[Fraction]:
    """
    Derived uniform error bounds B_1..B_N for all values v <= M.

    B_0 = M and B_n = max(a_n, B_{n-1} - a_n); unrolled this is
    max(a_n, max_k (a_k - a_{k+1} - ... - a_n), M - a_1 - ... - a_n).
    """
    current = to_fraction(bound)
    bounds: List[Fraction] = []
    for a in seq.terms(levels):
        current = max(a, current - a)
        bounds.append(current)
    return bounds


def levels_for_tolerance(
    seq: CoefficientSequence,
    eps: RationalLike,
    bound: RationalLike,
    max_levels: int = 10 ** 6
) -> Optional[int]:
    """Least n with B_n <= eps, or None when not reached within max_levels."""
    eps = to_fraction(eps)
    current = to_fraction(bound)
    for n in range(1, max_levels + 1):
        a = seq.value(n)
        current = max(a, current - a)
        if current <= eps:
            return n
    return None


def _cross_validation_values(vmax: Fraction, profile: PiecewiseConstantProfile, samples: int, seed: int) -> List[Fraction]:
    """Seeded random rationals in [0, vmax], plus breakpoints and midpoints when few enough."""
    rng = random.Random(seed)
    grid = 2 ** 24
    values = [vmax * Fraction(rng.randrange(grid + 1), grid) for _ in range(samples)]
    if 2 * len(profile) + 1 <= samples:
        values.extend(profile.breakpoints)
        values.extend(profile.midpoints())
    return values


def audit(
    seq: CoefficientSequence,
    levels: int,
    vmax: RationalLike,
    samples: int = DEFAULT_CROSS_VALIDATION_SAMPLES,
    seed: int = 0,
    piece_cap: int = DEFAULT_PIECE_CAP
) -> OpennessAuditReport:
    """
    Openness audit of U_1..U_N on [0, vmax], cross-validated against expand_point.

    Raises:
        CrossValidationMismatch: interval membership disagrees with the recursion
    """
    vmax = to_fraction(vmax)
    result = level_sets(seq, levels, vmax, piece_cap)

    entries: List[LevelAudit] = []
    first_non_open = None
    for n, u in enumerate(result.sets, start=1):
        verdict = check_openness(u, upper=vmax)
        if not verdict.is_open and first_non_open is None:
            first_non_open = n
        entries.append(LevelAudit(
            index=n,
            intervals=u.format(),
            open=verdict.is_open,
            witnesses=[format_rational(w) for w in verdict.witnesses],
        ))

    checked = len(result.sets)
    values = _cross_validation_values(vmax, result.profile, samples, seed) if checked else []
    if checked:
        scaled = ScaledTerms.from_sequence(seq, checked)
        for v in values:
            bits, _ = expand_scaled(v.numerator, v.denominator, scaled.numerators, scaled.denominator)
            for n, (bit, u) in enumerate(zip(bits, result.sets), start=1):
                member = u.contains(v)
                if member != bool(bit):
                    raise CrossValidationMismatch(n, v, bit, member)

    notes = []
    if result.precision_warning:
        notes.append(result.precision_warning)
    notes.append("openness judged in the subspace [0, vmax]; the closed end at vmax is the truncation point")

    logger.info(
        f"audit of {levels} levels on [0, {format_rational(vmax)}]: "
        f"first non-open level {first_non_open}, {len(values)} cross-validation values"
    )

    return OpennessAuditReport(
        sequence=seq.descriptor(),
        levels_requested=levels,
        vmax=format_rational(vmax),
        levels=entries,
        first_non_open_level=first_non_open,
        all_open=first_non_open is None,
        cross_validation_samples=len(values),
        cross_validation_mismatches=0,
        tail=result.tail.format(),
        tail_value=format_rational(result.tail_value),
        terminated_at=result.terminated_at,
        notes=notes,
    )
