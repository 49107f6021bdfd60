"""
Semicontinuity verdicts and the Dini-style convergence harness.

Two tiers: exact verdicts computed on scalar level sets and profiles, and
sampled defect fields that only ever flag candidates.
"""
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import ndimage

from approximation.decomposition import Decomposition, n_eps_table
from calculus.intervals import RationalIntervalSet
from calculus.scalar import (
    check_openness,
    expand_point,
    iterate_levels,
    profile_lsc_verdict,
    uniform_error_bounds,
)
from models.config import DEFAULT_DEFECT_THRESHOLD, DEFAULT_EPSILONS
from models.domain import SampledDomain
from models.reports import NOT_REACHED, DiniReport, SemicontinuityMode, SemicontinuityVerdict, Verdict, VerdictMethod
from utils.errors import DomainSpecError, MonotonicityViolation, PieceBudgetExceeded, RadiusBelowMesh
from utils.logging_config import get_logger
from utils.rationals import RationalLike, format_rational, to_fraction

logger = get_logger(__name__)

RADIUS_FACTORS = (1, 2, 4)


def scalar_lsc_verdict(u: RationalIntervalSet, upper: Optional[RationalLike] = None) -> SemicontinuityVerdict:
    """
    Exact l.s.c. verdict for indicators of preimages f^-1(U).

    Holds iff U is open in [0, +inf) (or in [0, upper]); the indicator of
    f^-1(U) is then l.s.c. for every continuous f. Fails with the closed
    endpoints as witnesses otherwise.
    """
    openness = check_openness(u, upper)
    return SemicontinuityVerdict(
        mode=SemicontinuityMode.LSC,
        method=VerdictMethod.EXACT_SCALAR,
        verdict=Verdict.HOLDS if openness.is_open else Verdict.FAILS,
        witnesses=[format_rational(w) for w in openness.witnesses],
    )


@dataclass(frozen=True, eq=False)
class DefectField:
    """Multi-scale sampled semicontinuity defects on a grid."""
    mode: SemicontinuityMode
    radii: Tuple[Fraction, ...]
    defects: Tuple[np.ndarray, ...]
    flagged: Tuple[np.ndarray, ...]
    persistent: np.ndarray
    refined: bool
    threshold: float

    def persistent_indices(self) -> List[Tuple[int, ...]]:
        return [tuple(int(i) for i in idx) for idx in np.argwhere(self.persistent)]

    def verdict(self, domain: SampledDomain) -> SemicontinuityVerdict:
        """Sampled verdicts are never definitive; persistent points are the witnesses."""
        witnesses = [
            "(" + ", ".join(format_rational(c) for c in domain.node(idx)) + ")"
            for idx in self.persistent_indices()
        ]
        return SemicontinuityVerdict(
            mode=self.mode,
            method=VerdictMethod.SAMPLED_HEURISTIC,
            verdict=Verdict.INCONCLUSIVE,
            witnesses=witnesses,
        )


def _footprint(mesh: List[Fraction], radius: Fraction) -> np.ndarray:
    """Grid offsets y - x with 0 < |y - x| <= radius."""
    reach = [int(radius // h) for h in mesh]
    footprint = np.zeros([2 * k + 1 for k in reach], dtype=bool)
    for offset in itertools.product(*[range(-k, k + 1) for k in reach]):
        if any(offset) and sum((o * h) ** 2 for o, h in zip(offset, mesh)) <= radius ** 2:
            footprint[tuple(o + k for o, k in zip(offset, reach))] = True
    return footprint


def _defect(g: np.ndarray, mode: SemicontinuityMode, footprint: np.ndarray) -> np.ndarray:
    if mode == SemicontinuityMode.LSC:
        neighbours = ndimage.minimum_filter(g, footprint=footprint, mode="constant", cval=np.inf)
        return g - neighbours
    neighbours = ndimage.maximum_filter(g, footprint=footprint, mode="constant", cval=-np.inf)
    return neighbours - g


def sampled_defect(
    g: np.ndarray,
    domain: SampledDomain,
    mode: SemicontinuityMode = SemicontinuityMode.LSC,
    radius: Optional[RationalLike] = None,
    threshold: float = DEFAULT_DEFECT_THRESHOLD,
    refined_values: Optional[np.ndarray] = None
) -> DefectField:
    """
    Multi-scale sampled semicontinuity defects of grid values g.

    The l.s.c. defect at x is g(x) - min{g(y) : 0 < d(x, y) <= r}, the u.s.c.
    defect max{g(y)} - g(x). Defects are computed at r, 2r and 4r. A node is
    persistent when flagged at r and, on the once-refined grid, at r/2.

    Args:
        g: Values on the grid (flat or in grid shape)
        domain: Grid domain the values live on
        mode: lsc or usc
        radius: Smallest radius r (default: the mesh)
        threshold: Absolute defect threshold
        refined_values: Values on domain.refined(); without them no node is persistent

    Raises:
        RadiusBelowMesh: r smaller than the mesh
    """
    if not domain.is_grid:
        raise DomainSpecError("sampled defects need a grid domain")
    mode = SemicontinuityMode(mode)
    mesh = domain.mesh
    h = min(mesh)
    r = h if radius is None else to_fraction(radius)
    if r < h:
        raise RadiusBelowMesh(f"radius {format_rational(r)} is below the mesh {format_rational(h)}")

    values = np.asarray(g, dtype=np.float64).reshape(domain.shape)
    radii = tuple(r * k for k in RADIUS_FACTORS)
    defects = tuple(_defect(values, mode, _footprint(mesh, rad)) for rad in radii)
    flagged = tuple(d > threshold for d in defects)

    refined = refined_values is not None
    if refined:
        fine = domain.refined()
        fine_values = np.asarray(refined_values, dtype=np.float64).reshape(fine.shape)
        fine_flags = _defect(fine_values, mode, _footprint(fine.mesh, r / 2)) > threshold
        coarse_nodes = tuple(slice(None, None, 2) for _ in fine.shape)
        persistent = flagged[0] & fine_flags[coarse_nodes]
    else:
        persistent = np.zeros(domain.shape, dtype=bool)

    logger.debug(
        f"sampled {mode.value} defect: flagged {[int(f.sum()) for f in flagged]} "
        f"at radii {[format_rational(x) for x in radii]}, {int(persistent.sum())} persistent"
    )
    return DefectField(
        mode=mode,
        radii=radii,
        defects=defects,
        flagged=flagged,
        persistent=persistent,
        refined=refined,
        threshold=threshold,
    )


def usc_certified_levels(dec: Decomposition) -> Tuple[List[int], Optional[int], List[str]]:
    """
    Levels n where f - S_n is certified u.s.c.

    On grids the certificate is an l.s.c. scalar profile s_n (then S_n = s_n o f
    is l.s.c. for continuous f). Also returns the first level whose U_n is not
    open, and notes.
    """
    notes: List[str] = []
    if not dec.domain.is_grid:
        notes.append("finite metric space: every subset is open, so every S_n is l.s.c.")
        return list(range(1, dec.levels + 1)), None, notes
    if not dec.seq.exact:
        notes.append("approximated coefficients: no exact scalar certificate, u.s.c. of f - S_n not certified")
        return [], None, notes

    certified: List[int] = []
    examined = 0
    first_non_open = None
    witness = None
    try:
        for state in iterate_levels(dec.seq, dec.levels, dec.vmax):
            examined = state.index
            if profile_lsc_verdict(state.profile).verdict == Verdict.HOLDS:
                certified.append(state.index)
            if first_non_open is None:
                openness = check_openness(state.upper_set(), upper=dec.vmax)
                if not openness.is_open:
                    first_non_open = state.index
                    witness = openness.witnesses[0]
    except PieceBudgetExceeded as e:
        notes.append(
            f"levels {e.level}..{dec.levels} uncertified: piece budget exhausted at level {e.level} "
            f"({e.pieces} pieces, cap {e.cap})"
        )
    else:
        if examined < dec.levels:
            notes.append(f"levels {examined + 1}..{dec.levels} uncertified: terms fell below the precision floor")

    if first_non_open is not None:
        notes.append(
            f"U_{first_non_open} is not open (witness {format_rational(witness)}); "
            "l.s.c. of S_n via open G_n is not available from that level on"
        )
    # only levels whose profile was actually built can fail
    failed = examined - len(certified)
    if failed:
        notes.append(f"{failed} of {examined} examined levels have a scalar profile that is not l.s.c.")
    return certified, first_non_open, notes


def dini_harness(dec: Decomposition, eps: Optional[Iterable[float]] = None) -> DiniReport:
    """
    Check both uniform-convergence routes for a decomposition.

    Dini route: e_n pointwise nonincreasing and f - S_n u.s.c. (certified per
    level). Bound route: sup error <= B_n with M = max sampled f. Uniform
    convergence is only claimed for a divergent tail with every eps reached.
    Per eps the report also carries the scalar N(eps) at the top fiber and
    the sample value that reaches eps last.

    Raises:
        MonotonicityViolation: an error curve increases
    """
    if dec.levels < 2:
        raise ValueError("the Dini harness needs at least 2 levels")

    # S_n - S_{n-1} = a_n * b_n >= 0 for positive terms
    pointwise = all(a > 0 for a in dec.seq.terms(dec.levels))
    sup_monotone = bool(np.all(np.diff(dec.sup_error) <= 0))
    if not pointwise:
        raise MonotonicityViolation("a nonpositive coefficient makes some partial sum decrease")
    if not sup_monotone:
        level = int(np.flatnonzero(np.diff(dec.sup_error) > 0)[0]) + 2
        raise MonotonicityViolation(f"sup error increases at level {level}")

    bounds = uniform_error_bounds(dec.seq, dec.levels, Fraction(dec.max_value))
    bound_violations = [
        n for n, (error, bound) in enumerate(zip(dec.sup_error.tolist(), bounds), start=1)
        if error > float(bound)
    ]

    eps_values = set(DEFAULT_EPSILONS) | set(float(e) for e in (eps or []))
    n_eps = n_eps_table(dec.sup_error, eps_values)
    unreached = [key for key, n in n_eps.items() if n == NOT_REACHED]

    certified, _, notes = usc_certified_levels(dec)
    if bound_violations:
        notes.append(f"sup error exceeds the derived bound at {len(bound_violations)} levels")
    elif not dec.seq.tail.divergent:
        notes.append(
            f"continuation family {dec.seq.tail.name} has a convergent series: "
            "the derived bound does not tend to 0 and uniform convergence is not certified"
        )
    elif unreached:
        notes.append(
            f"sup error stays below the derived bound, but N(eps) is not reached for eps = {', '.join(unreached)} "
            f"within {dec.levels} levels"
        )
    else:
        notes.append("sup error stays below the derived bound at every level, so convergence is uniform")

    top_fiber = Fraction(dec.max_value)
    top_n_eps, worst_fibers = _fiber_n_eps(dec, n_eps, top_fiber)
    for key, sampled in n_eps.items():
        notes.append(
            f"N({key}) = {sampled} over the samples, last reached at f = {worst_fibers[key]!r}; "
            f"the scalar N({key}) at the top fiber f = {float(top_fiber)!r} is {top_n_eps[key]}"
        )

    return DiniReport(
        monotone=pointwise and sup_monotone,
        pointwise_monotone=pointwise,
        sup_monotone=sup_monotone,
        N_eps=n_eps,
        usc_certified_levels=certified,
        bound_holds=not bound_violations,
        bound_violations=bound_violations,
        top_fiber=float(top_fiber),
        top_fiber_N_eps=top_n_eps,
        worst_fibers=worst_fibers,
        notes=notes,
    )


def _scalar_n_eps(errors: Sequence[Fraction], eps: Fraction) -> Union[int, str]:
    """Least n with e_n <= eps along one exact error curve."""
    return next((n for n, e in enumerate(errors, start=1) if e <= eps), NOT_REACHED)


def _fiber_n_eps(
    dec: Decomposition,
    n_eps: Dict[str, Union[int, str]],
    top_fiber: Fraction
) -> Tuple[Dict[str, Union[int, str]], Dict[str, float]]:
    """
    Scalar N(eps) at the top fiber f = max f, and the fiber that reaches each
    eps last over the samples.

    The last fiber is the sample with the largest error one level before the
    sampled N(eps) (at the last level when eps is not reached).
    """
    top_errors = expand_point(top_fiber, dec.seq, dec.levels).errors
    top_n_eps: Dict[str, Union[int, str]] = {}
    worst_fibers: Dict[str, float] = {}
    for key, sampled in n_eps.items():
        eps = Fraction(float(key))
        top_n_eps[key] = _scalar_n_eps(top_errors, eps)
        level = dec.levels if sampled == NOT_REACHED else int(sampled) - 1
        errors = dec.values - dec.partial_sum_values(level)
        worst_fibers[key] = float(dec.values[int(np.argmax(errors))]) if dec.size else 0.0
    return top_n_eps, worst_fibers
