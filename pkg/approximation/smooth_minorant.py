"""
Smooth bump minorants placed inside the open cores of the level sets.

The open core of level n is f^-1(interior(U_n)); a closed ball inside it
hosts one mollifier bump of height a_n, so the bump series stays below
S_N <= f.
"""
import math
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import ndimage

from approximation.decomposition import Decomposition, decompose, default_vmax
from calculus.coefficients import CoefficientSequence
from calculus.scalar import iterate_levels
from dsl.ast import FunctionAST
from dsl.evaluator import evaluate_many
from models.domain import SampledDomain
from models.reports import BumpSpec, ResidualReport
from utils.errors import DomainSpecError, DominationViolation
from utils.logging_config import get_logger
from utils.rationals import RationalLike, format_rational, to_fraction

logger = get_logger(__name__)

GRADIENT_STEP = 1e-3
MIN_RADIUS_MESHES = 2


def _float_at_most(value: Fraction) -> float:
    """Largest double not above value."""
    x = float(value)
    if Fraction(x) > value:
        x = math.nextafter(x, -math.inf)
    return x


def bump_values(bump: BumpSpec, points: np.ndarray) -> np.ndarray:
    """
    Evaluate height * exp(1 - 1/(1 - t^2)), t = |x - center| / radius, zero for t >= 1.

    The height is rounded down to a double, so 0 <= B <= height holds in
    floating point too.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, len(bump.center))
    center = np.array([float(c) for c in bump.center])
    radius = float(bump.radius)
    height = _float_at_most(bump.height)

    u = 1.0 - np.sum((points - center) ** 2, axis=1) / radius ** 2
    inside = u > 0
    with np.errstate(divide="ignore", over="ignore", under="ignore", invalid="ignore"):
        shape = np.exp(1.0 - 1.0 / np.where(inside, u, 1.0))
    return np.where(inside, height * shape, 0.0)


def boundary_gradient(bump: BumpSpec, step: Optional[float] = None) -> float:
    """
    Largest central finite-difference slope across the support boundary.

    Evaluated at center + radius * e_k along every axis, with step
    GRADIENT_STEP * radius unless given.
    """
    radius = float(bump.radius)
    delta = GRADIENT_STEP * radius if step is None else step
    center = np.array([float(c) for c in bump.center])
    slopes = []
    for axis in range(len(center)):
        unit = np.zeros(len(center))
        unit[axis] = 1.0
        edge = center + radius * unit
        ahead, behind = bump_values(bump, np.stack([edge + delta * unit, edge - delta * unit]))
        slopes.append(abs(ahead - behind) / (2 * delta))
    return float(max(slopes))


def core_masks(
    values: np.ndarray,
    seq: CoefficientSequence,
    levels: int,
    vmax: RationalLike
) -> Dict[int, np.ndarray]:
    """
    Samples in f^-1(interior(U_n)) for n = 1..levels.

    Levels past an early stop of the level-set lift are absent.
    """
    vmax = to_fraction(vmax)
    distinct, inverse = np.unique(values, return_inverse=True)
    inverse = inverse.reshape(-1)
    fractions = [Fraction(v) for v in distinct.tolist()]

    masks: Dict[int, np.ndarray] = {}
    for state in iterate_levels(seq, levels, vmax):
        core = state.upper_set().interior(upper=vmax)
        member = np.fromiter((core.contains(v) for v in fractions), dtype=bool, count=len(fractions))
        masks[state.index] = member[inverse]
    return masks


def open_core(
    level: int,
    fn: FunctionAST,
    domain: SampledDomain,
    seq: CoefficientSequence,
    vmax: Optional[RationalLike] = None
) -> np.ndarray:
    """
    Sample mask of f^-1(interior(U_level)), an open subset of G_level.

    Args:
        level: Level n >= 1
        fn: Parsed function
        domain: Grid domain on a box
        seq: Exactly rational coefficient sequence
        vmax: Analysed value range (default: 10% above max f)

    Returns:
        Boolean mask over the samples (possibly empty)
    """
    if not domain.is_grid:
        raise DomainSpecError("open cores need a grid domain on a box")
    values = evaluate_many(fn, domain.coordinates_array())
    bound = default_vmax(values) if vmax is None else to_fraction(vmax)
    masks = core_masks(values, seq, level, bound)
    return masks.get(level, np.zeros(values.shape[0], dtype=bool))


def _integer_sqrt(squares: np.ndarray) -> np.ndarray:
    """floor(sqrt(x)) for nonnegative int64 arrays."""
    root = np.floor(np.sqrt(squares.astype(np.float64))).astype(np.int64)
    root -= (root * root > squares).astype(np.int64)
    root += ((root + 1) * (root + 1) <= squares).astype(np.int64)
    return root


def inscribe_ball(mask: np.ndarray, domain: SampledDomain) -> Optional[Tuple[List[Fraction], Fraction]]:
    """
    Largest grid-centred ball inside a sample mask.

    Distances are measured in mesh units to the nearest sample outside the
    mask and to the box boundary; the radius keeps one mesh width of margin.

    Returns:
        (center, radius) with exact rational coordinates, or None when the
        radius would be below 2h
    """
    if not domain.is_grid:
        raise DomainSpecError("inscribed balls need a grid domain")
    mesh = domain.mesh
    if len(set(mesh)) != 1:
        raise DomainSpecError("inscribed balls need the same mesh along every axis")
    h = mesh[0]

    grid = np.asarray(mask, dtype=bool).reshape(domain.shape)
    if not grid.any():
        return None

    index = np.indices(domain.shape)
    box = np.min(np.stack([np.minimum(i, n - 1 - i) for i, n in zip(index, domain.shape)]), axis=0)
    if grid.all():
        reach = box
    else:
        _, nearest = ndimage.distance_transform_edt(grid, return_indices=True)
        squares = sum((nearest[k] - index[k]).astype(np.int64) ** 2 for k in range(grid.ndim))
        reach = np.minimum(_integer_sqrt(squares), box)
    reach = np.where(grid, reach, 0)

    best = int(np.argmax(reach))
    steps = int(reach.flat[best]) - 1
    if steps < MIN_RADIUS_MESHES:
        return None
    center_index = tuple(int(i) for i in np.unravel_index(best, domain.shape))
    return domain.node(center_index), steps * h


def _check_domination(
    bumps: List[BumpSpec],
    contributions: List[np.ndarray],
    dec: Decomposition,
    cores: Dict[int, np.ndarray]
) -> int:
    """
    Exact check of sum_j B_j <= f, with every positive bump inside the open
    core of its level (and so inside G_j).

    Returns:
        Number of samples where some bump is positive
    """
    active_any = np.zeros(dec.size, dtype=bool)
    for bump, values in zip(bumps, contributions):
        active = values > 0
        core = cores.get(bump.level, np.zeros(dec.size, dtype=bool))
        off_core = active & ~core
        if off_core.any():
            sample = int(np.flatnonzero(off_core)[0])
            raise DominationViolation(
                f"level {bump.level} bump is positive at sample {sample} outside the open core of level {bump.level}"
            )
        outside = active & ~dec.mask(bump.level)
        if outside.any():
            sample = int(np.flatnonzero(outside)[0])
            raise DominationViolation(f"level {bump.level} bump is positive at sample {sample} outside G_{bump.level}")
        if values.size and Fraction(float(values.max())) > bump.height:
            raise DominationViolation(f"level {bump.level} bump exceeds its height")
        active_any |= active

    stacked = np.stack(contributions) if contributions else np.zeros((0, dec.size))
    for sample in np.flatnonzero(active_any).tolist():
        column = stacked[:, sample]
        total = sum((Fraction(float(x)) for x in column[column > 0]), Fraction(0))
        if total > Fraction(float(dec.values[sample])):
            raise DominationViolation(
                f"bump sum {float(total)!r} exceeds f = {float(dec.values[sample])!r} at sample {sample}"
            )
    return int(active_any.sum())


def minorize(
    fn: FunctionAST,
    domain: SampledDomain,
    seq: CoefficientSequence,
    levels: int,
    workers: int = 1
) -> Tuple[List[BumpSpec], ResidualReport]:
    """
    Build one smooth bump per level inside the level's open core.

    Args:
        fn: Parsed function, nonnegative on the box
        domain: Grid domain on a box (same mesh along every axis)
        seq: Exactly rational coefficient sequence
        levels: Number of levels N
        workers: Worker processes for the underlying decomposition

    Returns:
        (bumps ordered by level, residual report)

    Raises:
        DominationViolation: the bump series exceeds f at some sample
    """
    if not domain.is_grid:
        raise DomainSpecError("smooth minorants need a grid domain on a box")
    dec = decompose(domain, fn, seq, levels, workers)
    cores = core_masks(dec.values, seq, levels, dec.vmax)

    bumps: List[BumpSpec] = []
    skipped: List[int] = []
    for level in range(1, levels + 1):
        core = cores.get(level)
        ball = inscribe_ball(core, domain) if core is not None and core.any() else None
        if ball is None:
            skipped.append(level)
            continue
        center, radius = ball
        bumps.append(BumpSpec(level=level, center=center, radius=radius, height=seq.value(level)))

    points = domain.coordinates_array()
    contributions = [bump_values(bump, points) for bump in bumps]
    checked = _check_domination(bumps, contributions, dec, cores)

    total = np.sum(contributions, axis=0) if contributions else np.zeros(dec.size)
    residual = np.maximum(dec.values - total, 0.0)
    gradients = [boundary_gradient(bump) for bump in bumps]
    height_sum = sum((bump.height for bump in bumps), Fraction(0))

    notes = [
        "bumps sit in f^-1(interior(U_j)), an open subset of G_j",
        f"the bump series is a finite sum with heights summing to {format_rational(height_sum)}, "
        "so its partial sums converge uniformly on the box",
    ]
    if skipped:
        notes.append(f"{len(skipped)} levels skipped: their open core holds no ball of radius 2h")

    logger.info(f"minorize: {len(bumps)} bumps, {len(skipped)} levels skipped, {checked} samples checked")
    report = ResidualReport(
        sup_residual=float(residual.max()) if residual.size else 0.0,
        mean_residual=float(residual.mean()) if residual.size else 0.0,
        emitted_levels=[bump.level for bump in bumps],
        skipped_levels=skipped,
        height_sum=format_rational(height_sum),
        max_boundary_gradient=max(gradients, default=0.0),
        domination_checked_samples=checked,
        notes=notes,
    )
    return bumps, report
