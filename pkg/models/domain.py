"""Sampled compact domains: regular grids on a box, or explicit finite metric spaces."""
import json
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_serializer, field_validator, model_validator

from models.config import DEFAULT_GRID_1D, DEFAULT_GRID_2D
from utils.errors import DomainSpecError
from utils.rationals import format_rational, to_fraction

METRIC_TOLERANCE = 1e-12


class DomainKind(str, Enum):
    """Kinds of sampled domains."""
    GRID1D = "grid1d"
    GRID2D = "grid2d"
    FINITE_METRIC = "finite-metric"


class SampledDomain(BaseModel):
    """
    Discretization of a compact metric space.

    Grids sample the nodes lo + i*h, i = 0..n-1, h = (hi - lo)/(n - 1) per
    axis (2D nodes in row-major order). Finite metric spaces carry labels,
    coordinates (used to evaluate expressions) and a distance matrix.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    kind: DomainKind
    lo: List[Fraction] = Field(default_factory=list)
    hi: List[Fraction] = Field(default_factory=list)
    points: List[int] = Field(default_factory=list)
    labels: List[str] = Field(default_factory=list)
    coordinates: List[List[float]] = Field(default_factory=list)
    distances: List[List[float]] = Field(default_factory=list)
    source: Optional[str] = None

    @field_validator('lo', 'hi', mode='before')
    @classmethod
    def validate_bounds(cls, v) -> List[Fraction]:
        """Box bounds are exact rationals."""
        return [to_fraction(b) for b in v]

    @field_serializer('lo', 'hi')
    def serialize_bounds(self, bounds: List[Fraction]) -> List[str]:
        return [format_rational(b) for b in bounds]

    @model_validator(mode='after')
    def validate_shape(self) -> "SampledDomain":
        """Grid bounds and metric axioms."""
        if self.kind == DomainKind.FINITE_METRIC:
            self._validate_metric()
            return self

        dim = 1 if self.kind == DomainKind.GRID1D else 2
        if not (len(self.lo) == len(self.hi) == len(self.points) == dim):
            raise ValueError(f"{self.kind.value} needs {dim} bound pair(s) and point count(s)")
        for lo, hi, n in zip(self.lo, self.hi, self.points):
            if not lo < hi:
                raise ValueError(f"grid needs lo < hi, got {lo} and {hi}")
            if n < 2:
                raise ValueError(f"grid needs at least 2 points per axis, got {n}")
        return self

    def _validate_metric(self):
        n = len(self.labels)
        if n == 0:
            raise ValueError("finite metric space needs at least one point")
        if len(set(self.labels)) != n:
            raise ValueError("finite metric labels must be unique")
        if len(self.coordinates) != n or len({len(c) for c in self.coordinates}) != 1:
            raise ValueError("finite metric space needs one coordinate vector of common length per point")

        matrix = np.asarray(self.distances, dtype=np.float64)
        if matrix.shape != (n, n):
            raise ValueError(f"distance matrix must be {n}x{n}, got {matrix.shape}")
        if not np.all(np.isfinite(matrix)) or np.any(matrix < -METRIC_TOLERANCE):
            raise ValueError("distances must be finite and nonnegative")
        if np.any(np.abs(np.diag(matrix)) > METRIC_TOLERANCE):
            raise ValueError("distance matrix must have a zero diagonal")
        if np.any(np.abs(matrix - matrix.T) > METRIC_TOLERANCE):
            raise ValueError("distance matrix must be symmetric")
        # d(i, k) <= d(i, j) + d(j, k) for all i, j, k
        through = matrix[:, :, None] + matrix[None, :, :]
        if np.any(matrix[:, None, :] > through + METRIC_TOLERANCE):
            raise ValueError("distance matrix violates the triangle inequality")

    @property
    def is_grid(self) -> bool:
        return self.kind != DomainKind.FINITE_METRIC

    @property
    def dim(self) -> int:
        if self.kind == DomainKind.FINITE_METRIC:
            return len(self.coordinates[0])
        return len(self.points)

    @property
    def shape(self) -> Tuple[int, ...]:
        if self.kind == DomainKind.FINITE_METRIC:
            return (len(self.labels),)
        return tuple(self.points)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def mesh(self) -> List[Fraction]:
        """Exact grid spacing per axis."""
        if not self.is_grid:
            raise DomainSpecError("finite metric spaces have no mesh")
        return [(hi - lo) / (n - 1) for lo, hi, n in zip(self.lo, self.hi, self.points)]

    def axis_nodes(self, axis: int) -> np.ndarray:
        """Float node coordinates along one axis."""
        lo, hi, n = self.lo[axis], self.hi[axis], self.points[axis]
        return np.array([float(lo + (hi - lo) * i / (n - 1)) for i in range(n)])

    def node(self, index: Tuple[int, ...]) -> List[Fraction]:
        """Exact coordinates of a grid node."""
        return [lo + h * i for lo, h, i in zip(self.lo, self.mesh, index)]

    def coordinates_array(self) -> np.ndarray:
        """Sample coordinates, shape (size, dim)."""
        if not self.is_grid:
            return np.asarray(self.coordinates, dtype=np.float64)
        axes = [self.axis_nodes(k) for k in range(self.dim)]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def refined(self) -> "SampledDomain":
        """Once-refined grid: halves the mesh, old node i becomes node 2i."""
        if not self.is_grid:
            raise DomainSpecError("finite metric spaces cannot be refined")
        return self.model_copy(update={"points": [2 * n - 1 for n in self.points], "source": None})

    def descriptor(self) -> str:
        """Micro-syntax form, e.g. grid1d:0:3:1025."""
        if self.kind == DomainKind.GRID1D:
            return f"grid1d:{_fmt(self.lo[0])}:{_fmt(self.hi[0])}:{self.points[0]}"
        if self.kind == DomainKind.GRID2D:
            return f"grid2d:{_fmt(self.lo[0])}:{_fmt(self.hi[0])}:{self.points[0]}x{self.points[1]}"
        return f"finite:{self.source or '<inline>'}"


def _fmt(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else format_rational(value)


def grid1d(lo, hi, points: int) -> SampledDomain:
    return SampledDomain(kind=DomainKind.GRID1D, lo=[lo], hi=[hi], points=[points])


def grid2d(lo, hi, nx: int, ny: Optional[int] = None) -> SampledDomain:
    return SampledDomain(kind=DomainKind.GRID2D, lo=[lo, lo], hi=[hi, hi], points=[nx, ny or nx])


def load_finite_metric(path: str) -> SampledDomain:
    """
    Load a finite metric space from JSON.

    The file holds {"labels": [...], "coordinates": [[...], ...],
    "distances": [[...], ...]}; distances default to Euclidean distances of
    the coordinates.
    """
    try:
        with open(path, 'r') as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise DomainSpecError(f"cannot read finite metric space {path}: {e}") from e

    coordinates = data.get("coordinates") or []
    distances = data.get("distances")
    if distances is None and coordinates:
        pts = np.asarray(coordinates, dtype=np.float64)
        distances = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2).tolist()
    labels = data.get("labels") or [str(i) for i in range(len(coordinates))]
    try:
        return SampledDomain(
            kind=DomainKind.FINITE_METRIC,
            labels=labels,
            coordinates=coordinates,
            distances=distances or [],
            source=str(Path(path).name),
        )
    except ValidationError as e:
        raise DomainSpecError(f"invalid finite metric space {path}: {e}") from e


def _grid_fields(rest: str, default_count: int) -> Tuple[str, str, str]:
    """Split lo:hi[:n]; the sample count falls back to the default grid size."""
    parts = rest.split(":")
    if len(parts) == 2:
        return parts[0], parts[1], str(default_count)
    lo, hi, n = parts
    return lo, hi, n


def parse_domain(text: str) -> SampledDomain:
    """
    Parse the domain micro-syntax.

    grid1d:<lo>:<hi>[:<n>], grid2d:<lo>:<hi>[:<n>x<n>], finite:<path.json>
    """
    kind, _, rest = text.strip().partition(":")
    try:
        if kind == "grid1d":
            lo, hi, n = _grid_fields(rest, DEFAULT_GRID_1D)
            return grid1d(to_fraction(lo), to_fraction(hi), int(n))
        if kind == "grid2d":
            lo, hi, n = _grid_fields(rest, DEFAULT_GRID_2D)
            nx, _, ny = n.lower().partition("x")
            return grid2d(to_fraction(lo), to_fraction(hi), int(nx), int(ny or nx))
        if kind == "finite":
            return load_finite_metric(rest)
    except (ValueError, ZeroDivisionError) as e:
        if isinstance(e, DomainSpecError):
            raise
        raise DomainSpecError(f"invalid domain descriptor {text!r}: {e}") from e
    raise DomainSpecError(f"unknown domain kind {kind!r} (expected grid1d, grid2d or finite)")
