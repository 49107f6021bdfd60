"""Pydantic models for every report OpenSets serializes."""
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator

from models.sequence import SequenceDescriptor
from utils.rationals import format_rational, to_fraction

NOT_REACHED = "not reached"


class SemicontinuityMode(str, Enum):
    """Direction of semicontinuity."""
    LSC = "lsc"
    USC = "usc"


class VerdictMethod(str, Enum):
    """How a semicontinuity verdict was reached."""
    EXACT_SCALAR = "exact-scalar"
    SAMPLED_HEURISTIC = "sampled-heuristic"


class Verdict(str, Enum):
    """Semicontinuity verdict."""
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"


class SemicontinuityVerdict(BaseModel):
    """Verdict with its witnesses (rational strings or sample coordinates)."""
    mode: SemicontinuityMode
    method: VerdictMethod
    verdict: Verdict
    witnesses: List[str] = Field(default_factory=list)


class LevelAudit(BaseModel):
    """Openness verdict for one level set U_n."""
    index: int = Field(ge=1)
    intervals: List[str]
    open: bool
    witnesses: List[str] = Field(default_factory=list)


class OpennessAuditReport(BaseModel):
    """Batch openness audit of U_1..U_N."""
    sequence: SequenceDescriptor
    levels_requested: int = Field(ge=1)
    vmax: str
    levels: List[LevelAudit]
    first_non_open_level: Optional[int] = None
    all_open: bool
    cross_validation_samples: int = Field(ge=0)
    cross_validation_mismatches: int = Field(ge=0)
    tail: str
    tail_value: str
    terminated_at: Optional[int] = None
    notes: List[str] = Field(default_factory=list)


class LevelError(BaseModel):
    """Error statistics of one level over the samples."""
    level: int = Field(ge=1)
    sup_error: float = Field(ge=0)
    mean_error: float = Field(ge=0)
    frac_in_G: float = Field(ge=0, le=1)


class ErrorReport(BaseModel):
    """Per-level errors and the N(eps) table."""
    levels: List[LevelError]
    n_eps: Dict[str, Union[int, str]]
    boundary_fragile_samples: int = Field(default=0, ge=0)
    caveat: str = ""


class Violation(BaseModel):
    """One failed invariant check at one sample and level."""
    kind: str
    sample: int = Field(ge=0)
    level: int = Field(ge=0)
    detail: str = ""


class DiniReport(BaseModel):
    """Status of both uniform-convergence routes."""
    monotone: bool
    pointwise_monotone: bool
    sup_monotone: bool
    N_eps: Dict[str, Union[int, str]]
    usc_certified_levels: List[int] = Field(default_factory=list)
    bound_holds: bool
    bound_violations: List[int] = Field(default_factory=list)
    top_fiber: float = Field(default=0.0, ge=0)
    top_fiber_N_eps: Dict[str, Union[int, str]] = Field(default_factory=dict)
    worst_fibers: Dict[str, float] = Field(default_factory=dict)
    notes: List[str] = Field(default_factory=list)


class ComparisonRow(BaseModel):
    """Side-by-side sup errors at one level."""
    level: int = Field(ge=0)
    greedy_sup_error: Optional[float] = None
    dyadic_sup_error: Optional[float] = None


class ComparisonReport(BaseModel):
    """Greedy open-set construction against the dyadic baseline."""
    cap_rule: str
    rows: List[ComparisonRow]
    notes: List[str] = Field(default_factory=list)


class BumpSpec(BaseModel):
    """One smooth bump g_j = height * exp(1 - 1/(1 - t^2)), t = |x - center| / radius."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    level: int = Field(ge=1)
    center: List[Fraction]
    radius: Fraction
    height: Fraction

    @field_validator('center', mode='before')
    @classmethod
    def validate_center(cls, v) -> List[Fraction]:
        """Coordinates as exact rationals."""
        return [to_fraction(c) for c in v]

    @field_validator('radius', 'height', mode='before')
    @classmethod
    def validate_positive(cls, v) -> Fraction:
        """Radius and height must be positive rationals."""
        value = to_fraction(v)
        if value <= 0:
            raise ValueError("radius and height must be positive")
        return value

    @field_serializer('center')
    def serialize_center(self, center: List[Fraction]) -> List[str]:
        return [format_rational(c) for c in center]

    @field_serializer('radius', 'height')
    def serialize_rational(self, value: Fraction) -> str:
        return format_rational(value)


class ResidualReport(BaseModel):
    """Residual f - sum of bumps over the samples."""
    sup_residual: float = Field(ge=0)
    mean_residual: float = Field(ge=0)
    emitted_levels: List[int] = Field(default_factory=list)
    skipped_levels: List[int] = Field(default_factory=list)
    height_sum: str
    max_boundary_gradient: float = Field(default=0.0, ge=0)
    domination_checked_samples: int = Field(default=0, ge=0)
    notes: List[str] = Field(default_factory=list)


class DecompositionSummary(BaseModel):
    """JSON summary of one decomposition run."""
    domain: str
    sequence: SequenceDescriptor
    levels: int = Field(ge=1)
    samples: int = Field(ge=1)
    vmax: str
    max_value: float
    n_eps: Dict[str, Union[int, str]]
    boundary_fragile_samples: int = Field(ge=0)
    violations: int = Field(ge=0)
    caveat: str = ""
    dini: Optional[DiniReport] = None
    notes: List[str] = Field(default_factory=list)
