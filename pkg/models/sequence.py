"""Pydantic models for coefficient sequence descriptors and validation reports."""
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_validator


class SequenceFamily(str, Enum):
    """Built-in coefficient families."""
    HARMONIC = "harmonic"
    POWER = "power"
    SCALED_HARMONIC = "scaled-harmonic"
    EXPLICIT_PREFIX = "explicit-prefix"


class ContinuationFamily(str, Enum):
    """Families allowed as the tail of an explicit prefix."""
    HARMONIC = "harmonic"
    POWER = "power"
    SCALED_HARMONIC = "scaled-harmonic"
    GEOMETRIC = "geometric"


class ValidationVerdict(str, Enum):
    """Outcome of validating a sequence against the decomposition hypotheses."""
    PROVEN_BY_FAMILY = "proven-by-family"
    HEURISTIC_PASS = "heuristic-pass"
    FAIL = "fail"


class SequenceDescriptor(BaseModel):
    """JSON descriptor of a coefficient sequence: {"family": ..., "params": {...}}."""
    family: SequenceFamily
    params: Dict[str, Any] = Field(default_factory=dict)
    precision: Optional[str] = None

    @field_validator('params')
    @classmethod
    def validate_params(cls, v: Dict[str, Any]) -> Dict[str, Any]:
        """Parameter keys must be non-empty."""
        for key in v:
            if not key or not key.strip():
                raise ValueError("sequence parameter names cannot be empty")
        return v


class ValidationReport(BaseModel):
    """Result of validate(seq, horizon)."""
    sequence: SequenceDescriptor
    horizon: int = Field(ge=1)
    verdict: ValidationVerdict
    positive: bool
    nonincreasing: bool
    trend_to_zero: bool
    continuation_divergent: bool
    first_nonpositive_index: Optional[int] = None
    partial_sums: Dict[str, str] = Field(default_factory=dict)
    notes: List[str] = Field(default_factory=list)
