"""Data models for OpenSets."""
from .domain import DomainKind, SampledDomain, parse_domain
from .reports import (
    BumpSpec,
    ComparisonReport,
    DecompositionSummary,
    DiniReport,
    ErrorReport,
    OpennessAuditReport,
    ResidualReport,
    SemicontinuityVerdict,
    Violation
)
from .sequence import SequenceDescriptor, ValidationReport

__all__ = [
    "DomainKind",
    "SampledDomain",
    "parse_domain",
    "BumpSpec",
    "ComparisonReport",
    "DecompositionSummary",
    "DiniReport",
    "ErrorReport",
    "OpennessAuditReport",
    "ResidualReport",
    "SemicontinuityVerdict",
    "Violation",
    "SequenceDescriptor",
    "ValidationReport"
]
