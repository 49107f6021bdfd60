"""Coefficient sequences (a_j): positive, vanishing, with divergent sum."""
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from calculus.families import (
    APPROX_PRECISION,
    CoefficientFamily,
    GeometricFamily,
    HarmonicFamily,
    PowerFamily,
    ScaledHarmonicFamily,
)
from models.sequence import (
    ContinuationFamily,
    SequenceDescriptor,
    SequenceFamily,
    ValidationReport,
    ValidationVerdict,
)
from utils.errors import IllegalFamilyParam
from utils.logging_config import get_logger
from utils.rationals import format_rational, to_fraction

logger = get_logger(__name__)

ParamsLike = Union[Mapping[str, Any], Sequence[Any], None]


@dataclass(frozen=True)
class CoefficientSequence:
    """
    An immutable coefficient sequence: an optional explicit prefix followed by
    a closed-form family.

    value(j) for j <= len(prefix) is the prefix entry, afterwards the tail
    family's term at the same absolute index j.
    """
    family: SequenceFamily
    tail: CoefficientFamily
    prefix: Tuple[Fraction, ...] = field(default_factory=tuple)

    def value(self, j: int) -> Fraction:
        """Return a_j for j >= 1."""
        if j < 1:
            raise IndexError(f"coefficient index starts at 1, got {j}")
        if j <= len(self.prefix):
            return self.prefix[j - 1]
        return self.tail.term(j)

    def terms(self, n: int) -> List[Fraction]:
        """Return [a_1, ..., a_n]."""
        return [self.value(j) for j in range(1, n + 1)]

    def partial_sum(self, n: int) -> Fraction:
        """Return a_1 + ... + a_n."""
        return sum(self.terms(n), Fraction(0))

    @property
    def exact(self) -> bool:
        """True when every term is an exact rational (not an approximation)."""
        return self.tail.exact

    @property
    def precision(self) -> Optional[str]:
        """Declared absolute error of approximated terms, None when exact."""
        return None if self.exact else APPROX_PRECISION

    def descriptor(self) -> SequenceDescriptor:
        """Serializable {"family", "params"} descriptor."""
        if self.family == SequenceFamily.EXPLICIT_PREFIX:
            params: Dict[str, Any] = {
                "prefix": [format_rational(a) for a in self.prefix],
                "continuation": {"family": self.tail.name, "params": self.tail.params()},
            }
        else:
            params = self.tail.params()
        return SequenceDescriptor(family=self.family, params=params, precision=self.precision)


def _param(params: Mapping[str, Any], key: str, default: Optional[Fraction] = None) -> Fraction:
    """Fetch a rational parameter."""
    if key not in params:
        if default is None:
            raise IllegalFamilyParam(f"missing parameter {key!r}")
        return default
    try:
        return to_fraction(params[key])
    except (ValueError, ZeroDivisionError, TypeError) as e:
        raise IllegalFamilyParam(f"parameter {key}={params[key]!r} is not a rational: {e}") from e


def _normalize_params(family: SequenceFamily, params: ParamsLike) -> Dict[str, Any]:
    """Accept mappings, positional lists and None."""
    if params is None:
        return {}
    if isinstance(params, Mapping):
        return dict(params)
    values = list(params)
    if not values:
        return {}
    if family == SequenceFamily.POWER:
        return {"p": values[0]}
    if family == SequenceFamily.SCALED_HARMONIC:
        return {"c": values[0]}
    if family == SequenceFamily.EXPLICIT_PREFIX:
        return {"prefix": values}
    raise IllegalFamilyParam(f"{family.value} takes no parameters")


def _make_continuation(
    name: Union[str, ContinuationFamily],
    params: Mapping[str, Any],
    prefix: Tuple[Fraction, ...]
) -> CoefficientFamily:
    """Build the tail family of an explicit prefix."""
    try:
        kind = ContinuationFamily(name)
    except ValueError as e:
        raise IllegalFamilyParam(f"unknown continuation family {name!r}") from e

    if kind == ContinuationFamily.HARMONIC:
        return HarmonicFamily()
    if kind == ContinuationFamily.POWER:
        return PowerFamily(_param(params, "p"))
    if kind == ContinuationFamily.SCALED_HARMONIC:
        return ScaledHarmonicFamily(_param(params, "c"))
    return GeometricFamily(
        _param(params, "r", Fraction(1, 2)),
        anchor=prefix[-1] if prefix else Fraction(1),
        offset=len(prefix) if prefix else 1,
    )


def make_sequence(family: Union[str, SequenceFamily], params: ParamsLike = None) -> CoefficientSequence:
    """
    Construct a coefficient sequence.

    Args:
        family: harmonic, power, scaled-harmonic or explicit-prefix
        params: family parameters (p for power, c for scaled-harmonic,
            prefix + continuation for explicit-prefix)

    Returns:
        Immutable CoefficientSequence

    Raises:
        IllegalFamilyParam: parameters outside the family's legal range
    """
    try:
        family = SequenceFamily(family)
    except ValueError as e:
        raise IllegalFamilyParam(f"unknown coefficient family {family!r}") from e

    values = _normalize_params(family, params)

    if family == SequenceFamily.HARMONIC:
        return CoefficientSequence(family=family, tail=HarmonicFamily())
    if family == SequenceFamily.POWER:
        return CoefficientSequence(family=family, tail=PowerFamily(_param(values, "p")))
    if family == SequenceFamily.SCALED_HARMONIC:
        return CoefficientSequence(family=family, tail=ScaledHarmonicFamily(_param(values, "c")))

    raw_prefix = values.get("prefix") or []
    try:
        prefix = tuple(to_fraction(a) for a in raw_prefix)
    except (ValueError, ZeroDivisionError, TypeError) as e:
        raise IllegalFamilyParam(f"explicit prefix contains a non-rational entry: {e}") from e
    if not prefix:
        raise IllegalFamilyParam("explicit-prefix needs at least one prefix term")
    for j, a in enumerate(prefix, start=1):
        if a <= 0:
            raise IllegalFamilyParam(f"explicit prefix term a_{j} = {format_rational(a)} is not positive")

    continuation = values.get("continuation")
    if continuation is None:
        raise IllegalFamilyParam(
            "explicit-prefix needs a declared continuation family; divergence cannot be certified otherwise"
        )
    if isinstance(continuation, str):
        continuation = {"family": continuation, "params": {}}
    tail = _make_continuation(continuation.get("family", ""), continuation.get("params") or {}, prefix)
    return CoefficientSequence(family=family, tail=tail, prefix=prefix)


def sequence_from_descriptor(descriptor: Union[SequenceDescriptor, Mapping[str, Any]]) -> CoefficientSequence:
    """Rebuild a sequence from its JSON descriptor."""
    if not isinstance(descriptor, SequenceDescriptor):
        descriptor = SequenceDescriptor.model_validate(descriptor)
    return make_sequence(descriptor.family, descriptor.params)


def _parse_kv(text: str) -> Dict[str, str]:
    """Parse "k=v,k=v"."""
    params = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "=" not in part:
            raise IllegalFamilyParam(f"expected key=value, got {part!r}")
        key, value = part.split("=", 1)
        params[key.strip()] = value.strip()
    return params


def parse_sequence_spec(text: str) -> CoefficientSequence:
    """
    Parse the --coeffs micro-syntax.

    Accepted forms: "harmonic", "power:p=1/2", "scaled-harmonic:c=1/2",
    "explicit:1,1/2,1/3;then=harmonic", "explicit:1,1/2;then=geometric:r=1/2",
    or a JSON descriptor.
    """
    text = text.strip()
    if text.startswith("{"):
        try:
            return sequence_from_descriptor(json.loads(text))
        except json.JSONDecodeError as e:
            raise IllegalFamilyParam(f"invalid sequence JSON: {e}") from e

    head, _, rest = text.partition(":")
    head = head.strip()
    if head in ("explicit", SequenceFamily.EXPLICIT_PREFIX.value):
        prefix_text, _, then = rest.partition(";")
        prefix = [p.strip() for p in prefix_text.split(",") if p.strip()]
        continuation = None
        if then:
            key, _, tail = then.partition("=")
            if key.strip() != "then":
                raise IllegalFamilyParam(f"expected 'then=<family>', got {then!r}")
            tail_name, _, tail_params = tail.partition(":")
            continuation = {"family": tail_name.strip(), "params": _parse_kv(tail_params)}
        return make_sequence(SequenceFamily.EXPLICIT_PREFIX, {"prefix": prefix, "continuation": continuation})

    return make_sequence(head, _parse_kv(rest))


def validate(seq: CoefficientSequence, horizon: int) -> ValidationReport:
    """
    Check the decomposition hypotheses over the first `horizon` terms.

    Positivity and the monotone trend are checked exactly; divergence is
    certified only by the (tail) family, never guessed from the prefix.

    Args:
        seq: Sequence to validate
        horizon: Number of leading terms to inspect (>= 1)

    Returns:
        ValidationReport with verdict proven-by-family, heuristic-pass or fail
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")

    terms = seq.terms(horizon)
    first_nonpositive = next((j for j, a in enumerate(terms, start=1) if a <= 0), None)
    positive = first_nonpositive is None
    nonincreasing = all(b <= a for a, b in zip(terms, terms[1:]))
    trend_to_zero = nonincreasing and (horizon == 1 or terms[-1] < terms[0])

    checkpoints = sorted({1, horizon} | {10 ** k for k in range(1, 7) if 10 ** k <= horizon})
    partial_sums = {}
    running = Fraction(0)
    for j, a in enumerate(terms, start=1):
        running += a
        if j in checkpoints:
            partial_sums[str(j)] = format_rational(running)

    notes: List[str] = []
    divergent = seq.tail.divergent
    if not positive:
        verdict = ValidationVerdict.FAIL
        notes.append(f"term {first_nonpositive} is not positive")
    elif not divergent:
        verdict = ValidationVerdict.FAIL
        notes.append(f"continuation family {seq.tail.name} has a convergent series")
    elif nonincreasing:
        verdict = ValidationVerdict.PROVEN_BY_FAMILY
    else:
        verdict = ValidationVerdict.HEURISTIC_PASS
        notes.append("terms increase somewhere in the horizon; divergence and vanishing rest on the tail family")

    if not seq.exact:
        notes.append(f"terms are rational approximations with absolute error < {APPROX_PRECISION}")

    logger.debug(f"validated {seq.family.value} over {horizon} terms: {verdict.value}")

    return ValidationReport(
        sequence=seq.descriptor(),
        horizon=horizon,
        verdict=verdict,
        positive=positive,
        nonincreasing=nonincreasing,
        trend_to_zero=trend_to_zero,
        continuation_divergent=divergent,
        first_nonpositive_index=first_nonpositive,
        partial_sums=partial_sums,
        notes=notes,
    )
