"""Exception hierarchy shared by every OpenSets package."""
from fractions import Fraction
from typing import Iterable, Optional, Sequence


class OpenSetsError(ValueError):
    """Base class for all errors raised by OpenSets."""


class IllegalFamilyParam(OpenSetsError):
    """A coefficient family parameter lies outside the family's legal range."""


class InexactSequence(OpenSetsError):
    """An operation that needs exact rational terms got an approximated sequence."""


class DomainSpecError(OpenSetsError):
    """A sampled-domain descriptor or finite metric space is malformed."""


class ExpressionSyntaxError(OpenSetsError):
    """Malformed function expression."""

    def __init__(self, offset: int, expected: Iterable[str], found: str = ""):
        self.offset = offset
        self.expected = tuple(sorted(set(expected)))
        self.found = found
        shown = found if found else "end of input"
        super().__init__(
            f"syntax error at offset {offset}: expected one of "
            f"{', '.join(self.expected)}; found {shown!r}"
        )


class UnknownIdentifier(OpenSetsError):
    """Identifier that is neither a variable nor a known function."""

    def __init__(self, name: str, offset: int):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown identifier {name!r} at offset {offset}")


class ArityMismatch(OpenSetsError):
    """Function applied to the wrong number of arguments."""

    def __init__(self, name: str, expected: str, got: int, offset: int):
        self.name = name
        self.offset = offset
        super().__init__(
            f"{name} takes {expected} argument(s), got {got} (offset {offset})"
        )


class DimensionExceeded(OpenSetsError):
    """Variable index larger than the declared dimension."""

    def __init__(self, index: int, dim: int, offset: int):
        self.index = index
        self.dim = dim
        self.offset = offset
        super().__init__(f"x{index} exceeds declared dimension {dim} (offset {offset})")


class NegativeValue(OpenSetsError):
    """The function took a negative value, so it is not R+-valued."""

    def __init__(self, point: Sequence[float], value: float):
        self.point = tuple(float(p) for p in point)
        self.value = float(value)
        super().__init__(f"negative value {self.value!r} at point {self.point}")


class DomainError(OpenSetsError):
    """Evaluation left the domain of an operation (division by zero, sqrt of a negative)."""

    def __init__(self, message: str, point: Optional[Sequence[float]] = None):
        self.point = tuple(float(p) for p in point) if point is not None else None
        suffix = f" at point {self.point}" if self.point is not None else ""
        super().__init__(f"{message}{suffix}")


class PieceBudgetExceeded(OpenSetsError):
    """The level-set partition grew beyond the configured piece cap."""

    def __init__(self, level: int, pieces: int, cap: int):
        self.level = level
        self.pieces = pieces
        self.cap = cap
        super().__init__(f"level {level}: {pieces} pieces exceed the cap of {cap}")


class CrossValidationMismatch(OpenSetsError):
    """Interval membership disagrees with the pointwise recursion."""

    def __init__(self, level: int, value: Fraction, bit: int, member: bool):
        self.level = level
        self.value = value
        super().__init__(
            f"level {level}: v={value.numerator}/{value.denominator} has bit {bit} "
            f"but interval membership {member}"
        )


class RadiusBelowMesh(OpenSetsError):
    """Defect radius smaller than the grid mesh."""


class MonotonicityViolation(OpenSetsError):
    """An error curve increased between consecutive levels."""


class DominationViolation(OpenSetsError):
    """The bump series exceeds the partial sum or the function at some sample."""
