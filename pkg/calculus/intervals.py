"""Finite unions of rational intervals with open/closed endpoint flags."""
import bisect
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, List, Optional, Tuple

from utils.rationals import RationalLike, format_rational, to_fraction

INFINITY_TOKEN = "+inf"

_INTERVAL_PATTERN = re.compile(r"^\s*([\[(])\s*([^.\s]+)\s*\.\.\s*([^\])\s]+)\s*([\])])\s*$")


@dataclass(frozen=True)
class Interval:
    """
    One interval of the real line; hi=None stands for +inf (always open).

    lo < hi, or lo == hi with both ends closed (a degenerate point).
    """
    lo: Fraction
    lo_closed: bool
    hi: Optional[Fraction]
    hi_closed: bool

    def __post_init__(self):
        if self.hi is None:
            if self.hi_closed:
                raise ValueError("an interval cannot be closed at +inf")
            return
        if self.lo > self.hi:
            raise ValueError(f"empty interval: lo {self.lo} > hi {self.hi}")
        if self.lo == self.hi and not (self.lo_closed and self.hi_closed):
            raise ValueError(f"degenerate interval at {self.lo} must be closed on both ends")

    @classmethod
    def make(
        cls,
        lo: RationalLike,
        hi: Optional[RationalLike],
        lo_closed: bool = False,
        hi_closed: bool = False
    ) -> "Interval":
        """Build from rational-like endpoints."""
        return cls(to_fraction(lo), lo_closed, None if hi is None else to_fraction(hi), hi_closed)

    @property
    def is_degenerate(self) -> bool:
        return self.hi is not None and self.lo == self.hi

    def contains(self, v: Fraction) -> bool:
        if v < self.lo or (v == self.lo and not self.lo_closed):
            return False
        if self.hi is None:
            return True
        return v < self.hi or (v == self.hi and self.hi_closed)

    def format(self) -> str:
        """Bracket notation, e.g. "(1/2..1/1]" or "(3/2..+inf)"."""
        left = "[" if self.lo_closed else "("
        if self.hi is None:
            return f"{left}{format_rational(self.lo)}..{INFINITY_TOKEN})"
        right = "]" if self.hi_closed else ")"
        return f"{left}{format_rational(self.lo)}..{format_rational(self.hi)}{right}"

    @classmethod
    def parse(cls, text: str) -> "Interval":
        """Inverse of format."""
        match = _INTERVAL_PATTERN.match(text)
        if not match:
            raise ValueError(f"not an interval: {text!r}")
        left, lo, hi, right = match.groups()
        upper = None if hi in (INFINITY_TOKEN, "inf") else to_fraction(hi)
        return cls(to_fraction(lo), left == "[", upper, right == "]" and upper is not None)


def _start_key(interval: Interval) -> Tuple[Fraction, int]:
    # closed starts sort before open starts at the same point
    return (interval.lo, 0 if interval.lo_closed else 1)


def _hi_greater(a: Interval, b: Interval) -> bool:
    """Whether a reaches further right than b."""
    if a.hi is None:
        return b.hi is not None
    if b.hi is None:
        return False
    return a.hi > b.hi or (a.hi == b.hi and a.hi_closed and not b.hi_closed)


def _touches(left: Interval, right: Interval) -> bool:
    """Whether right (starting at or after left) overlaps or abuts left."""
    if left.hi is None:
        return True
    if right.lo < left.hi:
        return True
    return right.lo == left.hi and (left.hi_closed or right.lo_closed)


@dataclass(frozen=True)
class RationalIntervalSet:
    """
    A normalized finite union of intervals: sorted, pairwise disjoint and
    non-adjacent (touching intervals are merged).
    """
    intervals: Tuple[Interval, ...] = ()

    @classmethod
    def of(cls, intervals: Iterable[Interval]) -> "RationalIntervalSet":
        """Normalize an arbitrary collection of intervals."""
        ordered = sorted(intervals, key=_start_key)
        merged: List[Interval] = []
        for current in ordered:
            if merged and _touches(merged[-1], current):
                last = merged[-1]
                if _hi_greater(current, last):
                    merged[-1] = Interval(last.lo, last.lo_closed, current.hi, current.hi_closed)
            else:
                merged.append(current)
        return cls(tuple(merged))

    @classmethod
    def empty(cls) -> "RationalIntervalSet":
        return cls(())

    @classmethod
    def ray(cls, t: RationalLike) -> "RationalIntervalSet":
        """The open ray (t, +inf)."""
        return cls((Interval(to_fraction(t), False, None, False),))

    @classmethod
    def parse(cls, items: Iterable[str]) -> "RationalIntervalSet":
        return cls.of(Interval.parse(item) for item in items)

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    @cached_property
    def _starts(self) -> List[Fraction]:
        return [interval.lo for interval in self.intervals]

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def contains(self, v: RationalLike) -> bool:
        """Membership test in O(log n)."""
        v = to_fraction(v)
        idx = bisect.bisect_right(self._starts, v) - 1
        return idx >= 0 and self.intervals[idx].contains(v)

    def union(self, other: "RationalIntervalSet") -> "RationalIntervalSet":
        return RationalIntervalSet.of(self.intervals + other.intervals)

    def intersection(self, other: "RationalIntervalSet") -> "RationalIntervalSet":
        """Two-pointer intersection of normalized sets."""
        result: List[Interval] = []
        i = j = 0
        a, b = self.intervals, other.intervals
        while i < len(a) and j < len(b):
            piece = _intersect(a[i], b[j])
            if piece is not None:
                result.append(piece)
            if _hi_greater(b[j], a[i]):
                i += 1
            else:
                j += 1
        return RationalIntervalSet.of(result)

    def truncate(self, upper: RationalLike) -> "RationalIntervalSet":
        """Intersect with [0, upper]."""
        upper = to_fraction(upper)
        return self.intersection(RationalIntervalSet((Interval(Fraction(0), True, upper, True),)))

    def interior(self, upper: Optional[RationalLike] = None) -> "RationalIntervalSet":
        """
        Interior in the subspace [0, upper] (or [0, +inf) when upper is None).

        Closed endpoints are dropped except a left endpoint at 0 and a right
        endpoint at upper; degenerate points away from both vanish.
        """
        upper = None if upper is None else to_fraction(upper)
        kept: List[Interval] = []
        for interval in self.intervals:
            lo_closed = interval.lo_closed and interval.lo == 0
            hi_closed = interval.hi_closed and upper is not None and interval.hi == upper
            if interval.is_degenerate and not (lo_closed and hi_closed):
                continue
            kept.append(Interval(interval.lo, lo_closed, interval.hi, hi_closed))
        return RationalIntervalSet(tuple(kept))

    def closed_endpoints(self, upper: Optional[RationalLike] = None) -> List[Fraction]:
        """
        Closed endpoints that break openness in [0, upper] (or [0, +inf)).

        A closed right endpoint is a witness unless it equals upper; a closed
        left endpoint is a witness unless it is 0.
        """
        upper = None if upper is None else to_fraction(upper)
        witnesses = set()
        for interval in self.intervals:
            if interval.lo_closed and interval.lo > 0:
                witnesses.add(interval.lo)
            if interval.hi_closed and interval.hi is not None and interval.hi != upper:
                witnesses.add(interval.hi)
        return sorted(witnesses)

    def format(self) -> List[str]:
        return [interval.format() for interval in self.intervals]

    def __str__(self) -> str:
        return " U ".join(self.format()) if self.intervals else "{}"


def _intersect(a: Interval, b: Interval) -> Optional[Interval]:
    """Intersection of two intervals, None when empty."""
    if (a.lo, not a.lo_closed) >= (b.lo, not b.lo_closed):
        lo, lo_closed = a.lo, a.lo_closed
    else:
        lo, lo_closed = b.lo, b.lo_closed

    if a.hi is None:
        hi, hi_closed = b.hi, b.hi_closed
    elif b.hi is None:
        hi, hi_closed = a.hi, a.hi_closed
    elif a.hi < b.hi or (a.hi == b.hi and not a.hi_closed):
        hi, hi_closed = a.hi, a.hi_closed
    else:
        hi, hi_closed = b.hi, b.hi_closed

    if hi is None or lo < hi:
        return Interval(lo, lo_closed, hi, hi_closed)
    if lo == hi and lo_closed and hi_closed:
        return Interval(lo, True, hi, True)
    return None
