"""Coefficient families: the analytic tails of coefficient sequences."""
from abc import ABC, abstractmethod
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import lru_cache
from typing import Dict

from utils.errors import IllegalFamilyParam
from utils.rationals import format_rational

# Approximated terms are rounded to this binary grid; the error stays below 2^-64.
APPROX_BITS = 80
APPROX_PRECISION = "2^-64"


class CoefficientFamily(ABC):
    """Abstract base class for a closed-form family of positive terms."""

    name: str = ""

    @abstractmethod
    def term(self, j: int) -> Fraction:
        """
        Return the j-th term (j >= 1) as a rational.

        Args:
            j: 1-based index

        Returns:
            Exact term, or its rational approximation when the family is inexact
        """
        pass

    @property
    @abstractmethod
    def divergent(self) -> bool:
        """Whether the series of the family's terms diverges (analytic fact)."""
        pass

    @property
    def exact(self) -> bool:
        """Whether term(j) is the exact value rather than an approximation."""
        return True

    @property
    def nonincreasing(self) -> bool:
        """Whether the terms never increase."""
        return True

    @abstractmethod
    def params(self) -> Dict[str, str]:
        """Family parameters as "p/q" strings."""
        pass


class HarmonicFamily(CoefficientFamily):
    """a_j = 1/j."""

    name = "harmonic"

    def term(self, j: int) -> Fraction:
        return Fraction(1, j)

    @property
    def divergent(self) -> bool:
        return True

    def params(self) -> Dict[str, str]:
        return {}


class ScaledHarmonicFamily(CoefficientFamily):
    """a_j = c/j with c > 0."""

    name = "scaled-harmonic"

    def __init__(self, c: Fraction):
        if c <= 0:
            raise IllegalFamilyParam(f"scaled-harmonic needs c > 0, got {format_rational(c)}")
        self.c = Fraction(c)

    def term(self, j: int) -> Fraction:
        return self.c / j

    @property
    def divergent(self) -> bool:
        return True

    def params(self) -> Dict[str, str]:
        return {"c": format_rational(self.c)}


@lru_cache(maxsize=65536)
def _power_term(j: int, p: Fraction) -> Fraction:
    """j^(-p) rounded to the 2^-APPROX_BITS grid."""
    with localcontext() as ctx:
        ctx.prec = 50
        exponent = -(Decimal(p.numerator) / Decimal(p.denominator))
        approx = Fraction(Decimal(j) ** exponent)
    scale = 2 ** APPROX_BITS
    return Fraction(round(approx * scale), scale)


class PowerFamily(CoefficientFamily):
    """a_j = j^(-p) with 0 < p <= 1; exact only for p = 1."""

    name = "power"

    def __init__(self, p: Fraction):
        p = Fraction(p)
        if p > 1:
            raise IllegalFamilyParam(
                f"power family needs p <= 1 (the p-series converges for p > 1), got {format_rational(p)}"
            )
        if p <= 0:
            raise IllegalFamilyParam(
                f"power family needs p > 0 (terms do not vanish for p <= 0), got {format_rational(p)}"
            )
        self.p = p

    def term(self, j: int) -> Fraction:
        if self.p == 1:
            return Fraction(1, j)
        return _power_term(j, self.p)

    @property
    def divergent(self) -> bool:
        return True

    @property
    def exact(self) -> bool:
        return self.p == 1

    def params(self) -> Dict[str, str]:
        return {"p": format_rational(self.p)}


class GeometricFamily(CoefficientFamily):
    """
    a_j = anchor * r^(j - offset) with 0 < r < 1.

    Only available as the continuation of an explicit prefix; its series
    converges, so it never certifies a sequence.
    """

    name = "geometric"

    def __init__(self, ratio: Fraction, anchor: Fraction = Fraction(1), offset: int = 1):
        ratio = Fraction(ratio)
        if not 0 < ratio < 1:
            raise IllegalFamilyParam(f"geometric continuation needs 0 < r < 1, got {format_rational(ratio)}")
        if anchor <= 0:
            raise IllegalFamilyParam("geometric continuation needs a positive anchor term")
        self.ratio = ratio
        self.anchor = Fraction(anchor)
        self.offset = offset

    def term(self, j: int) -> Fraction:
        return self.anchor * self.ratio ** (j - self.offset)

    @property
    def divergent(self) -> bool:
        return False

    def params(self) -> Dict[str, str]:
        return {"r": format_rational(self.ratio)}
