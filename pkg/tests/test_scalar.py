"""Tests for the exact scalar recursion, level sets and the openness audit."""
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from calculus.coefficients import make_sequence, parse_sequence_spec
from calculus.intervals import RationalIntervalSet
from calculus.scalar import (
    PiecewiseConstantProfile,
    audit,
    check_openness,
    expand_point,
    iterate_levels,
    level_sets,
    levels_for_tolerance,
    profile_lsc_verdict,
    uniform_error_bounds
)
from models.reports import Verdict
from utils.errors import InexactSequence, PieceBudgetExceeded


@pytest.fixture
def harmonic():
    """Harmonic coefficients a_j = 1/j."""
    return make_sequence("harmonic")


class TestExpandPoint:
    """Test the pointwise recursion."""

    def test_zero_fixed_point(self, harmonic):
        """Test v = 0 never fires."""
        trace = expand_point(0, harmonic, 5)

        assert trace.bits == (0, 0, 0, 0, 0)
        assert trace.final_sum == 0

    def test_one(self, harmonic):
        """Test v = 1: a_1 = 1 is not strictly below 1."""
        trace = expand_point(1, harmonic, 4)

        assert trace.bits == (0, 1, 1, 0)
        assert trace.final_sum == Fraction(5, 6)
        assert trace.final_error == Fraction(1, 6)

    def test_two(self, harmonic):
        """Test v = 2 takes the first three terms."""
        trace = expand_point(2, harmonic, 3)

        assert trace.bits == (1, 1, 1)
        assert trace.final_sum == Fraction(11, 6)
        assert trace.final_error == Fraction(1, 6)

    def test_negative_rejected(self, harmonic):
        """Test negative values are rejected."""
        with pytest.raises(ValueError):
            expand_point(Fraction(-1, 2), harmonic, 3)

    def test_float_taken_exactly(self, harmonic):
        """Test floats enter at their exact binary value."""
        trace = expand_point(0.1, harmonic, 1)

        assert trace.v == Fraction(0.1)
        assert trace.bits == (0,)

    @settings(max_examples=200, deadline=None)
    @given(
        v=st.fractions(min_value=0, max_value=8, max_denominator=1000),
        levels=st.integers(min_value=1, max_value=40),
        spec=st.sampled_from(["harmonic", "scaled-harmonic:c=1/2", "explicit:2,1/3,1;then=harmonic"]),
    )
    def test_recursion_invariants(self, v, levels, spec):
        """Test underapproximation, monotone error, the off-set bound and the derived bound."""
        seq = parse_sequence_spec(spec)
        trace = expand_point(v, seq, levels)
        terms = seq.terms(levels)
        bounds = uniform_error_bounds(seq, levels, v)

        previous_error = v
        for n in range(levels):
            s, e = trace.partial_sums[n], trace.errors[n]
            assert s == sum((a for a, b in zip(terms[:n + 1], trace.bits) if b), Fraction(0))
            if v > 0:
                assert s < v
            else:
                assert s == 0
            assert 0 <= e <= previous_error
            if not trace.bits[n]:
                assert previous_error <= terms[n]
            assert e <= bounds[n]
            previous_error = e


class TestLevelSets:
    """Test the exact lift of the recursion to level sets."""

    def test_first_level(self, harmonic):
        """Test U_1 = (1, 10]."""
        sets, _ = level_sets(harmonic, 1, 10)

        assert sets[0].format() == ["(1/1..10/1]"]

    def test_second_level(self, harmonic):
        """Test U_2 = (1/2, 1] ∪ (3/2, 10]."""
        sets, _ = level_sets(harmonic, 2, 10)

        assert sets[1].format() == ["(1/2..1/1]", "(3/2..10/1]"]

    def test_third_level(self, harmonic):
        """Test U_3 = (1/3, 1/2] ∪ (5/6, 1] ∪ (4/3, 3/2] ∪ (11/6, 10]."""
        sets, _ = level_sets(harmonic, 3, 10)

        assert sets[2].format() == ["(1/3..1/2]", "(5/6..1/1]", "(4/3..3/2]", "(11/6..10/1]"]

    def test_level_sets_above_their_term(self, harmonic):
        """Test U_n ⊆ (a_n, +inf)."""
        sets, _ = level_sets(harmonic, 12, 4)

        for n, u in enumerate(sets, start=1):
            assert all(interval.lo >= Fraction(1, n) for interval in u)
            assert not u.contains(Fraction(1, n))

    def test_tail_reported(self, harmonic):
        """Test the tail above vmax is the open ray past the partial sum."""
        result = level_sets(harmonic, 3, 10)

        assert result.tail_value == Fraction(11, 6)
        assert result.tail.hi is None

    def test_pointwise_agreement_on_breakpoints_and_midpoints(self, harmonic):
        """Test membership in U_n equals the recursion bit at every breakpoint and midpoint."""
        result = level_sets(harmonic, 8, 3)
        points = result.profile.breakpoints + result.profile.midpoints()

        for v in points:
            trace = expand_point(v, harmonic, 8)
            for n, u in enumerate(result.sets):
                assert u.contains(v) == bool(trace.bits[n])
            assert result.profile.value_at(v) == trace.final_sum

    def test_piece_budget(self, harmonic):
        """Test the piece cap turns growth into an error."""
        with pytest.raises(PieceBudgetExceeded):
            level_sets(harmonic, 10, 10, piece_cap=2)

    def test_inexact_sequence_rejected(self):
        """Test approximated sequences cannot be lifted exactly."""
        with pytest.raises(InexactSequence):
            level_sets(make_sequence("power", {"p": "1/2"}), 2, 10)

    def test_precision_floor_stops_early(self):
        """Test terms below 2^-64 * vmax stop the lift with a warning."""
        seq = parse_sequence_spec(f"explicit:1,1/{2 ** 70};then=harmonic")
        result = level_sets(seq, 3, 1)

        assert len(result.sets) == 1
        assert result.terminated_at == 2
        assert result.precision_warning is not None

    def test_iterate_levels_yields_each_level(self, harmonic):
        """Test the incremental form produces the same sets."""
        states = list(iterate_levels(harmonic, 3, 10))
        sets, _ = level_sets(harmonic, 3, 10)

        assert [s.index for s in states] == [1, 2, 3]
        assert [s.upper_set() for s in states] == list(sets)


class TestCheckOpenness:
    """Test openness verdicts in the subspace [0, +inf)."""

    def test_open_ray(self):
        """Test (1, +inf) is open."""
        verdict = check_openness(RationalIntervalSet.ray(1))

        assert verdict.is_open
        assert verdict.witnesses == ()

    def test_second_level_not_open(self):
        """Test (1/2, 1] ∪ (3/2, +inf) has witness 1."""
        u = RationalIntervalSet.parse(["(1/2..1]", "(3/2..+inf)"])
        verdict = check_openness(u)

        assert not verdict.is_open
        assert verdict.witnesses == (Fraction(1),)

    def test_closed_at_zero_is_open(self):
        """Test [0, 1) is open in [0, +inf)."""
        assert check_openness(RationalIntervalSet.parse(["[0..1)"])).is_open

    def test_truncation_point_is_not_a_witness(self):
        """Test the closed end at vmax is ignored when upper is given."""
        u = RationalIntervalSet.parse(["(1..10]"])

        assert check_openness(u, upper=10).is_open
        assert not check_openness(u).is_open


class TestAudit:
    """Test the batch openness audit."""

    def test_single_level_all_open(self, harmonic):
        """Test one level is a single open ray."""
        report = audit(harmonic, 1, 10, samples=500)

        assert report.all_open is True
        assert report.first_non_open_level is None

    def test_first_non_open_level(self, harmonic):
        """Test the harmonic audit fails first at level 2 with witness 1."""
        report = audit(harmonic, 20, 10, samples=10 ** 4)

        assert report.levels[0].open is True
        assert report.levels[0].intervals == ["(1/1..10/1]"]
        assert report.first_non_open_level == 2
        assert report.levels[1].witnesses == ["1/1"]
        assert report.cross_validation_mismatches == 0
        assert report.cross_validation_samples >= 10 ** 4

    def test_scaled_harmonic_witness(self):
        """Test c = 1/2 scales the witness to 1/2."""
        seq = make_sequence("scaled-harmonic", {"c": "1/2"})
        report = audit(seq, 2, 10, samples=1000)

        assert report.first_non_open_level == 2
        assert report.levels[1].intervals == ["(1/4..1/2]", "(3/4..10/1]"]
        assert report.levels[1].witnesses == ["1/2"]

    def test_seeded_runs_are_identical(self, harmonic):
        """Test equal seeds give equal reports."""
        first = audit(harmonic, 6, 5, samples=300, seed=7)
        second = audit(harmonic, 6, 5, samples=300, seed=7)

        assert first.model_dump() == second.model_dump()

    def test_rationals_serialized_as_strings(self, harmonic):
        """Test the report carries p/q strings."""
        dumped = audit(harmonic, 2, 10, samples=10).model_dump(mode="json")

        assert dumped["vmax"] == "10/1"
        assert dumped["tail_value"] == "3/2"


class TestDerivedBounds:
    """Test the derived uniform bound and the profile semicontinuity verdict."""

    def test_bound_sequence(self, harmonic):
        """Test B_0 = M, B_n = max(a_n, B_{n-1} - a_n)."""
        assert uniform_error_bounds(harmonic, 3, 2) == [Fraction(1), Fraction(1, 2), Fraction(1, 3)]

    def test_levels_for_tolerance(self, harmonic):
        """Test the least level with B_n <= eps."""
        assert levels_for_tolerance(harmonic, Fraction(1, 3), 2) == 3
        assert levels_for_tolerance(harmonic, Fraction(1, 100), 2, max_levels=50) is None

    def test_bounds_vanish(self, harmonic):
        """Test the bound reaches every tolerance for the harmonic sequence."""
        n = levels_for_tolerance(harmonic, Fraction(1, 50), Fraction(6, 5))

        assert n is not None
        assert uniform_error_bounds(harmonic, n, Fraction(6, 5))[-1] <= Fraction(1, 50)

    def test_harmonic_profiles_lsc(self, harmonic):
        """Test the scalar partial sums of the harmonic sequence are l.s.c."""
        for state in iterate_levels(harmonic, 10, 3):
            assert profile_lsc_verdict(state.profile).verdict == Verdict.HOLDS

    def test_profile_jump_down_fails(self):
        """Test a value attached at a downward jump is a witness."""
        profile = PiecewiseConstantProfile(1, ((0, True, 1, True, 1), (1, False, 2, True, 0)))
        verdict = profile_lsc_verdict(profile)

        assert verdict.verdict == Verdict.FAILS
        assert verdict.witnesses == ["1/1"]
