"""Tests for semicontinuity verdicts and the convergence harness."""
from fractions import Fraction

import numpy as np
import pytest

from approximation import semicontinuity
from approximation.decomposition import decompose
from approximation.semicontinuity import dini_harness, sampled_defect, scalar_lsc_verdict, usc_certified_levels
from calculus.coefficients import make_sequence, parse_sequence_spec
from calculus.intervals import RationalIntervalSet
from calculus.scalar import expand_point
from dsl import parse
from models.domain import parse_domain
from models.reports import NOT_REACHED, SemicontinuityMode, Verdict, VerdictMethod
from utils.errors import DomainSpecError, PieceBudgetExceeded, RadiusBelowMesh


@pytest.fixture
def line():
    return parse_domain("grid1d:0:3:1025")


@pytest.fixture
def capped():
    return parse("min(x1, 1.2)", 1)


@pytest.fixture
def indicator_masks(line, capped):
    """(coarse, refined) decompositions of min(x1, 1.2) with two levels."""
    seq = make_sequence("harmonic")
    return decompose(line, capped, seq, 2), decompose(line.refined(), capped, seq, 2)


class TestScalarVerdict:
    """Test exact l.s.c. verdicts on value sets."""

    def test_open_ray(self):
        """Test an open ray gives l.s.c. preimage indicators."""
        verdict = scalar_lsc_verdict(RationalIntervalSet.parse(["(1..10]"]), upper=10)

        assert verdict.verdict == Verdict.HOLDS
        assert verdict.method == VerdictMethod.EXACT_SCALAR
        assert verdict.witnesses == []

    def test_closed_piece(self):
        """Test both closed endpoints of [1/2..1] are witnesses."""
        verdict = scalar_lsc_verdict(RationalIntervalSet.parse(["[1/2..1]"]), upper=10)

        assert verdict.verdict == Verdict.FAILS
        assert verdict.witnesses == ["1/2", "1/1"]


class TestSampledDefect:
    """Test multi-scale sampled defects on indicator samples."""

    def test_open_set_indicator_not_persistent(self, line, indicator_masks):
        """Test 1{x > 1} is flagged at the mesh but not persistently."""
        coarse, fine = indicator_masks
        field = sampled_defect(coarse.mask(1).astype(float), line, refined_values=fine.mask(1).astype(float))

        assert field.flagged[0].any()
        assert field.persistent_indices() == []
        assert len(field.radii) == 3
        assert field.radii[1] == 2 * field.radii[0]

    def test_closed_endpoint_persistent(self, line, indicator_masks):
        """Test 1{1/2 < x <= 1} keeps the node next to x = 1 flagged under refinement."""
        coarse, fine = indicator_masks
        field = sampled_defect(coarse.mask(2).astype(float), line, refined_values=fine.mask(2).astype(float))

        assert (341,) in field.persistent_indices()
        verdict = field.verdict(line)
        assert verdict.verdict == Verdict.INCONCLUSIVE
        assert verdict.method == VerdictMethod.SAMPLED_HEURISTIC
        assert "(1023/1024)" in verdict.witnesses

    def test_usc_mode(self, line, indicator_masks):
        """Test the u.s.c. defect of an open-set indicator persists at its boundary."""
        coarse, fine = indicator_masks
        field = sampled_defect(
            coarse.mask(1).astype(float), line,
            mode=SemicontinuityMode.USC,
            refined_values=fine.mask(1).astype(float),
        )

        assert (341,) in field.persistent_indices()

    def test_without_refinement(self, line, indicator_masks):
        """Test nothing is persistent without refined values."""
        coarse, _ = indicator_masks
        field = sampled_defect(coarse.mask(2).astype(float), line)

        assert not field.refined
        assert not field.persistent.any()

    def test_continuous_values(self, line, capped):
        """Test a Lipschitz function stays below a coarse threshold at every radius."""
        values = np.minimum(line.axis_nodes(0), 1.2)
        field = sampled_defect(values, line, mode=SemicontinuityMode.USC, threshold=0.1)

        assert not any(f.any() for f in field.flagged)

    def test_radius_below_mesh(self, line):
        """Test radii below the mesh are rejected."""
        with pytest.raises(RadiusBelowMesh):
            sampled_defect(np.zeros(1025), line, radius=Fraction(1, 2048))

    def test_finite_metric_rejected(self, tmp_path):
        """Test sampled defects need a grid."""
        path = tmp_path / "points.json"
        path.write_text('{"coordinates": [[0.0], [1.0]]}')

        with pytest.raises(DomainSpecError):
            sampled_defect(np.zeros(2), parse_domain(f"finite:{path}"))


class TestDiniHarness:
    """Test both uniform-convergence routes."""

    def test_capped_identity(self, line, capped):
        """Test min(x1, 1.2) converges monotonically and below the bound."""
        dec = decompose(line, capped, make_sequence("harmonic"), 50)
        report = dini_harness(dec, eps=[0.02])

        assert report.monotone
        assert report.pointwise_monotone
        assert report.sup_monotone
        assert report.bound_holds
        assert report.bound_violations == []
        assert report.usc_certified_levels == list(range(1, 51))
        assert report.N_eps["0.02"] <= 50

    def test_needs_two_levels(self, line, capped):
        """Test a single level is rejected."""
        dec = decompose(line, capped, make_sequence("harmonic"), 1)

        with pytest.raises(ValueError):
            dini_harness(dec)

    def test_finite_metric_certifies_every_level(self, tmp_path):
        """Test every subset of a finite metric space is open."""
        path = tmp_path / "points.json"
        path.write_text('{"coordinates": [[0.0], [0.5], [1.5]]}')
        dec = decompose(parse_domain(f"finite:{path}"), parse("x1", 1), make_sequence("harmonic"), 6)

        certified, first_non_open, notes = usc_certified_levels(dec)

        assert certified == [1, 2, 3, 4, 5, 6]
        assert first_non_open is None
        assert "finite metric" in notes[0]

    def test_approximated_sequence_not_certified(self, capped):
        """Test approximated coefficients give no exact certificate."""
        dec = decompose(parse_domain("grid1d:0:3:65"), capped, parse_sequence_spec("power:p=1/2"), 5)

        certified, _, notes = usc_certified_levels(dec)

        assert certified == []
        assert "approximated" in notes[0]

    def test_first_non_open_level(self, line, capped):
        """Test U_2 = (1/2..1] is the first level set that is not open."""
        dec = decompose(line, capped, make_sequence("harmonic"), 3)

        _, first_non_open, notes = usc_certified_levels(dec)

        assert first_non_open == 2
        assert any("witness 1/1" in note for note in notes)

    def test_budget_stop_leaves_levels_uncertified(self, line, capped, mocker):
        """Test levels past an exhausted piece budget are uncertified, not failures."""
        unpatched = semicontinuity.iterate_levels

        def stop_at_level_three(seq, levels, vmax):
            for state in unpatched(seq, levels, vmax):
                if state.index == 3:
                    raise PieceBudgetExceeded(3, 1_048_576, 1_000_000)
                yield state

        mocker.patch("approximation.semicontinuity.iterate_levels", side_effect=stop_at_level_three)
        dec = decompose(line, capped, make_sequence("harmonic"), 10)

        certified, _, notes = usc_certified_levels(dec)

        assert certified == [1, 2]
        assert any(note.startswith("levels 3..10 uncertified: piece budget exhausted at level 3") for note in notes)
        assert not any("not l.s.c." in note for note in notes)

    def test_convergent_tail_not_uniform(self):
        """Test a convergent continuation never yields the uniform-convergence note."""
        seq = parse_sequence_spec("explicit:1,1/2;then=geometric:r=1/2")
        dec = decompose(parse_domain("grid1d:0:3:257"), parse("x1", 1), seq, 12)

        report = dini_harness(dec)

        assert report.bound_holds
        assert report.N_eps["0.1"] == NOT_REACHED
        assert any("convergent series" in note for note in report.notes)
        assert not any("convergence is uniform" in note for note in report.notes)

    def test_unreached_eps_not_uniform(self):
        """Test too few levels to reach every eps are reported, not certified."""
        dec = decompose(parse_domain("grid1d:0:3:257"), parse("x1", 1), make_sequence("harmonic"), 3)

        report = dini_harness(dec)

        assert report.N_eps["0.001"] == NOT_REACHED
        assert any("not reached for eps" in note for note in report.notes)
        assert not any("convergence is uniform" in note for note in report.notes)

    def test_identity_top_and_worst_fiber(self):
        """Test f = x on [0, 1]: the top fiber v = 1 reaches 0.1 at level 7, the samples only at 10."""
        seq = make_sequence("harmonic")
        dec = decompose(parse_domain("grid1d:0:1:1025"), parse("x1", 1), seq, 20)

        report = dini_harness(dec)
        worst = report.worst_fibers["0.1"]
        errors = expand_point(Fraction(worst), seq, 20).errors

        assert report.top_fiber == 1.0
        assert report.top_fiber_N_eps["0.1"] == 7
        assert report.N_eps["0.1"] == 10
        assert errors[8] > Fraction(0.1) >= errors[9]
        assert any("top fiber f = 1.0 is 7" in note for note in report.notes)

    def test_zero_function_is_uniform(self, line):
        """Test every eps is reached at level 1 for f == 0, so the uniform note is issued."""
        dec = decompose(line, parse("0", 1), make_sequence("harmonic"), 3)

        report = dini_harness(dec)

        assert set(report.N_eps.values()) == {1}
        assert report.top_fiber_N_eps["0.1"] == 1
        assert any("convergence is uniform" in note for note in report.notes)
