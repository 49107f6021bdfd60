"""End-to-end tests of the command-line front end."""
import itertools
import json

import pandas as pd
import pytest
from PIL import Image

from app import EXIT_CONFIG, EXIT_NEGATIVE, EXIT_OK, build_config, build_parser, main, run_decompose

SMALL_GRID = "grid1d:0:3:257"


def _run(argv, tmp_path, name="report.json"):
    """Run main with a JSON output file and return (exit code, parsed report)."""
    out = tmp_path / name
    code = main(argv + ["--out-json", str(out)])
    report = json.loads(out.read_text()) if out.exists() else None
    return code, report


class TestDecomposeCommand:
    """Test the decompose subcommand."""

    def test_capped_identity(self, tmp_path):
        """Test a clean run reports no violations and a finite N(0.1)."""
        code, report = _run(
            ["decompose", "--fn", "min(x1, 1.2)", "--domain", SMALL_GRID, "--levels", "30"],
            tmp_path,
        )

        assert code == EXIT_OK
        assert report["violations"] == []
        assert report["summary"]["violations"] == 0
        assert report["summary"]["n_eps"]["0.1"] <= 10
        assert report["summary"]["dini"]["bound_holds"] is True
        assert report["meta"]["tool"] == "opensets"
        assert "workers" not in report["meta"]["config"]
        assert "wall_time_s" not in report["meta"]

    def test_negative_function(self, tmp_path):
        """Test a function going negative exits with code 4."""
        code, _ = _run(["decompose", "--fn", "x1 - 2", "--domain", SMALL_GRID, "--levels", "5"], tmp_path)

        assert code == EXIT_NEGATIVE

    def test_domain_error(self, tmp_path):
        """Test division by zero exits with code 4."""
        code, _ = _run(["decompose", "--fn", "1 / x1", "--domain", SMALL_GRID, "--levels", "5"], tmp_path)

        assert code == EXIT_NEGATIVE

    def test_syntax_error(self, tmp_path):
        """Test a malformed expression is a configuration error."""
        code, _ = _run(["decompose", "--fn", "x1 + * 2", "--domain", SMALL_GRID], tmp_path)

        assert code == EXIT_CONFIG

    def test_invalid_level_count(self, tmp_path):
        """Test zero levels are rejected before any work."""
        code, report = _run(["decompose", "--fn", "x1", "--levels", "0"], tmp_path)

        assert code == EXIT_CONFIG
        assert report is None

    @pytest.mark.parametrize("coeffs", ["explicit:1,-1/2;then=harmonic", "explicit:1,0;then=harmonic"])
    def test_nonpositive_prefix_rejected(self, tmp_path, coeffs):
        """Test nonpositive prefix terms are a configuration error, not a violation."""
        code, report = _run(
            ["decompose", "--fn", "min(x1, 1.2)", "--domain", SMALL_GRID, "--coeffs", coeffs, "--levels", "40"],
            tmp_path,
        )

        assert code == EXIT_CONFIG
        assert report is None

    def test_convergent_sequence_noted(self, tmp_path):
        """Test a convergent continuation is flagged and never certified uniform."""
        code, report = _run(
            ["decompose", "--fn", "x1", "--domain", SMALL_GRID,
             "--coeffs", "explicit:1,1/2;then=geometric:r=1/2", "--levels", "12"],
            tmp_path,
        )
        notes = report["summary"]["notes"] + report["summary"]["dini"]["notes"]

        assert code == EXIT_OK
        assert report["summary"]["n_eps"]["0.1"] == "not reached"
        assert any("sequence hypotheses fail" in note and "convergent series" in note for note in notes)
        assert not any("convergence is uniform" in note for note in notes)

    def test_mask_levels_above_n_logged(self, tmp_path, mocker):
        """Test requested mask levels past N are skipped with a warning."""
        args = build_parser().parse_args(
            ["decompose", "--fn", "x1", "--domain", SMALL_GRID, "--levels", "3",
             "--masks", "2,5,7", "--out-dir", str(tmp_path), "--out-json", str(tmp_path / "report.json")]
        )
        log = mocker.Mock()

        code = run_decompose(build_config(args), log, 0.0)

        assert code == EXIT_OK
        log.warning.assert_any_call("Mask levels above N skipped", levels=[5, 7], N=3)
        assert (tmp_path / "mask_L2.pgm").exists()
        assert not (tmp_path / "mask_L5.pgm").exists()

    @pytest.mark.parametrize("workers", ["2", "8"])
    def test_identical_across_workers(self, tmp_path, workers):
        """Test reports are byte-identical for one and several workers."""
        argv = ["decompose", "--fn", "exp(-x1)*abs(sin(3*x1))", "--domain", SMALL_GRID, "--levels", "40"]
        main(argv + ["--workers", "1", "--out-json", str(tmp_path / "one.json")])
        main(argv + ["--workers", workers, "--out-json", str(tmp_path / "many.json")])

        assert (tmp_path / "one.json").read_bytes() == (tmp_path / "many.json").read_bytes()

    def test_csv_and_masks(self, tmp_path):
        """Test the error-curve CSV and the PGM masks."""
        csv_path = tmp_path / "errors.csv"
        code, _ = _run(
            ["decompose", "--fn", "min(x1, 1.2)", "--domain", SMALL_GRID, "--levels", "5",
             "--out-csv", str(csv_path), "--masks", "1..2", "--out-dir", str(tmp_path / "masks")],
            tmp_path,
        )
        frame = pd.read_csv(csv_path)
        image = Image.open(tmp_path / "masks" / "mask_L1.pgm")

        assert code == EXIT_OK
        assert list(frame.columns) == ["level", "sup_error", "mean_error", "frac_in_G"]
        assert frame["level"].tolist() == [1, 2, 3, 4, 5]
        assert image.size == (257, 1)
        assert (tmp_path / "masks" / "mask_L2.pgm").exists()

    def test_record_time(self, tmp_path, mocker):
        """Test --record-time writes the wall time into the meta block."""
        mocker.patch("app.time.perf_counter", side_effect=itertools.count(10.0, 2.5))

        code, report = _run(
            ["decompose", "--fn", "x1", "--domain", SMALL_GRID, "--levels", "3", "--record-time"],
            tmp_path,
        )

        assert code == EXIT_OK
        assert report["meta"]["wall_time_s"] == 2.5

    def test_stdout_default(self, capsys):
        """Test the JSON report goes to stdout without --out-json."""
        code = main(["decompose", "--fn", "x1", "--domain", SMALL_GRID, "--levels", "3"])
        report = json.loads(capsys.readouterr().out)

        assert code == EXIT_OK
        assert report["summary"]["levels"] == 3


class TestAuditCommand:
    """Test the audit subcommand."""

    def test_harmonic(self, tmp_path):
        """Test U_2 of the harmonic sequence is not open, witness 1."""
        code, report = _run(["audit", "--coeffs", "harmonic", "--levels", "3", "--vmax", "10"], tmp_path)

        assert code == EXIT_OK
        assert report["audit"]["first_non_open_level"] == 2
        assert report["audit"]["levels"][1]["witnesses"] == ["1/1"]
        assert report["audit"]["levels"][0]["open"] is True

    def test_approximated_sequence(self, tmp_path):
        """Test the exact audit refuses approximated coefficients."""
        code, _ = _run(["audit", "--coeffs", "power:p=1/2", "--levels", "3", "--vmax", "10"], tmp_path)

        assert code == EXIT_CONFIG

    def test_convergent_sequence_noted(self, tmp_path):
        """Test the audit report carries the failed sequence hypotheses."""
        code, report = _run(
            ["audit", "--coeffs", "explicit:1,1/2;then=geometric:r=1/2", "--levels", "3", "--vmax", "2",
             "--samples", "100"],
            tmp_path,
        )

        assert code == EXIT_OK
        assert any("sequence hypotheses fail" in note for note in report["audit"]["notes"])

    def test_markdown(self, tmp_path):
        """Test the markdown report."""
        md_path = tmp_path / "audit.md"
        code, _ = _run(
            ["audit", "--levels", "2", "--vmax", "2", "--samples", "100", "--out-md", str(md_path)],
            tmp_path,
        )

        assert code == EXIT_OK
        assert md_path.read_text().startswith("# Openness audit\n")


class TestOtherCommands:
    """Test compare, smooth and validate-seq."""

    def test_compare(self, tmp_path):
        """Test the comparison rows span both level ranges."""
        code, report = _run(
            ["compare", "--fn", "min(x1, 1.2)", "--domain", SMALL_GRID, "--levels", "4", "--dyadic-levels", "1..6"],
            tmp_path,
        )
        rows = report["comparison"]["rows"]

        assert code == EXIT_OK
        assert [row["level"] for row in rows] == [1, 2, 3, 4, 5, 6]
        assert rows[5]["greedy_sup_error"] is None

    def test_smooth(self, tmp_path):
        """Test bumps are emitted with rational parameters."""
        code, report = _run(
            ["smooth", "--fn", "min(x1, 1.2)", "--domain", "grid1d:0:3:1025", "--levels", "10"],
            tmp_path,
        )

        assert code == EXIT_OK
        assert report["bumps"][0]["level"] == 1
        assert report["bumps"][0]["height"] == "1/1"
        assert report["residual"]["domination_checked_samples"] > 0

    @pytest.mark.parametrize("coeffs,verdict", [
        ("harmonic", "proven-by-family"),
        ("explicit:1,1/2;then=geometric:r=1/2", "fail"),
    ])
    def test_validate_seq(self, tmp_path, coeffs, verdict):
        """Test validation verdicts are reported with exit code 0."""
        code, report = _run(["validate-seq", "--coeffs", coeffs, "--horizon", "20"], tmp_path)

        assert code == EXIT_OK
        assert report["validation"]["verdict"] == verdict

    def test_unknown_family(self, tmp_path):
        """Test an unknown sequence family is a configuration error."""
        code, _ = _run(["validate-seq", "--coeffs", "fibonacci"], tmp_path)

        assert code == EXIT_CONFIG
