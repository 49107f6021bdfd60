"""Tests for the run configuration model."""
import pytest
from pydantic import ValidationError

from models.config import DEFAULT_EPSILONS, RunConfig, Subcommand, parse_level_list


class TestParseLevelList:
    """Test level list parsing."""

    @pytest.mark.parametrize("text,expected", [
        ("1..4", [1, 2, 3, 4]),
        ("1,2,5", [1, 2, 5]),
        ("1..3,8,2", [1, 2, 3, 8]),
        ("0", [0]),
    ])
    def test_forms(self, text, expected):
        """Test ranges, lists and mixtures."""
        assert parse_level_list(text) == expected

    @pytest.mark.parametrize("text", ["4..1", "a", "-1"])
    def test_invalid(self, text):
        """Test malformed lists raise ValueError."""
        with pytest.raises(ValueError):
            parse_level_list(text)


class TestRunConfig:
    """Test RunConfig validation and echo."""

    def test_defaults(self):
        """Test the default tolerance table and dyadic levels."""
        config = RunConfig(command=Subcommand.DECOMPOSE, fn="x1")

        assert config.eps == sorted(DEFAULT_EPSILONS, reverse=True)
        assert config.dyadic_levels == list(range(1, 13))
        assert config.levels == 200

    def test_extra_tolerances_merged(self):
        """Test user tolerances join the defaults."""
        config = RunConfig(command="decompose", fn="x1", eps="0.02,0.1")

        assert config.eps == [0.1, 0.02, 0.01, 0.001]

    @pytest.mark.parametrize("field,value", [
        ("levels", 0),
        ("horizon", 0),
        ("workers", 0),
        ("eps", "-0.1"),
        ("masks", "0..2"),
        ("fn", ""),
    ])
    def test_invalid_values(self, field, value):
        """Test out-of-range values are rejected."""
        with pytest.raises(ValidationError):
            RunConfig(command="decompose", **{"fn": "x1", field: value})

    def test_missing_output_directory(self, tmp_path):
        """Test output paths must be writable."""
        with pytest.raises(ValidationError):
            RunConfig(command="audit", vmax="10", out_json=str(tmp_path / "missing" / "a.json"))

    def test_echo_excludes_run_local_fields(self, tmp_path):
        """Test workers and output paths stay out of the echo."""
        config = RunConfig(command="decompose", fn="x1", workers=4, out_json=str(tmp_path / "a.json"))
        echo = config.config_echo()

        assert "workers" not in echo
        assert "out_json" not in echo
        assert echo["command"] == "decompose"
        assert echo["fn"] == "x1"

    def test_trace_id_deterministic(self):
        """Test identical configs share a trace id whatever the worker count."""
        one = RunConfig(command="decompose", fn="x1", workers=1)
        two = RunConfig(command="decompose", fn="x1", workers=2)
        other = RunConfig(command="decompose", fn="x1 + 1")

        assert one.trace_id() == two.trace_id()
        assert one.trace_id() != other.trace_id()
        assert len(one.trace_id()) == 8
