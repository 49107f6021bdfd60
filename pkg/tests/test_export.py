"""Tests for report export and logging helpers."""
import json
from fractions import Fraction

import numpy as np
import pytest
from PIL import Image

from models.reports import ComparisonRow, LevelError
from utils.export import (
    comparison_frame,
    error_curve_frame,
    export_masks_pgm,
    export_to_csv,
    export_to_json,
    export_to_markdown,
    write_text
)
from utils.logging_config import StructuredLogger, get_logger


@pytest.fixture
def level_errors():
    return [
        LevelError(level=1, sup_error=1.0, mean_error=0.5, frac_in_G=0.25),
        LevelError(level=2, sup_error=0.5, mean_error=0.25, frac_in_G=0.5),
    ]


class TestExportToJson:
    """Test JSON export."""

    def test_rationals_and_numpy(self):
        """Test rationals become "p/q" strings and numpy values plain JSON."""
        text = export_to_json({"vmax": Fraction(6, 5), "count": np.int64(3), "mask": np.array([True, False])})

        assert json.loads(text) == {"vmax": "6/5", "count": 3, "mask": [True, False]}
        assert text.endswith("}\n")

    def test_models(self, level_errors):
        """Test pydantic models are dumped."""
        assert json.loads(export_to_json(level_errors))[1]["level"] == 2

    def test_write_text_stdout(self, capsys):
        """Test "-" writes to stdout."""
        write_text("hello\n", "-")

        assert capsys.readouterr().out == "hello\n"


class TestTables:
    """Test CSV tables."""

    def test_error_curve_csv(self, level_errors, tmp_path):
        """Test the error-curve header and rows."""
        path = tmp_path / "errors.csv"
        text = export_to_csv(error_curve_frame(level_errors), str(path))

        assert text.splitlines()[0] == "level,sup_error,mean_error,frac_in_G"
        assert text.splitlines()[1] == "1,1.0,0.5,0.25"
        assert path.read_text() == text

    def test_comparison_blank_cells(self):
        """Test missing values are written as empty cells."""
        frame = comparison_frame([
            ComparisonRow(level=1, greedy_sup_error=0.5, dyadic_sup_error=0.25),
            ComparisonRow(level=2, dyadic_sup_error=0.125),
        ])
        lines = export_to_csv(frame).splitlines()

        assert lines[0] == "level,greedy_sup_error,dyadic_sup_error"
        assert lines[2] == "2,,0.125"


class TestMarkdown:
    """Test markdown export."""

    def test_sections_and_tables(self, level_errors):
        """Test scalars, nested mappings and record lists."""
        md = export_to_markdown({"levels": level_errors, "summary": {"all_open": False}, "note": "x"}, "Report")

        assert md.startswith("# Report\n\n")
        assert "- **note:** x" in md
        assert "## summary" in md
        assert "- **all_open:** no" in md
        assert "| level | sup_error | mean_error | frac_in_G |" in md


class TestMasks:
    """Test PGM mask images."""

    def test_two_dimensional(self, tmp_path):
        """Test members are white and the file name carries the level."""
        mask = np.zeros((3, 4), dtype=bool)
        mask[1, 2] = True

        written = export_masks_pgm({7: mask}, str(tmp_path / "out"))
        image = np.asarray(Image.open(written[0]))

        assert written[0].endswith("mask_L7.pgm")
        assert image.shape == (3, 4)
        assert image[1, 2] == 255
        assert image.sum() == 255


class TestStructuredLogger:
    """Test key/value logging."""

    def test_fields_appended(self, mocker):
        """Test fields follow the message and rationals print exactly."""
        logger = mocker.Mock()
        structured = StructuredLogger(logger, "abcd1234")

        structured.info("Audit finished", vmax=Fraction(1, 3), levels=4)

        logger.info.assert_called_once_with("Audit finished | {'vmax': '1/3', 'levels': 4}")

    def test_names_nested_under_root(self):
        """Test module loggers live below the project logger."""
        assert get_logger("calculus.scalar").name == "opensets.calculus.scalar"
        assert get_logger("opensets.cli").name == "opensets.cli"
