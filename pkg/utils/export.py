"""Export utilities for reports, error curves and mask images."""
import json
import sys
from datetime import datetime
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

import numpy as np
import pandas as pd
from PIL import Image
from pydantic import BaseModel

from utils.rationals import format_rational
from utils.validation import sanitize_filename

ERROR_CURVE_COLUMNS = ["level", "sup_error", "mean_error", "frac_in_G"]
COMPARISON_COLUMNS = ["level", "greedy_sup_error", "dyadic_sup_error"]


def export_to_json(data: Any) -> str:
    """
    Export report data to a JSON string.

    Args:
        data: Report model, dictionary or list

    Returns:
        JSON string (rationals as "p/q" strings)
    """
    export_data = _prepare_for_export(data)

    return json.dumps(export_data, indent=2) + "\n"


def write_text(text: str, path: Optional[str] = None) -> None:
    """Write text to path, or to stdout when path is None or "-"."""
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(text)


def error_curve_frame(levels: Iterable[Any]) -> pd.DataFrame:
    """
    Build the per-level error table.

    Args:
        levels: LevelError models (or dicts with the same keys)

    Returns:
        DataFrame with columns level,sup_error,mean_error,frac_in_G
    """
    rows = [_prepare_for_export(level) for level in levels]
    return pd.DataFrame(rows, columns=ERROR_CURVE_COLUMNS)


def comparison_frame(rows: Iterable[Any]) -> pd.DataFrame:
    """Side-by-side sup errors; a method without a value at a level leaves the cell blank."""
    records = [_prepare_for_export(row) for row in rows]
    frame = pd.DataFrame(records, columns=COMPARISON_COLUMNS)
    frame["level"] = frame["level"].astype(int)
    return frame


def export_to_csv(frame: pd.DataFrame, path: Optional[str] = None) -> str:
    """
    Write a table as CSV (to stdout when path is None or "-").

    Returns:
        The CSV text
    """
    text = frame.to_csv(index=False, lineterminator="\n", na_rep="")
    if path is not None:
        write_text(text, path)
    return text


def export_masks_pgm(masks: Dict[int, np.ndarray], directory: str) -> List[str]:
    """
    Write 2D membership masks as binary PGM images (255 = member).

    Args:
        masks: level -> boolean array of the grid shape
        directory: Output directory (created if missing)

    Returns:
        Paths written, one mask_L{n}.pgm per level
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for level in sorted(masks):
        pixels = np.where(np.asarray(masks[level], dtype=bool), 255, 0).astype(np.uint8)
        if pixels.ndim == 1:
            pixels = pixels.reshape(1, -1)
        path = out / sanitize_filename(f"mask_L{level}.pgm")
        Image.fromarray(pixels).save(path, format="PPM")
        written.append(str(path))
    return written


def export_to_markdown(report: Any, title: str = "OpenSets report") -> str:
    """
    Export a report to markdown.

    Scalars become a summary list, lists of records become tables and nested
    mappings become subsections.

    Args:
        report: Report model or dictionary
        title: Document title

    Returns:
        Markdown formatted string
    """
    data = _prepare_for_export(report)
    md = f"# {title}\n\n"
    md += _markdown_section(data, depth=2)
    return md


def _markdown_section(data: Any, depth: int) -> str:
    if not isinstance(data, dict):
        return f"{_markdown_value(data)}\n\n"

    md = ""
    scalars = {k: v for k, v in data.items() if not isinstance(v, (dict, list))}
    if scalars:
        for key, value in scalars.items():
            md += f"- **{key}:** {_markdown_value(value)}\n"
        md += "\n"

    for key, value in data.items():
        if isinstance(value, dict):
            md += f"{'#' * depth} {key}\n\n"
            md += _markdown_section(value, depth + 1) if value else "None\n\n"
        elif isinstance(value, list):
            md += f"{'#' * depth} {key}\n\n"
            md += _markdown_list(value)
    return md


def _markdown_list(items: List[Any]) -> str:
    if not items:
        return "None\n\n"
    if all(isinstance(item, dict) for item in items):
        columns: List[str] = []
        for item in items:
            columns.extend(k for k in item if k not in columns)
        md = "| " + " | ".join(columns) + " |\n"
        md += "|" + "---|" * len(columns) + "\n"
        for item in items:
            md += "| " + " | ".join(_markdown_value(item.get(c, "")) for c in columns) + " |\n"
        return md + "\n"
    return "".join(f"- {_markdown_value(item)}\n" for item in items) + "\n"


def _markdown_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, (list, dict)):
        return json.dumps(value)
    return str(value)


def _prepare_for_export(data: Any) -> Any:
    """
    Prepare data for JSON export by handling non-serializable types.

    Args:
        data: Raw data (models, dictionaries, rationals, numpy values)

    Returns:
        Serializable structure
    """
    if isinstance(data, BaseModel):
        return _prepare_for_export(data.model_dump(mode="json"))
    elif isinstance(data, dict):
        return {str(k): _prepare_for_export(v) for k, v in data.items()}
    elif isinstance(data, (list, tuple)):
        return [_prepare_for_export(item) for item in data]
    elif isinstance(data, Fraction):
        return format_rational(data)
    elif isinstance(data, Enum):
        return data.value
    elif isinstance(data, np.ndarray):
        return _prepare_for_export(data.tolist())
    elif isinstance(data, np.generic):
        return data.item()
    elif isinstance(data, datetime):
        return data.isoformat()
    elif hasattr(data, '__dict__'):
        return _prepare_for_export(vars(data))
    else:
        return data
