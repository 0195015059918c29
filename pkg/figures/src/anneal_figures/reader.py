"""Loaders for the experiment output files (summary.json + curve_*.csv).

Every failure names the offending file (and column when applicable) so a
broken pipeline is diagnosable from the error alone.
"""

import json
from pathlib import Path

import numpy as np


class InputDataError(RuntimeError):
    """Missing or malformed experiment output."""


def load_summary(input_dir) -> dict:
    path = Path(input_dir) / "summary.json"
    if not path.exists():
        raise InputDataError(f"missing {path}: run the experiment first")
    try:
        with open(path) as fh:
            summary = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputDataError(f"unparseable {path}: {exc}") from exc
    for key in ("experiment", "fits", "tables"):
        if key not in summary:
            raise InputDataError(f"{path} lacks required key {key!r}")
    return summary


def load_table(input_dir, name, summary=None) -> dict:
    """Columns of curve_<name>.csv as a dict of float arrays."""
    directory = Path(input_dir)
    path = directory / f"curve_{name}.csv"
    if not path.exists():
        raise InputDataError(f"missing {path}")
    lines = path.read_text().splitlines()
    if not lines:
        raise InputDataError(f"{path} is empty")
    columns = lines[0].split(",")
    if summary is not None:
        declared = summary["tables"].get(name, {}).get("columns")
        if declared is not None and declared != columns:
            raise InputDataError(
                f"{path} columns {columns} do not match summary declaration {declared}"
            )
    try:
        data = np.array(
            [[float(x) for x in line.split(",")] for line in lines[1:]]
        )
    except ValueError as exc:
        raise InputDataError(f"non-numeric cell in {path}: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != len(columns):
        raise InputDataError(f"{path}: ragged rows")
    return {col: data[:, i] for i, col in enumerate(columns)}


def require_fit(summary, *keys):
    """Walk summary['fits'] by keys, failing with the full path on absence."""
    node = summary["fits"]
    walked = ["fits"]
    for key in keys:
        if not isinstance(node, dict) or key not in node:
            raise InputDataError(
                f"summary.json lacks {'.'.join(walked + [str(key)])}"
            )
        walked.append(str(key))
        node = node[key]
    return node
