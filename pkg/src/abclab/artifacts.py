"""CSV and manifest writers shared by the experiments and the CLI.

Floats are written with ``repr`` (shortest round-trip form), integers as
integers and everything else with ``str``; line endings are LF.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Mapping

import numpy as np


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_columns(path, columns: Mapping[str, object]) -> None:
    """Write equal-length columns under a header row."""
    names = list(columns)
    cols = [list(np.asarray(columns[k]).tolist()) if not isinstance(columns[k], list) else columns[k] for k in names]
    lengths = {len(c) for c in cols}
    if len(lengths) > 1:
        raise ValueError(f"column lengths differ: {dict(zip(names, map(len, cols)))}")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([_cell(v) for v in row])


def read_columns(path) -> dict[str, list[str]]:
    """Columns of a CSV as lists of raw strings, keyed by header name."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    return {h: [r[i] for r in rows] for i, h in enumerate(header)}


def float_column(columns, name) -> np.ndarray:
    return np.array([float(v) for v in columns[name]])


def write_manifest(path, entries: Mapping[str, object]) -> None:
    """Plain ``key = value`` lines, in insertion order."""
    Path(path).write_text("".join(f"{k} = {_cell(v)}\n" for k, v in entries.items()))
