"""Delimited output: trajectory CSV, delta-limit CSV and the JSON summary."""

from __future__ import annotations

import csv
import json
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from nlgp.diagnostics import DiagnosticsRecord

__all__ = [
    "trajectory_columns",
    "write_trajectory_csv",
    "read_trajectory_csv",
    "write_delta_limit_csv",
    "write_summary",
    "utc_timestamp",
    "TIMESTAMP_FIELD",
]

TIMESTAMP_FIELD = "generated_at"

_FIXED = ["t", "e_kinetic", "e_potential", "e_total", "l2_w", "h1semi_w"]
_TAIL = ["mass_total", "max_density_deviation"]


def trajectory_columns(dim: int, n_windows: int = 0, untwisted: bool = False) -> list[str]:
    """Column order of trajectory.csv.

    t, e_kinetic, e_potential, e_total, l2_w, h1semi_w, momentum_0..momentum_{dim-1},
    mass_total, max_density_deviation, [momentum_untwisted_1d], mass_window_0...
    """
    cols = _FIXED + [f"momentum_{j}" for j in range(dim)] + _TAIL
    if untwisted:
        cols.append("momentum_untwisted_1d")
    cols += [f"mass_window_{k}" for k in range(n_windows)]
    return cols


def _fmt(value) -> str:
    if value is None:
        return ""
    value = float(value)
    if math.isnan(value):
        return "nan"
    return repr(value)


def _row(rec: DiagnosticsRecord, untwisted: bool) -> list[str]:
    vals = [rec.t, rec.e_kinetic, rec.e_potential, rec.e_total, rec.l2_w, rec.h1semi_w]
    vals += list(rec.momentum)
    vals += [rec.mass_total, rec.max_density_deviation]
    if untwisted:
        vals.append(rec.momentum_untwisted_1d)
    vals += [value for _, _, value in rec.mass_windowed]
    return [_fmt(v) for v in vals]


def write_trajectory_csv(path, records: Sequence[DiagnosticsRecord], dim: int) -> list[str]:
    n_windows = len(records[0].mass_windowed) if records else 0
    untwisted = dim == 1
    cols = trajectory_columns(dim, n_windows, untwisted)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for rec in records:
            writer.writerow(_row(rec, untwisted))
    return cols


def read_trajectory_csv(path) -> dict[str, list[float]]:
    """Columns of a trajectory CSV as float lists (empty cells become nan)."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        out: dict[str, list[float]] = {name: [] for name in reader.fieldnames or []}
        for row in reader:
            for name, cell in row.items():
                out[name].append(float(cell) if cell else math.nan)
    return out


def write_delta_limit_csv(path, rows: Sequence[tuple[float, float]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["eps", "sup_t_h1_distance"])
        for eps, dist in rows:
            writer.writerow([_fmt(eps), _fmt(dist)])


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else str(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat()


def write_summary(path, summary: dict) -> None:
    text = json.dumps(_clean(summary), indent=2, sort_keys=False, allow_nan=False)
    Path(path).write_text(text + "\n")
