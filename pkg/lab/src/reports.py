"""Serialization of reports to CSV and JSON.

Outputs are byte-stable for identical reports: floats are written with
``repr``, JSON keys are sorted and NaN becomes an empty CSV cell or ``null``.
Wall-clock timings go to a separate ``timings.json``.
"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Iterable

from .errors import ArgumentError
from .schemas import InflationReport, LedgerRow

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")
REPORT_STEM = "inflation_report"
TIMINGS_FILE = "timings.json"

_LEAD_COLUMNS = ["N", "t", "t_factor", "k_N", "status", "norm_phi", "norm_phi_t"]
_TAIL_COLUMNS = [
    "norm_HF1",
    "norm_HF2",
    "norm_f_ell",
    "f_lower",
    *[f"I{i}" for i in range(1, 7)],
    *[f"I{i}_measured" for i in range(1, 7)],
    "margin_b",
    "J_ratio",
    "phi_ratio",
    "family_hash",
]


def csv_columns(ell: int) -> list[str]:
    """Fixed column order of the ledger CSV for a given ell."""
    return (
        _LEAD_COLUMNS
        + [f"norm_EJ_{k}" for k in range(1, ell + 1)]
        + [f"norm_HF_{k}" for k in range(1, ell + 1)]
        + _TAIL_COLUMNS
    )


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(value)
    return str(value)


def _row_cells(row: LedgerRow, ell: int) -> list[str]:
    values = row.model_dump(exclude={"components"})
    for k in range(1, ell + 1):
        values[f"norm_EJ_{k}"] = row.norm_EJ[k - 1] if k <= len(row.norm_EJ) else None
        values[f"norm_HF_{k}"] = row.norm_HF[k - 1] if k <= len(row.norm_HF) else None
    return [_cell(values[name]) for name in csv_columns(ell)]


def to_jsonable(value: Any) -> Any:
    """Replace NaN and infinities by None, recursively."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    return value


def write_json(payload: Any, path: Path) -> Path:
    """Write ``payload`` as sorted, indented JSON with a trailing newline."""
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(to_jsonable(payload), indent=2, sort_keys=True, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")
    logger.info(f"Wrote {path}")
    return path


def write_csv(rows: Iterable[LedgerRow], ell: int, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(csv_columns(ell))
        for row in rows:
            writer.writerow(_row_cells(row, ell))
    logger.info(f"Wrote {path}")
    return path


def emit(
    report: InflationReport,
    fmt: str,
    out_dir: str | Path,
    stem: str = REPORT_STEM,
) -> list[Path]:
    """Write a report and its timings sidecar.

    Args:
        report: Complete report
        fmt: ``csv`` or ``json``
        out_dir: Target directory, created if missing
        stem: File name without suffix

    Returns:
        Paths written, the report first

    Raises:
        ArgumentError: If the format is unknown
        OSError: If the directory is not writable
    """
    if fmt not in FORMATS:
        raise ArgumentError(f"format must be one of {FORMATS}, got {fmt!r}")
    out = Path(out_dir)
    target = out / f"{stem}.{fmt}"
    if fmt == "csv":
        written = [write_csv(report.rows, report.ell, target)]
    else:
        written = [write_json(report.model_dump(mode="python"), target)]
    written.append(write_json(report.timings, out / TIMINGS_FILE))
    return written
