"""
Serialization of verification reports.

JSON keeps the full record (including ``detail``); CSV is the flat
projection onto :data:`CSV_COLUMNS`, one record per row.
"""

from __future__ import annotations

import io
import logging
from pathlib import Path

import orjson
import pandas as pd

from core.scoring import Report

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["check_id", "anchor", "status", "residual", "tolerance", "samples", "ms"]


def report_frame(report: Report) -> pd.DataFrame:
    rows = [{column: record.as_dict()[column] for column in CSV_COLUMNS} for record in report.records]
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def emit_report(report: Report, report_format: str = "json", path: Path | None = None, include_timing: bool = True) -> bytes:
    """Serialize ``report``; also write it to ``path`` when one is given."""

    if report_format == "json":
        payload = orjson.dumps(
            report.as_dict(include_timing=include_timing),
            option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_NON_STR_KEYS,
        )
    elif report_format == "csv":
        frame = report_frame(report)
        if not include_timing:
            frame = frame.drop(columns=["ms"])
        buffer = io.StringIO()
        frame.to_csv(buffer, index=False, float_format="%.6e")
        payload = buffer.getvalue().encode("utf-8")
    else:
        raise ValueError(f"unknown report format {report_format!r}")
    if path is not None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(payload)
        logger.info("report written to %s (%d records)", path, len(report.records))
    return payload
