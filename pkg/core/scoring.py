"""
Residual grading and the verification report.

Every check produces one :class:`CheckRecord`. A record is graded from a
measured residual against a tolerance: ``PASS`` below it, ``FAIL`` above.
Negative controls invert the rule and are recorded as ``XFAIL`` when they
fail as intended; an unexpected pass of a negative control is a ``FAIL``. A
check that raises a geometry error is recorded as ``ERROR``.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable

from geometry.errors import GeometryError

logger = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = "1.0"
TOOLKIT_VERSION = "0.1.0"

PASS, FAIL, ERROR, XFAIL = "PASS", "FAIL", "ERROR", "XFAIL"
STATUSES = (PASS, XFAIL, FAIL, ERROR)

EXIT_CODES = {PASS: 0, XFAIL: 0, FAIL: 1, ERROR: 2}


@dataclass
class CheckRecord:
    check_id: str
    anchor: str
    status: str
    residual: float
    tolerance: float
    samples: int
    ms: float
    expected_fail: bool = False
    detail: dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> dict[str, Any]:
        return {
            "check_id": self.check_id,
            "anchor": self.anchor,
            "status": self.status,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "samples": self.samples,
            "ms": self.ms,
            "expected_fail": self.expected_fail,
            "detail": self.detail,
        }


def grade(residual: float, tolerance: float, expected_fail: bool = False) -> str:
    if math.isnan(residual):
        return FAIL
    if expected_fail:
        return XFAIL if residual > tolerance else FAIL
    return PASS if residual < tolerance else FAIL


@dataclass(frozen=True)
class Outcome:
    """What a check body returns: the graded residual plus anything worth echoing."""

    residual: float
    samples: int = 1
    detail: dict[str, Any] = field(default_factory=dict)


def run_check(
    check_id: str,
    anchor: str,
    tolerance: float,
    body: Callable[[], Outcome],
    expected_fail: bool = False,
) -> CheckRecord:
    start = time.perf_counter()
    try:
        outcome = body()
    except GeometryError as exc:
        ms = (time.perf_counter() - start) * 1000.0
        logger.error("%s raised %s: %s", check_id, type(exc).__name__, exc)
        return CheckRecord(
            check_id, anchor, ERROR, math.nan, tolerance, 0, ms, expected_fail, {"error": f"{type(exc).__name__}: {exc}"}
        )
    ms = (time.perf_counter() - start) * 1000.0
    status = grade(outcome.residual, tolerance, expected_fail)
    level = logging.INFO if status in (PASS, XFAIL) else logging.WARNING
    logger.log(level, "%s %s residual=%.3e tol=%.1e", check_id, status, outcome.residual, tolerance)
    return CheckRecord(
        check_id, anchor, status, float(outcome.residual), tolerance, outcome.samples, ms, expected_fail, outcome.detail
    )


@dataclass
class Report:
    config: dict[str, Any]
    records: list[CheckRecord] = field(default_factory=list)
    version: str = REPORT_SCHEMA_VERSION
    toolkit: str = TOOLKIT_VERSION

    @property
    def summary(self) -> dict[str, int]:
        counts = {status: 0 for status in STATUSES}
        for record in self.records:
            counts[record.status] += 1
        counts["total"] = len(self.records)
        return counts

    @property
    def worst_status(self) -> str:
        worst = PASS
        for record in self.records:
            if EXIT_CODES[record.status] > EXIT_CODES[worst]:
                worst = record.status
        return worst

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.worst_status]

    def as_dict(self, include_timing: bool = True) -> dict[str, Any]:
        records = []
        for record in self.records:
            row = record.as_dict()
            if not include_timing:
                row.pop("ms")
            records.append(row)
        return {
            "version": self.version,
            "toolkit": self.toolkit,
            "config": self.config,
            "records": records,
            "summary": self.summary,
        }
