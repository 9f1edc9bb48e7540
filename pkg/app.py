"Main orchestration entry-point for the verification toolkit."

from __future__ import annotations

import logging
from pathlib import Path

from core.config import SuiteConfig, ensure_directories, get_settings
from core.scoring import Report
from suites import SUITE_CLASSES
from suites.graph import VerificationGraph
from utils.report_writer import emit_report

logger = logging.getLogger(__name__)


class VerificationOrchestrator:
    """Runs one suite (or the whole chain for ``all``) and writes its report."""

    def __init__(self) -> None:
        ensure_directories()
        self.suites = [cls() for cls in SUITE_CLASSES.values()]

    def run_suite(self, config: SuiteConfig) -> Report:
        if config.suite == "all":
            state = VerificationGraph(self.suites).run(config)
            records = state["records"]
        else:
            records = SUITE_CLASSES[config.suite]().run(config)
        report = Report(config=config.as_dict(), records=records)
        logger.info("suite %s finished: %s", config.suite, report.summary)
        return report

    def report_path(self, config: SuiteConfig) -> Path:
        if config.output is not None:
            return config.output
        return get_settings().output_dir / f"{config.suite}-{config.seed}.{config.report_format}"

    def write_report(self, report: Report, config: SuiteConfig) -> Path:
        path = self.report_path(config)
        emit_report(report, config.report_format, path)
        return path
