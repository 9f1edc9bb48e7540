"Shared plumbing for verification suites."

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, ClassVar

import numpy as np

from core.config import SuiteConfig, parse_selector
from core.scoring import CheckRecord, Outcome, run_check
from geometry.isoparametric import IsoparametricFamily, build_family

logger = logging.getLogger(__name__)


@dataclass
class VerificationSuite:
    """One named group of checks; subclasses implement :meth:`run`."""

    name: ClassVar[str] = ""

    def run(self, config: SuiteConfig) -> list[CheckRecord]:
        raise NotImplementedError

    def check(
        self,
        config: SuiteConfig,
        check_id: str,
        anchor: str,
        tolerance_key: str,
        body: Callable[[], Outcome],
        expected_fail: bool = False,
    ) -> CheckRecord:
        return run_check(f"{self.name}.{check_id}", anchor, config.tolerance(tolerance_key), body, expected_fail)

    @staticmethod
    def families(config: SuiteConfig) -> list[tuple[str, IsoparametricFamily]]:
        selected = []
        for selector in config.families:
            kind, params = parse_selector(selector)
            selected.append((selector, build_family(kind, **params)))
        return selected

    @staticmethod
    def int_seed(config: SuiteConfig, *labels: str) -> int:
        return int(config.rng(*labels).integers(2**31 - 1))

    @staticmethod
    def sphere_points(rng: np.random.Generator, dim: int, count: int) -> list[np.ndarray]:
        points = rng.standard_normal((count, dim))
        return list(points / np.linalg.norm(points, axis=1, keepdims=True))
