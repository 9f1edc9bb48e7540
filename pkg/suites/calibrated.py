"""
Special Lagrangian conormal bundles in the Stenzel metric on ``T*Sⁿ``.

Each chart is sampled once; its certificates (one per radial potential) feed
three records: the Lagrangian residual, the spread of the phase and the
distance of the phase from the class predicted by the dimension.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Callable

from core.config import SuiteConfig, get_settings
from core.scoring import CheckRecord, Outcome
from geometry.stenzel import (
    MIN_SAMPLES,
    SlagCertificate,
    SubmanifoldChart,
    build_submanifold,
    phase_distance,
    phase_of_dimension,
    sample_conormal,
    slag_sweep,
    submanifold_from_manifest,
)
from suites.base import VerificationSuite

logger = logging.getLogger(__name__)

ChartFactory = Callable[[], SubmanifoldChart]

CERTIFIED_CHARTS: list[tuple[str, dict[str, int]]] = [
    ("equator", {"n": 4}),
    ("equator", {"n": 7}),
    ("g2-focal", {"k": 3, "n": 7, "branch": 1}),
    ("g2-focal", {"k": 2, "n": 7, "branch": -1}),
    ("veronese", {"branch": -1}),
    ("fkm-focal", {"m": 1, "ell": 3}),
]

NEGATIVE_CHART = ("g2-level", {"k": 1, "n": 7, "t": 0.5})


def chart_label(name: str, params: dict[str, float]) -> str:
    return name + "".join(f".{key}={value}" for key, value in params.items())


def manifest_charts(directory: Path) -> list[tuple[str, ChartFactory]]:
    if not directory.is_dir():
        return []
    return [
        (f"manifest.{path.stem}", lambda path=path: submanifold_from_manifest(path.read_text(encoding="utf-8")))
        for path in sorted(directory.glob("*.txt"))
    ]


class SpecialLagrangianSuite(VerificationSuite):
    name = "slag"

    def run(self, config: SuiteConfig) -> list[CheckRecord]:
        charts: list[tuple[str, ChartFactory]] = [
            (chart_label(name, params), lambda name=name, params=params: build_submanifold(name, **params))
            for name, params in CERTIFIED_CHARTS
        ]
        charts.extend(manifest_charts(get_settings().manifest_dir))
        cache: dict[str, list[SlagCertificate]] = {}
        records: list[CheckRecord] = []
        for label, factory in charts:
            certify = self._certifier(config, label, factory, cache)
            records.append(
                self.check(
                    config,
                    f"{label}.lagrangian",
                    "the conormal bundle is Lagrangian for the Stenzel form",
                    "slag.lagrangian",
                    lambda certify=certify: self._lagrangian(certify()),
                )
            )
            records.append(
                self.check(
                    config,
                    f"{label}.phase",
                    "the conormal of an austere submanifold has constant phase",
                    "slag.phase",
                    lambda certify=certify: self._spread(certify()),
                )
            )
            records.append(
                self.check(
                    config,
                    f"{label}.phase_class",
                    "the phase is (n−p)·π/2 mod π",
                    "slag.phase",
                    lambda certify=certify, factory=factory: self._phase_class(certify(), factory()),
                )
            )
        if config.negative_controls:
            name, params = NEGATIVE_CHART
            label = chart_label(name, params)
            certify = self._certifier(config, label, lambda: build_submanifold(name, **params), cache)
            records.append(
                self.check(
                    config,
                    f"negative.{label}.lagrangian",
                    "conormal bundles are Lagrangian without austerity",
                    "slag.lagrangian",
                    lambda: self._lagrangian(certify()),
                )
            )
            records.append(
                self.check(
                    config,
                    f"negative.{label}.phase",
                    "negative control: a non-austere level has varying phase",
                    "slag.negative",
                    lambda: self._spread(certify()),
                    expected_fail=True,
                )
            )
        return records

    def _certifier(
        self, config: SuiteConfig, label: str, factory: ChartFactory, cache: dict[str, list[SlagCertificate]]
    ) -> Callable[[], list[SlagCertificate]]:
        def certify() -> list[SlagCertificate]:
            if label not in cache:
                chart = factory()
                count = max(config.sample_count("slag"), MIN_SAMPLES)
                samples = sample_conormal(chart, count, config.rng(self.name, label))
                cache[label] = slag_sweep(samples)
                if not chart.certified:
                    logger.info("slag %s: user-supplied chart, verdicts are uncertified", label)
            return cache[label]

        return certify

    @staticmethod
    def _detail(certificates: list[SlagCertificate]) -> dict[str, object]:
        return {
            "potentials": [c.potential for c in certificates],
            "certified": all(c.certified for c in certificates),
            "tangency": max(c.tangency for c in certificates),
            "min_volume": min(c.min_volume for c in certificates),
        }

    def _lagrangian(self, certificates: list[SlagCertificate]) -> Outcome:
        residual = max(c.lagrangian_residual for c in certificates)
        return Outcome(residual, certificates[0].samples, self._detail(certificates))

    def _spread(self, certificates: list[SlagCertificate]) -> Outcome:
        spread = max(c.phase_spread for c in certificates)
        detail = {**self._detail(certificates), "phase": certificates[0].phase}
        return Outcome(spread, certificates[0].samples, detail)

    def _phase_class(self, certificates: list[SlagCertificate], chart: SubmanifoldChart) -> Outcome:
        predicted = phase_of_dimension(chart.dim, chart.ambient_dim - 1)
        distance = max(phase_distance(c.phase, predicted) for c in certificates)
        return Outcome(
            distance,
            certificates[0].samples,
            {"predicted": predicted, "observed": [c.phase for c in certificates], "dim": chart.dim},
        )
