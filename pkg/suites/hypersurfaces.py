"""
Suites over isoparametric families: the Cartan–Münzner equations, constant
principal curvatures, austere focal submanifolds and the Lagrangian Gauss map.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from core.config import SuiteConfig
from core.scoring import CheckRecord, Outcome
from geometry.errors import NearFocalError, ProjectionError, UnreliableFitError
from geometry.isoparametric import (
    IsoparametricFamily,
    SpectrumSummary,
    austere_test,
    constancy_sweep,
    family_g2,
    focal_frame,
    focal_spectrum,
    hypersurface_spectrum,
    minimal_level,
    munzner_pde_residuals,
    project_with_retries,
    random_normal_direction,
    sample_focal_points,
)
from geometry.stenzel import gauss_map_sweep
from suites.base import VerificationSuite

logger = logging.getLogger(__name__)

LEVELS = (-0.5, 0.0, 0.5)
GAUSS_LEVELS = (0.0, 0.3)

# principal curvatures of a focal submanifold, cot(jπ/g) for 0 < j < g
FOCAL_CURVATURES: dict[int, tuple[float, ...]] = {
    2: (0.0,),
    3: (-1.0 / math.sqrt(3.0), 1.0 / math.sqrt(3.0)),
    4: (-1.0, 0.0, 1.0),
}


def expected_multiplicities(fam: IsoparametricFamily) -> list[int]:
    m1, m2 = fam.multiplicities
    return sorted(m1 if i % 2 == 0 else m2 for i in range(fam.degree))


def table_distance(spectrum: SpectrumSummary, expected: tuple[float, ...]) -> float:
    """Two-sided distance between the observed cluster centres and ``expected``."""

    observed = np.asarray(spectrum.values)
    table = np.asarray(expected)
    if observed.size == 0:
        return math.inf
    forward = np.max(np.min(np.abs(observed[:, None] - table[None, :]), axis=1))
    backward = np.max(np.min(np.abs(table[:, None] - observed[None, :]), axis=1))
    return float(max(forward, backward))


class MunznerSuite(VerificationSuite):
    name = "munzner"

    def run(self, config: SuiteConfig) -> list[CheckRecord]:
        count = config.sample_count("munzner")
        return [
            self.check(
                config,
                selector,
                "|∇F|² = g²|x|^{2g-2}, ΔF = ½ g²(m₂−m₁)|x|^{g-2}",
                "munzner.pde",
                lambda selector=selector, fam=fam: self._residual(config, selector, fam, count),
            )
            for selector, fam in self.families(config)
        ]

    def _residual(self, config: SuiteConfig, selector: str, fam: IsoparametricFamily, count: int) -> Outcome:
        points = self.sphere_points(config.rng(self.name, selector), fam.ambient_dim, count)
        r1, r2 = munzner_pde_residuals(fam, points)
        return Outcome(max(r1, r2), count, {"gradient": r1, "laplacian": r2, "provenance": fam.provenance})


class IsoparametricSuite(VerificationSuite):
    name = "isoparametric"

    def run(self, config: SuiteConfig) -> list[CheckRecord]:
        count = config.sample_count("isoparametric")
        records: list[CheckRecord] = []
        for selector, fam in self.families(config):
            for t in LEVELS:
                records.append(
                    self.check(
                        config,
                        f"{selector}.t={t:+.1f}",
                        "level sets have constant principal curvatures",
                        "isoparametric.spread",
                        lambda selector=selector, fam=fam, t=t: self._constancy(config, selector, fam, t, count),
                    )
                )
            records.append(
                self.check(
                    config,
                    f"{selector}.multiplicities",
                    "g distinct curvatures with alternating multiplicities",
                    "focal.cluster",
                    lambda selector=selector, fam=fam: self._multiplicities(config, selector, fam),
                )
            )
        return records

    def _constancy(self, config: SuiteConfig, selector: str, fam: IsoparametricFamily, t: float, count: int) -> Outcome:
        report = constancy_sweep(fam, t, count, seed=self.int_seed(config, self.name, selector, str(t)))
        return Outcome(
            report.spread,
            report.count - report.failures,
            {"failures": report.failures, "reference": list(report.reference)},
        )

    def _multiplicities(self, config: SuiteConfig, selector: str, fam: IsoparametricFamily) -> Outcome:
        x = project_with_retries(fam, 0.0, config.rng(self.name, selector, "multiplicities"))
        spectrum = hypersurface_spectrum(fam, x)
        observed = sorted(spectrum.multiplicities)
        expected = expected_multiplicities(fam)
        residual = 0.0 if observed == expected and spectrum.separated else math.inf
        return Outcome(residual, detail={"observed": observed, "expected": expected, "curvatures": spectrum.values})


class AustereSuite(VerificationSuite):
    name = "austere"

    def run(self, config: SuiteConfig) -> list[CheckRecord]:
        records: list[CheckRecord] = []
        for selector, fam in self.families(config):
            if fam.degree not in FOCAL_CURVATURES:
                logger.info("austere: %s has no focal submanifold of positive dimension; skipped", selector)
                continue
            for branch in (1, -1):
                label = f"{selector}.focal{'+' if branch > 0 else '-'}"
                spectra: list[SpectrumSummary] = []
                unreliable = [0]
                records.append(
                    self.check(
                        config,
                        f"{label}.spectrum",
                        "focal principal curvatures cot(jπ/g)",
                        "focal.cluster",
                        lambda fam=fam, branch=branch, label=label, spectra=spectra, unreliable=unreliable: self._spectra(
                            config, fam, branch, label, spectra, unreliable
                        ),
                    )
                )
                records.append(
                    self.check(
                        config,
                        f"{label}.symmetric",
                        "focal submanifolds are austere",
                        "austere.symmetry",
                        lambda spectra=spectra, unreliable=unreliable: self._symmetry(spectra, unreliable[0]),
                    )
                )
            if fam.degree == 3:
                records.append(
                    self.check(
                        config,
                        f"{selector}.minimal",
                        "the minimal Cartan hypersurface is austere",
                        "austere.symmetry",
                        lambda selector=selector, fam=fam: self._minimal(config, selector, fam),
                    )
                )
        if config.negative_controls:
            records.append(
                self.check(
                    config,
                    "negative.g2-level",
                    "negative control: a non-minimal level of S¹×S⁵ is not austere",
                    "austere.symmetry",
                    lambda: self._level(config, family_g2(1), 0.5, "negative"),
                    expected_fail=True,
                )
            )
        return records

    def _spectra(
        self,
        config: SuiteConfig,
        fam: IsoparametricFamily,
        branch: int,
        label: str,
        spectra: list[SpectrumSummary],
        unreliable: list[int],
    ) -> Outcome:
        rng = config.rng(self.name, label)
        directions = config.sample_count("focal.directions")
        distance = 0.0
        for focal in sample_focal_points(fam, branch, config.sample_count("focal"), rng):
            frame = focal_frame(fam, focal.point)
            try:
                for _ in range(directions):
                    spectrum = focal_spectrum(fam, focal.point, random_normal_direction(frame, rng), frame)
                    spectra.append(spectrum)
                    distance = max(distance, table_distance(spectrum, FOCAL_CURVATURES[fam.degree]))
            except UnreliableFitError as exc:
                unreliable[0] += 1
                logger.warning("austere %s: %s (condition %.2e)", label, exc, exc.condition)
        if not spectra:
            distance = math.nan
        return Outcome(distance, len(spectra), {"unreliable": unreliable[0]})

    @staticmethod
    def _symmetry(spectra: list[SpectrumSummary], unreliable: int) -> Outcome:
        if not spectra:
            return Outcome(math.nan, 0, {"status": "INCONCLUSIVE", "unreliable": unreliable})
        certificate = austere_test(spectra, unreliable)
        return Outcome(
            certificate.worst_asymmetry,
            certificate.spectra,
            {"status": certificate.status, "unreliable": certificate.unreliable, "failing": list(certificate.failing)},
        )

    def _minimal(self, config: SuiteConfig, selector: str, fam: IsoparametricFamily) -> Outcome:
        t = minimal_level(fam, seed=self.int_seed(config, self.name, selector, "minimal"))
        outcome = self._level(config, fam, t, selector)
        return Outcome(outcome.residual, outcome.samples, {**outcome.detail, "level": t})

    def _level(self, config: SuiteConfig, fam: IsoparametricFamily, t: float, label: str) -> Outcome:
        rng = config.rng(self.name, label, "level")
        spectra: list[SpectrumSummary] = []
        for _ in range(config.sample_count("focal")):
            try:
                spectra.append(hypersurface_spectrum(fam, project_with_retries(fam, t, rng)))
            except (ProjectionError, NearFocalError) as exc:
                logger.warning("austere %s t=%s: %s", label, t, exc)
        return self._symmetry(spectra, 0)


class GaussMapSuite(VerificationSuite):
    name = "gauss"

    def run(self, config: SuiteConfig) -> list[CheckRecord]:
        count = config.sample_count("gauss")
        records: list[CheckRecord] = []
        for selector, fam in self.families(config):
            for t in GAUSS_LEVELS:
                records.append(
                    self.check(
                        config,
                        f"{selector}.t={t:+.1f}",
                        "the Gauss map of W_t into Q^n is Lagrangian",
                        "gauss.lagrangian",
                        lambda selector=selector, fam=fam, t=t: self._sweep(config, selector, fam, t, count),
                    )
                )
        return records

    def _sweep(self, config: SuiteConfig, selector: str, fam: IsoparametricFamily, t: float, count: int) -> Outcome:
        report = gauss_map_sweep(fam, t, count, seed=self.int_seed(config, self.name, selector, str(t)))
        residual = report.lagrangian_residual if report.samples else math.nan
        return Outcome(residual, report.samples, {"quadric_residual": report.quadric_residual, "rejected": report.rejected})
