"""
Suites for the calculus substrate: jets against finite differences, and the
standard G2 three-form.
"""

from __future__ import annotations

import logging
from typing import Any, Callable

import numpy as np
from scipy.stats import special_ortho_group

from core.config import SuiteConfig
from core.scoring import CheckRecord, Outcome
from geometry import jet
from geometry.exterior import (
    FormField,
    exterior_derivative,
    exterior_derivative_squared,
    g2_three_form,
    hodge_star,
    metric_from_three_form,
    pullback,
    wedge,
)
from suites.base import VerificationSuite

logger = logging.getLogger(__name__)

BATTERY: dict[str, Callable[[Any], Any]] = {
    "sqrt": lambda x: jet.sqrt(1.5 + x[0] * x[0]) * x[1],
    "exp-log": lambda x: jet.exp(x[0]) * jet.log(2.0 + x[1] * x[1]) + x[2],
    "trig": lambda x: jet.sin(x[0]) * jet.cos(x[1]) + jet.tan(0.3 * x[2]),
    "hyperbolic": lambda x: jet.sinh(x[0]) * jet.cosh(x[1]) + jet.tanh(x[2]),
    "arctan-power": lambda x: jet.arctan(x[0] * x[1]) + jet.power(1.2 + x[2] * x[2], 1.5),
    "rational": lambda x: x[0] / (1.5 + x[1] * x[1]) - x[2] * x[2] * x[0],
}


def _one_form(p: jet.Jet2) -> dict[tuple[int, ...], Any]:
    return {
        (0,): jet.sin(p[0] * p[1]),
        (1,): jet.exp(p[2]) * p[3],
        (2,): p[0] * p[0] * p[3],
        (3,): jet.cos(p[1] + p[2]),
    }


def _two_form(p: jet.Jet2) -> dict[tuple[int, ...], Any]:
    return {
        (0, 1): p[2] * p[3],
        (0, 3): jet.sinh(p[1]),
        (1, 2): jet.exp(p[0] * p[3]),
        (2, 3): jet.arctan(p[0] + p[1]),
    }


class AutomaticDifferentiationSuite(VerificationSuite):
    name = "ad"

    def run(self, config: SuiteConfig) -> list[CheckRecord]:
        count = config.sample_count("ad")
        records = [
            self.check(config, "battery", "AD substrate: Jet2 value/gradient/Hessian", "ad.relative", lambda: self._battery(config, count)),
            self.check(config, "polynomials", "Cartan–Münzner polynomials", "ad.relative", lambda: self._polynomials(config, count)),
            self.check(config, "d_squared", "exterior calculus: d∘d = 0", "ad.d_squared", lambda: self._d_squared(config, count)),
        ]
        return records

    def _battery(self, config: SuiteConfig, count: int) -> Outcome:
        rng = config.rng(self.name, "battery")
        worst: dict[str, float] = {}
        for label, f in BATTERY.items():
            worst[label] = max(jet.fd_check(f, rng.uniform(-0.8, 0.8, size=3)).relative_error for _ in range(count))
        return Outcome(max(worst.values()), count * len(BATTERY), {"per_function": worst})

    def _polynomials(self, config: SuiteConfig, count: int) -> Outcome:
        worst: dict[str, float] = {}
        for selector, fam in self.families(config):
            rng = config.rng(self.name, "polynomial", selector)
            worst[selector] = max(
                jet.fd_check(fam.polynomial, x).relative_error for x in self.sphere_points(rng, fam.ambient_dim, count)
            )
        return Outcome(max(worst.values()), count * len(worst), {"per_family": worst})

    def _d_squared(self, config: SuiteConfig, count: int) -> Outcome:
        rng = config.rng(self.name, "d_squared")
        fields = [FormField(1, 4, _one_form), FormField(2, 4, _two_form)]
        residual = 0.0
        for _ in range(count):
            point = rng.uniform(-1.0, 1.0, size=4)
            for field_ in fields:
                residual = max(residual, exterior_derivative_squared(field_, point).norm_inf())
        return Outcome(residual, count * len(fields))


class G2FormSuite(VerificationSuite):
    name = "g2"

    def run(self, config: SuiteConfig) -> list[CheckRecord]:
        phi = g2_three_form()
        star = hodge_star(phi)
        return [
            self.check(config, "metric", "φ induces the Euclidean metric", "g2.metric", lambda: self._metric(phi)),
            self.check(config, "rotated_metric", "the induced metric is SO(7)-natural", "g2.metric", lambda: self._rotated(config, phi)),
            self.check(config, "closed", "dφ = 0 and d*φ = 0", "g2.closed", lambda: self._closed(phi, star)),
            self.check(config, "volume", "φ ∧ *φ = 7 vol", "g2.volume", lambda: self._volume(phi, star)),
        ]

    @staticmethod
    def _metric(phi: Any) -> Outcome:
        return Outcome(float(np.max(np.abs(metric_from_three_form(phi) - np.eye(7)))))

    def _rotated(self, config: SuiteConfig, phi: Any) -> Outcome:
        rng = config.rng(self.name, "rotated")
        count = 5
        residual = 0.0
        for _ in range(count):
            a = special_ortho_group.rvs(7, random_state=rng)
            residual = max(residual, float(np.max(np.abs(metric_from_three_form(pullback(phi, a)) - np.eye(7)))))
        return Outcome(residual, count)

    @staticmethod
    def _closed(phi: Any, star: Any) -> Outcome:
        point = np.zeros(7)
        d_phi = exterior_derivative(FormField(3, 7, lambda p: dict(phi.coeffs)), point)
        d_star = exterior_derivative(FormField(4, 7, lambda p: dict(star.coeffs)), point)
        return Outcome(max(d_phi.norm_inf(), d_star.norm_inf()), detail={"d_phi": d_phi.norm_inf(), "d_star_phi": d_star.norm_inf()})

    @staticmethod
    def _volume(phi: Any, star: Any) -> Outcome:
        top = float(wedge(phi, star).component(range(7)))
        return Outcome(abs(top - 7.0), detail={"phi_wedge_star_phi": top})
