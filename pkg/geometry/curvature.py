"""
Levi-Civita curvature of chart metrics evaluated in jets.

Index convention: ``R^l_{ijk} = ∂_i Γ^l_{jk} − ∂_j Γ^l_{ik} + Γ^l_{im}Γ^m_{jk}
− Γ^l_{jm}Γ^m_{ik}`` and ``Ric_{jk} = R^i_{ijk}``, so the round sphere has a
positive Einstein constant. Second derivatives of the metric come straight
from the jet Hessians; no third derivatives are needed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from geometry import jet
from geometry.errors import ChartDomainError, GeometryError, InvalidInputError, LinearSolveError

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e8
EIGENVALUE_FLOOR = 1e-12

MetricFunction = Callable[[jet.Jet2], jet.Jet2]
PointSampler = Callable[[np.random.Generator], np.ndarray]


def _always_valid(point: np.ndarray) -> bool:
    return True


@dataclass(frozen=True)
class MetricChart:
    """A d-dimensional chart and a metric whose entries are jets of the chart point."""

    dim: int
    metric: MetricFunction
    is_valid: Callable[[np.ndarray], bool] = _always_valid
    name: str = "chart"

    def evaluate(self, point: np.ndarray) -> jet.Jet2:
        x = np.asarray(point, dtype=float).ravel()
        if x.size != self.dim:
            raise InvalidInputError(f"{self.name}: point of length {x.size}, chart dim {self.dim}")
        if not self.is_valid(x):
            raise ChartDomainError(f"{self.name}: point {x} outside the chart domain")
        g = self.metric(jet.seed_vector(x))
        if g.shape != (self.dim, self.dim):
            raise InvalidInputError(f"{self.name}: metric has shape {g.shape}")
        asym = float(np.max(np.abs(g.value - g.value.T)))
        if asym > 1e-12 * max(1.0, float(np.max(np.abs(g.value)))):
            raise InvalidInputError(f"{self.name}: metric is not symmetric (defect {asym:.2e})")
        low = float(np.min(np.linalg.eigvalsh(g.value)))
        if low <= EIGENVALUE_FLOOR:
            raise LinearSolveError(f"{self.name}: metric not positive definite at {x}", float("inf"))
        return g


@dataclass
class CurvatureReport:
    point: np.ndarray
    metric: np.ndarray
    christoffel: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float
    condition: float
    ill_conditioned: bool = False
    residuals: dict[str, float] = field(default_factory=dict)

    def ricci_operator_norm(self, einstein_constant: float = 0.0) -> float:
        """Largest |eigenvalue| of ``g⁻¹(Ric − λg)``."""

        target = 0.5 * (self.ricci + self.ricci.T) - einstein_constant * self.metric
        eig = scipy.linalg.eigh(target, self.metric, eigvals_only=True)
        return float(np.max(np.abs(eig)))


def _inverse(g: np.ndarray, name: str = "metric") -> tuple[np.ndarray, float]:
    condition = float(np.linalg.cond(g))
    if not np.isfinite(condition):
        raise LinearSolveError(f"{name} is singular", condition)
    try:
        lu = scipy.linalg.lu_factor(g, check_finite=True)
        ginv = scipy.linalg.lu_solve(lu, np.eye(g.shape[0]))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise LinearSolveError(f"{name} inverse failed", condition) from exc
    if condition > CONDITION_LIMIT:
        logger.warning("%s is ill-conditioned (cond=%.3e)", name, condition)
    return ginv, condition


def metric_parts(g: jet.Jet2) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``g_ij``, ``∂_k g_ij`` (axis order i,j,k) and ``∂_k∂_l g_ij``."""

    return g.value, g.grad, g.hess


def _christoffel_from_parts(ginv: np.ndarray, dg: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # t[l,i,j] = ∂_i g_jl + ∂_j g_il − ∂_l g_ij
    t = np.einsum("jli->lij", dg) + np.einsum("ilj->lij", dg) - np.einsum("ijl->lij", dg)
    gamma = 0.5 * np.einsum("kl,lij->kij", ginv, t)
    return gamma, t


def christoffel(metric: MetricChart, point: np.ndarray) -> np.ndarray:
    """``Γ[k, i, j] = Γ^k_{ij}`` at ``point``."""

    g0, dg, _ = metric_parts(metric.evaluate(point))
    ginv, _ = _inverse(g0, metric.name)
    gamma, _ = _christoffel_from_parts(ginv, dg)
    return gamma


def curvature_from_jet(g: jet.Jet2, point: np.ndarray | None = None, name: str = "metric") -> CurvatureReport:
    """Curvature tensors of a metric already evaluated as a matrix jet."""

    g0, dg, ddg = metric_parts(g)
    ginv, condition = _inverse(g0, name)
    gamma, t = _christoffel_from_parts(ginv, dg)
    dginv = -np.einsum("ka,abm,bl->klm", ginv, dg, ginv)
    dt = np.einsum("jlim->lijm", ddg) + np.einsum("iljm->lijm", ddg) - np.einsum("ijlm->lijm", ddg)
    # dgamma[k,i,j,m] = ∂_m Γ^k_{ij}
    dgamma = 0.5 * np.einsum("klm,lij->kijm", dginv, t) + 0.5 * np.einsum("kl,lijm->kijm", ginv, dt)
    riemann = (
        np.einsum("ljki->lijk", dgamma)
        - np.einsum("likj->lijk", dgamma)
        + np.einsum("lim,mjk->lijk", gamma, gamma)
        - np.einsum("ljm,mik->lijk", gamma, gamma)
    )
    ricci = np.einsum("iijk->jk", riemann)
    scalar = float(np.einsum("jk,jk->", ginv, ricci))
    scale = max(1.0, float(np.max(np.abs(riemann))))
    residuals = {
        "ricci_symmetry": float(np.max(np.abs(ricci - ricci.T))) / scale,
        "riemann_antisymmetry": float(np.max(np.abs(riemann + np.swapaxes(riemann, 1, 2)))) / scale,
        "first_bianchi": float(np.max(np.abs(first_bianchi(riemann)))) / scale,
    }
    return CurvatureReport(
        point=np.zeros(0) if point is None else np.asarray(point, dtype=float),
        metric=g0,
        christoffel=gamma,
        riemann=riemann,
        ricci=ricci,
        scalar=scalar,
        condition=condition,
        ill_conditioned=condition > CONDITION_LIMIT,
        residuals=residuals,
    )


def first_bianchi(riemann: np.ndarray) -> np.ndarray:
    return riemann + np.einsum("ljki->lijk", riemann) + np.einsum("lkij->lijk", riemann)


def curvature_tensors(metric: MetricChart, point: np.ndarray) -> CurvatureReport:
    return curvature_from_jet(metric.evaluate(point), point, metric.name)


@dataclass(frozen=True)
class SweepResult:
    max_residual: float
    mean_residual: float
    count: int
    failures: int
    residuals: tuple[float, ...] = ()


def residual_sweep(
    evaluate: Callable[[np.ndarray], float],
    points: list[np.ndarray],
    label: str = "sweep",
) -> SweepResult:
    """Evaluate a residual at every point, recording failures and continuing."""

    values: list[float] = []
    failures = 0
    for index, point in enumerate(points):
        try:
            values.append(float(evaluate(point)))
        except GeometryError as exc:
            failures += 1
            logger.warning("%s: point %d failed: %s", label, index, exc)
    if not values:
        return SweepResult(float("inf"), float("inf"), len(points), failures)
    arr = np.asarray(values)
    return SweepResult(float(arr.max()), float(arr.mean()), len(points), failures, tuple(values))


def ricci_residual_sweep(
    metric: MetricChart,
    sampler: PointSampler,
    count: int,
    seed: int = 0,
    einstein_constant: float = 0.0,
) -> SweepResult:
    """Max/mean of the g-operator norm of ``Ric − λg`` over ``count`` sampled points."""

    if count < 1:
        raise InvalidInputError("sweep count must be at least 1")
    rng = np.random.default_rng(seed)
    points = [np.asarray(sampler(rng), dtype=float) for _ in range(count)]
    return residual_sweep(
        lambda p: curvature_tensors(metric, p).ricci_operator_norm(einstein_constant),
        points,
        label=f"ricci[{metric.name}]",
    )


# --- reference charts --------------------------------------------------------


def flat_chart(dim: int) -> MetricChart:
    return MetricChart(dim, lambda x: jet.constant(np.eye(dim), dim), name=f"R^{dim}")


def stereographic_sphere_chart(n: int, radius: float = 1.0) -> MetricChart:
    """Round Sⁿ of the given radius: ``4R²/(1+|x|²)² δ``."""

    eye = np.eye(n)

    def metric(x: jet.Jet2) -> jet.Jet2:
        conformal = 4.0 * radius**2 * (1.0 + (x * x).sum()) ** -2
        return jet.constant(eye, n) * conformal

    return MetricChart(n, metric, name=f"S^{n}(stereographic)")


def polar_sphere_chart() -> MetricChart:
    """``dθ² + sin²θ dφ²`` valid for 0 < θ < π."""

    def metric(x: jet.Jet2) -> jet.Jet2:
        s = jet.sin(x[0])
        one = jet.constant(1.0, 2)
        zero = jet.constant(0.0, 2)
        return jet.stack([jet.stack([one, zero]), jet.stack([zero, s * s])])

    return MetricChart(2, metric, is_valid=lambda p: 1e-6 < p[0] < np.pi - 1e-6, name="S^2(polar)")


def product_chart(first: MetricChart, second: MetricChart) -> MetricChart:
    """Riemannian product; the chart point is the concatenation of both points."""

    d1, d2 = first.dim, second.dim
    d = d1 + d2

    def metric(x: jet.Jet2) -> jet.Jet2:
        a = _restrict(first.metric(_subjet(x, 0, d1)), 0, d)
        b = _restrict(second.metric(_subjet(x, d1, d2)), d1, d)
        value = np.zeros((d, d))
        grad = np.zeros((d, d, d))
        hess = np.zeros((d, d, d, d))
        value[:d1, :d1], grad[:d1, :d1], hess[:d1, :d1] = a.value, a.grad, a.hess
        value[d1:, d1:], grad[d1:, d1:], hess[d1:, d1:] = b.value, b.grad, b.hess
        return jet.Jet2(value, grad, hess)

    def valid(p: np.ndarray) -> bool:
        return first.is_valid(p[:d1]) and second.is_valid(p[d1:])

    return MetricChart(d, metric, valid, name=f"{first.name}x{second.name}")


def _subjet(x: jet.Jet2, start: int, size: int) -> jet.Jet2:
    return jet.seed_vector(x.value[start : start + size])


def _restrict(g: jet.Jet2, offset: int, dim: int) -> jet.Jet2:
    """Embed a jet in ``k`` variables into a jet in ``dim`` variables starting at ``offset``."""

    k = g.dim
    grad = np.zeros(g.shape + (dim,))
    hess = np.zeros(g.shape + (dim, dim))
    grad[..., offset : offset + k] = g.grad
    hess[..., offset : offset + k, offset : offset + k] = g.hess
    return jet.Jet2(g.value, grad, hess)


def affine_pullback(metric: MetricChart, matrix: np.ndarray, shift: np.ndarray) -> MetricChart:
    """Pull a chart metric back along ``y ↦ matrix @ y + shift``."""

    a = np.asarray(matrix, dtype=float)
    b = np.asarray(shift, dtype=float)
    inverse = np.linalg.inv(a)

    def pulled(y: jet.Jet2) -> jet.Jet2:
        x = jet.einsum("ij,j->i", a, y) + b
        # re-seed so the inner metric sees plain chart jets, then push through the linear map
        inner = metric.metric(jet.seed_vector(x.value))
        grad = np.einsum("abk,kj->abj", inner.grad, a)
        hess = np.einsum("abkl,ki,lj->abij", inner.hess, a, a)
        g = jet.Jet2(inner.value, grad, hess)
        return jet.einsum("ia,ab->ib", a.T, jet.einsum("ab,bj->aj", g, a))

    return MetricChart(
        metric.dim,
        pulled,
        lambda p: metric.is_valid(a @ np.asarray(p) + b),
        name=f"{metric.name}*affine",
    )
