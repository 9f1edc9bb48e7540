"""
Warped Ricci-flat metrics on the spin bundle of S³ and on Λ²₋ of S⁴ / CP².

Every metric has the shape

    g = c_b (λ + r²)^α g_b + c_f (λ + r²)^β |Da|²,    Da = da − c_conn K(a)

in a product chart (base coordinates, fiber coordinates ``a``), where ``K``
is the connection acting on the fiber. The base contributes an analytic
coframe so that the connection, which involves first derivatives of the
base metric, is still a second-order jet of the chart point.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import scipy.optimize
from scipy.stats import qmc

from geometry import jet
from geometry.curvature import MetricChart, curvature_from_jet
from geometry.errors import ChartDomainError, GeometryError, InvalidInputError
from geometry.exterior import AlternatingTensor
from geometry.isoparametric import IsoparametricFamily

logger = logging.getLogger(__name__)

SPIN_EXPONENTS = (2.0 / 3.0, -1.0 / 3.0)
ASD_EXPONENTS = (0.5, -0.5)
SEARCH_THRESHOLD = 1e-6
PANEL_SIZE = 20
# (c_b, c_conn) starting points, kept away from every analytic normalization
SEARCH_STARTS = tuple((cb, c_conn) for cb in (0.7, 4.0) for c_conn in (0.2, -0.2, 2.0, -2.0))
CHART_LIMIT = 1e3

BASES = {"S3": 3, "S4": 4, "CP2": 4}


@dataclass(frozen=True)
class BundleConstants:
    c_b: float = 1.0
    c_f: float = 1.0
    c_conn: float = 1.0

    def as_dict(self) -> dict[str, float]:
        return {"c_b": self.c_b, "c_f": self.c_f, "c_conn": self.c_conn}


@dataclass(frozen=True)
class WarpedMetricSpec:
    base: str
    exponents: tuple[float, float]
    lam: float = 1.0
    constants: BundleConstants = field(default_factory=BundleConstants)
    box: tuple[float, float] = (0.8, 1.5)

    def __post_init__(self) -> None:
        if self.base not in BASES:
            raise InvalidInputError(f"unknown base {self.base!r}; expected one of {sorted(BASES)}")
        if not any(np.allclose(self.exponents, pair, atol=1e-15) for pair in (SPIN_EXPONENTS, ASD_EXPONENTS)):
            raise InvalidInputError(f"exponent pair {self.exponents} is not a warped G2 pair")
        if not self.lam > 0:
            raise InvalidInputError("λ must be positive")
        c = self.constants
        if min(c.c_b, c.c_f) <= 0:
            raise InvalidInputError(f"normalization constants must be positive: {c}")

    @property
    def base_dim(self) -> int:
        return BASES[self.base]

    @property
    def fiber_dim(self) -> int:
        return 4 if self.base == "S3" else 3

    @property
    def dim(self) -> int:
        return self.base_dim + self.fiber_dim

    @property
    def spec_id(self) -> str:
        bundle = "spin" if self.base == "S3" else "asd"
        alpha, beta = self.exponents
        return f"{bundle}-{self.base}-a{alpha:.4f}-b{beta:.4f}-lam{self.lam:g}"

    def with_constants(self, constants: BundleConstants) -> "WarpedMetricSpec":
        return replace(self, constants=constants)


def spin_bundle_spec(lam: float = 1.0, exponents: tuple[float, float] = SPIN_EXPONENTS) -> WarpedMetricSpec:
    return WarpedMetricSpec("S3", exponents, lam, BundleConstants(2.25, 1.0, 0.5))


def asd_bundle_spec(
    base: str = "S4", lam: float = 1.0, exponents: tuple[float, float] = ASD_EXPONENTS
) -> WarpedMetricSpec:
    if base not in ("S4", "CP2"):
        raise InvalidInputError(f"anti-self-dual bundles are built over S4 or CP2, not {base}")
    return WarpedMetricSpec(base, exponents, lam, BundleConstants(2.0, 1.0, 1.0), box=(0.8, 1.5))


@dataclass(frozen=True)
class BundleChartPoint:
    base: np.ndarray
    fiber: np.ndarray

    def __post_init__(self) -> None:
        coords = np.concatenate([self.base, self.fiber])
        if not np.all(np.isfinite(coords)) or np.max(np.abs(coords)) > CHART_LIMIT:
            raise ChartDomainError(f"bundle chart point {coords} outside the chart")

    @property
    def r(self) -> float:
        return float(np.linalg.norm(self.fiber))

    @property
    def coords(self) -> np.ndarray:
        return np.concatenate([self.base, self.fiber])

    @classmethod
    def split(cls, spec: WarpedMetricSpec, coords: np.ndarray) -> "BundleChartPoint":
        x = np.asarray(coords, dtype=float).ravel()
        if x.size != spec.dim:
            raise InvalidInputError(f"{spec.spec_id}: expected {spec.dim} chart coordinates, got {x.size}")
        return cls(x[: spec.base_dim], x[spec.base_dim :])


# --- quaternions -------------------------------------------------------------


def _hamilton(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return np.array(
        [
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ]
    )


def _quaternion_structure() -> np.ndarray:
    eye = np.eye(4)
    h = np.zeros((4, 4, 4))
    for i in range(4):
        for j in range(4):
            h[i, j] = _hamilton(eye[i], eye[j])
    return h


QUATERNION = _quaternion_structure()
QUATERNION_CONJ = np.diag([1.0, -1.0, -1.0, -1.0])


def quaternion_multiply(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    return np.einsum("a,b,abc->c", p, q, QUATERNION)


def stereographic_quaternion(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    s = float(y @ y)
    return np.concatenate([[1.0 - s], 2.0 * y]) / (1.0 + s)


def quaternion_stereographic(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q[0] <= -1.0 + 1e-12:
        raise ChartDomainError("the south pole is not covered by the stereographic chart")
    return q[1:] / (1.0 + q[0])


# --- base coframes ------------------------------------------------------------


def _stereographic_parts(y: jet.Jet2) -> tuple[jet.Jet2, jet.Jet2]:
    s = jet.einsum("i,i->", y, y)
    numerator = jet.stack([1.0 - s, 2.0 * y[0], 2.0 * y[1], 2.0 * y[2]])
    return numerator, (1.0 + s).reciprocal()


def _s3_coframe(y: jet.Jet2) -> jet.Jet2:
    """Left-invariant coframe ``Im(q̄ dq)`` of the unit S³ in stereographic coordinates.

    Returned with shape ``(3, 3)``, indexed ``[form, coordinate]``.
    """

    numerator, inv_rho = _stereographic_parts(y)
    q = numerator * inv_rho
    rows = []
    for mu in range(3):
        d_numerator = jet.stack([-2.0 * y[mu]] + [2.0 if k == mu else 0.0 for k in range(3)], dim=y.dim)
        rows.append(d_numerator * inv_rho - numerator * (2.0 * y[mu] * inv_rho * inv_rho))
    dq = jet.stack(rows)
    qbar = jet.einsum("ab,b->a", QUATERNION_CONJ, q)
    product = jet.einsum("mab,abc->mc", jet.einsum("a,mb->mab", qbar, dq), QUATERNION)
    return product.transpose(1, 0)[1:]


def _s4_coframe(x: jet.Jet2) -> tuple[jet.Jet2, jet.Jet2]:
    """Conformal coframe ``2/(1+|x|²) dx`` of the unit S⁴ and its derivative."""

    eye = np.eye(4)
    rho = 1.0 + jet.einsum("i,i->", x, x)
    inv_rho = rho.reciprocal()
    e = jet.constant(eye, x.dim) * (2.0 * inv_rho)
    de = x * (-4.0 * inv_rho * inv_rho)
    return e, jet.einsum("am,l->aml", eye, de)


_COMPLEX_J = np.array([[0.0, -1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, -1.0], [0.0, 0.0, 1.0, 0.0]])


def _cp2_coframe(x: jet.Jet2) -> tuple[jet.Jet2, jet.Jet2]:
    """Unitary coframe ``ρ^{-1/2}(I − c z z*) dz`` of Fubini–Study on the affine chart C².

    ``c = 1/(√ρ(1+√ρ))`` with ``ρ = 1 + |z|²`` makes the frame orthonormal.
    """

    eye = np.eye(4)
    s = jet.einsum("i,i->", x, x)
    rho = 1.0 + s
    root = jet.sqrt(rho)
    alpha = jet.power(rho, -0.5)
    d_alpha = -0.5 * jet.power(rho, -1.5)
    denom = rho + rho * root
    beta = -denom.reciprocal()
    d_beta = (1.0 + 1.5 * root) * jet.power(denom, -2)
    u = jet.einsum("ij,j->i", _COMPLEX_J, x)
    v_outer = jet.einsum("a,m->am", x, x) + jet.einsum("a,m->am", u, u)
    e = jet.constant(eye, x.dim) * alpha + v_outer * beta
    d_outer = (
        jet.einsum("al,m->aml", eye, x)
        + jet.einsum("a,ml->aml", x, eye)
        + jet.einsum("al,m->aml", _COMPLEX_J, u)
        + jet.einsum("a,ml->aml", u, _COMPLEX_J)
    )
    de = (
        jet.einsum("am,l->aml", eye, x * (2.0 * d_alpha))
        + jet.einsum("am,l->aml", v_outer, x * (2.0 * d_beta))
        + d_outer * beta
    )
    return e, de


BASE_COFRAMES: dict[str, Callable[[jet.Jet2], tuple[jet.Jet2, jet.Jet2]]] = {
    "S4": _s4_coframe,
    "CP2": _cp2_coframe,
}


def _frame_connection(e: jet.Jet2, de: jet.Jet2) -> jet.Jet2:
    """Levi-Civita connection of an orthonormal coframe, ``Γ[a,b,c] = ⟨∇_{e_a} e_b, e_c⟩``.

    ``de[a, μ, λ] = ∂_λ E_{aμ}``; brackets follow from ``de^a(e_b, e_c) = −e^a([e_b, e_c])``.
    """

    frame = jet.inv(e)
    d = jet.einsum("amb,mc->abc", jet.einsum("aml,lb->amb", de, frame), frame)
    f = d.transpose(0, 2, 1) - d
    return (f.transpose(1, 2, 0) - f + f.transpose(2, 0, 1)) * 0.5


# anti-self-dual basis e^{01} − e^{23}, e^{02} − e^{31}, e^{03} − e^{12} as skew matrices
ASD_BASIS = np.zeros((3, 4, 4))
for _k, ((_a, _b), (_c, _d)) in enumerate((((0, 1), (2, 3)), ((0, 2), (3, 1)), ((0, 3), (1, 2)))):
    ASD_BASIS[_k, _a, _b], ASD_BASIS[_k, _b, _a] = 1.0, -1.0
    ASD_BASIS[_k, _c, _d], ASD_BASIS[_k, _d, _c] = -1.0, 1.0


def asd_frame_forms() -> list[AlternatingTensor]:
    """The three fiber frame forms as 2-forms on the base coframe."""

    forms = []
    for w in ASD_BASIS:
        coeffs = {(i, j): float(w[i, j]) for i in range(4) for j in range(i + 1, 4) if w[i, j] != 0.0}
        forms.append(AlternatingTensor(2, 4, coeffs))
    return forms


def _asd_connection(e: jet.Jet2, de: jet.Jet2) -> jet.Jet2:
    """``A[λ, i, j]`` with ``∇_{∂_λ} ω_i = Σ_j A[λ, i, j] ω_j``."""

    gamma = _frame_connection(e, de)
    # connection matrix on the coframe along ∂_λ, indexed [λ, c, b]
    coord = jet.einsum("al,abc->lcb", e, gamma)
    left = jet.einsum("limp,jmp->lij", jet.einsum("lmn,inp->limp", coord, ASD_BASIS), ASD_BASIS)
    right = jet.einsum("limp,jmp->lij", jet.einsum("imn,lnp->limp", ASD_BASIS, coord), ASD_BASIS)
    return (left - right) * 0.25


# --- metric assembly ------------------------------------------------------------


@dataclass(frozen=True)
class MetricPieces:
    """Jets with ``g = c_b·base + c_f·(fiber + c_conn·cross + c_conn²·twist)``."""

    base: jet.Jet2
    fiber: jet.Jet2
    cross: jet.Jet2
    twist: jet.Jet2

    def assemble(self, constants: BundleConstants) -> jet.Jet2:
        c = constants.c_conn
        return self.base * constants.c_b + (self.fiber + self.cross * c + self.twist * (c * c)) * constants.c_f


def _base_block(spec: WarpedMetricSpec, x: jet.Jet2) -> tuple[jet.Jet2, jet.Jet2]:
    """Base metric and the fiber connection ``K[α, μ]`` (before the ``−c_conn`` factor)."""

    nb = spec.base_dim
    base = x[:nb]
    a = x[nb:]
    if spec.base == "S3":
        omega = _s3_coframe(base)
        g_b = jet.einsum("im,in->mn", omega, omega)
        left = jet.einsum("iba,b->ia", QUATERNION[1:], a)
        return g_b, jet.einsum("im,ia->am", omega, left)
    e, de = BASE_COFRAMES[spec.base](base)
    g_b = jet.einsum("am,an->mn", e, e)
    conn = _asd_connection(e, de)
    return g_b, -jet.einsum("i,lij->jl", a, conn)


def metric_pieces(spec: WarpedMetricSpec, x: jet.Jet2) -> MetricPieces:
    nb, nf, n = spec.base_dim, spec.fiber_dim, spec.dim
    a = x[nb:]
    r2 = jet.einsum("i,i->", a, a)
    alpha, beta = spec.exponents
    warp_b = jet.power(r2 + spec.lam, alpha)
    warp_f = jet.power(r2 + spec.lam, beta)
    g_b, k = _base_block(spec, x)
    # Da = da − c_conn K dx, so |Da|² has cross terms −c_conn K and c_conn² KᵀK
    kk = jet.einsum("am,an->mn", k, k)
    cross = jet.embed(-k * warp_f, (nb, 0), (n, n)) + jet.embed(-k.T * warp_f, (0, nb), (n, n))
    return MetricPieces(
        base=jet.embed(g_b * warp_b, (0, 0), (n, n)),
        fiber=jet.embed(jet.constant(np.eye(nf), x.dim) * warp_f, (nb, nb), (n, n)),
        cross=cross,
        twist=jet.embed(kk * warp_f, (0, 0), (n, n)),
    )


def bundle_metric(spec: WarpedMetricSpec, point: BundleChartPoint | np.ndarray) -> jet.Jet2:
    coords = point.coords if isinstance(point, BundleChartPoint) else BundleChartPoint.split(spec, point).coords
    return metric_pieces(spec, jet.seed_vector(coords)).assemble(spec.constants)


def spin_bundle_metric(spec: WarpedMetricSpec, point: BundleChartPoint | np.ndarray) -> jet.Jet2:
    if spec.base != "S3":
        raise InvalidInputError("spin_bundle_metric needs an S3 base")
    return bundle_metric(spec, point)


def asd_bundle_metric(spec: WarpedMetricSpec, point: BundleChartPoint | np.ndarray) -> jet.Jet2:
    if spec.base not in ("S4", "CP2"):
        raise InvalidInputError("asd_bundle_metric needs an S4 or CP2 base")
    return bundle_metric(spec, point)


def bundle_chart(spec: WarpedMetricSpec) -> MetricChart:
    def valid(p: np.ndarray) -> bool:
        return bool(np.all(np.isfinite(p)) and np.max(np.abs(p)) <= CHART_LIMIT)

    return MetricChart(
        spec.dim,
        lambda x: metric_pieces(spec, x).assemble(spec.constants),
        valid,
        name=spec.spec_id,
    )


def base_metric(spec: WarpedMetricSpec, base_point: np.ndarray) -> np.ndarray:
    x = jet.seed_vector(np.concatenate([np.asarray(base_point, dtype=float), np.zeros(spec.fiber_dim)]))
    return _base_block(spec, x)[0].value


# --- panels and search ------------------------------------------------------------


def chart_panel(spec: WarpedMetricSpec, count: int = PANEL_SIZE, seed: int = 0) -> np.ndarray:
    """Low-discrepancy chart points over the box ``[-b, b]^{base} × [-f, f]^{fiber}``."""

    sampler = qmc.Halton(d=spec.dim, scramble=True, seed=seed)
    unit = sampler.random(count)
    half = np.concatenate([np.full(spec.base_dim, spec.box[0]), np.full(spec.fiber_dim, spec.box[1])])
    return qmc.scale(unit, -half, half)


def random_chart_points(spec: WarpedMetricSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    half = np.concatenate([np.full(spec.base_dim, spec.box[0]), np.full(spec.fiber_dim, spec.box[1])])
    return rng.uniform(-half, half, size=(count, spec.dim))


@dataclass(frozen=True)
class SearchResult:
    spec_id: str
    constants: BundleConstants
    residual: float
    success: bool
    panel_seed: int
    evaluations: int
    restarts: int
    panel_size: int = PANEL_SIZE

    def as_record(self) -> dict[str, object]:
        return {
            "spec_id": self.spec_id,
            "constants": self.constants.as_dict(),
            "residual": self.residual,
            "panel_seed": self.panel_seed,
            "panel_size": self.panel_size,
            "success": self.success,
        }


def panel_residual(spec: WarpedMetricSpec, constants: BundleConstants, panel: np.ndarray) -> float:
    """Max Ricci operator norm over the panel for the given constants."""

    worst = 0.0
    for point in panel:
        g = metric_pieces(spec, jet.seed_vector(point)).assemble(constants)
        worst = max(worst, curvature_from_jet(g, point, spec.spec_id).ricci_operator_norm())
    return worst


def normalization_search(
    spec: WarpedMetricSpec,
    panel_seed: int = 0,
    panel_size: int = PANEL_SIZE,
    restarts: int = 3,
    threshold: float = SEARCH_THRESHOLD,
) -> SearchResult:
    """Fit ``(c_b, c_conn)`` with ``c_f`` pinned by Nelder–Mead with restarts.

    The simplex minimizes the mean squared Frobenius norm of ``g⁻¹Ric`` over
    the panel; the reported residual is the max operator norm.
    Every search starts from :data:`SEARCH_STARTS`, whatever constants the
    spec carries.
    """

    panel = chart_panel(spec, panel_size, panel_seed)
    pieces = [metric_pieces(spec, jet.seed_vector(p)) for p in panel]
    c_f = spec.constants.c_f
    evaluations = 0

    def objective(params: np.ndarray) -> float:
        nonlocal evaluations
        evaluations += 1
        log_cb, c_conn = params
        constants = BundleConstants(math.exp(log_cb), c_f, c_conn)
        total = 0.0
        for piece, point in zip(pieces, panel):
            try:
                report = curvature_from_jet(piece.assemble(constants), point, spec.spec_id)
            except GeometryError:
                return 1e12
            operator = np.linalg.solve(report.metric, report.ricci)
            total += float(np.sum(operator * operator))
        return total / len(pieces)

    starts = [np.array([math.log(cb), c_conn]) for cb, c_conn in SEARCH_STARTS]
    starts.sort(key=objective)
    best = starts[0]
    best_value = objective(best)
    used = 0
    for start in starts[: max(1, restarts)]:
        x0, step = start, 0.5
        for _ in range(restarts):
            used += 1
            result = scipy.optimize.minimize(
                objective,
                x0,
                method="Nelder-Mead",
                options={
                    "xatol": 1e-10,
                    "fatol": 1e-20,
                    "maxiter": 1500,
                    "initial_simplex": np.array([x0, x0 + [step, 0.0], x0 + [0.0, step]]),
                },
            )
            if result.fun < best_value:
                best, best_value = result.x, float(result.fun)
            if np.allclose(result.x, x0, atol=1e-10, rtol=0.0):
                break
            x0, step = result.x, 0.05
        if best_value < threshold**2 * 1e-4:
            break
    constants = BundleConstants(math.exp(best[0]), c_f, float(best[1]))
    residual = panel_residual(spec, constants, panel)
    success = residual < threshold
    if success:
        logger.info("%s: fitted %s residual=%.3e", spec.spec_id, constants, residual)
    else:
        logger.warning("%s: search plateaued at residual=%.3e with %s", spec.spec_id, residual, constants)
    return SearchResult(spec.spec_id, constants, residual, success, panel_seed, evaluations, used, panel_size)


# --- N_r and the stratification of S⁷ -------------------------------------------------


def r_to_t(r: float) -> float:
    if r < 0:
        raise InvalidInputError("fiber radius must be non-negative")
    if math.isinf(r):
        return 1.0
    return (r - 1.0) / (r + 1.0)


def t_to_r(t: float) -> float:
    """Inverse of :func:`r_to_t`; ``t = 1`` maps to ``inf`` (the deleted focal sphere)."""

    if not -1.0 <= t <= 1.0:
        raise InvalidInputError(f"level t={t} outside [-1, 1]")
    if t == 1.0:
        return math.inf
    return (1.0 + t) / (1.0 - t)


def spin_homeomorphism(q: np.ndarray, a: np.ndarray) -> np.ndarray:
    """``(q, a) ↦ (√((1−t)/2) q, √((1+t)/2) a/|a|)`` with ``t = r_to_t(|a|)``."""

    q = np.asarray(q, dtype=float)
    a = np.asarray(a, dtype=float)
    if abs(float(np.linalg.norm(q)) - 1.0) > 1e-12:
        raise InvalidInputError("base point must be a unit quaternion")
    r = float(np.linalg.norm(a))
    if r == 0.0:
        return np.concatenate([q, np.zeros(4)])
    t = r_to_t(r)
    return np.concatenate([math.sqrt((1.0 - t) / 2.0) * q, math.sqrt((1.0 + t) / 2.0) * a / r])


def spin_homeomorphism_inverse(w: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Recover ``(q, a/|a|, r)`` from a point of ``S⁷`` off both focal spheres."""

    w = np.asarray(w, dtype=float)
    first, second = w[:4], w[4:]
    n1, n2 = float(np.linalg.norm(first)), float(np.linalg.norm(second))
    if n1 == 0.0 or n2 == 0.0:
        raise ChartDomainError("point lies on a focal sphere")
    t = n2 * n2 - n1 * n1
    return first / n1, second / n2, t_to_r(t)


@dataclass(frozen=True)
class StratificationResidual:
    plus: float
    minus: float

    @property
    def best(self) -> float:
        return min(self.plus, self.minus)

    @property
    def sign(self) -> int:
        return 1 if self.plus <= self.minus else -1


def stratification_residual(image: np.ndarray, t: float, fam: IsoparametricFamily) -> StratificationResidual:
    """Compare the Cartan–Münzner value of ``image`` with ``+t`` and ``−t``."""

    value = fam.value(np.asarray(image, dtype=float))
    return StratificationResidual(abs(value - t), abs(value + t))


def left_translation_defect(spec: WarpedMetricSpec, point: np.ndarray, p: np.ndarray) -> float:
    """``max |Φ*g − g|`` for ``Φ(q, a) = (p·q, a)`` at a spin-bundle chart point."""

    if spec.base != "S3":
        raise InvalidInputError("left translations act on the S3 base only")
    chart_point = BundleChartPoint.split(spec, point)
    y = jet.seed_vector(chart_point.base)
    numerator, inv_rho = _stereographic_parts(y)
    left = jet.einsum("a,abc->bc", np.asarray(p, dtype=float), QUATERNION)
    moved = jet.einsum("bc,b->c", left, numerator * inv_rho)
    image = moved[1:] * (1.0 + moved[0]).reciprocal()
    jacobian = np.eye(spec.dim)
    jacobian[:3, :3] = image.grad
    here = bundle_metric(spec, chart_point).value
    there = bundle_metric(spec, BundleChartPoint(image.value, chart_point.fiber)).value
    return float(np.max(np.abs(jacobian.T @ there @ jacobian - here)))
