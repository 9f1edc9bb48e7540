"""
Cartan–Münzner polynomials and the geometry of their level sets.

A family is a homogeneous polynomial ``F`` on ``R^{n+1}`` whose restriction
``f`` to the unit sphere has range ``[-1, 1]``. Regular levels ``W_t`` are
isoparametric hypersurfaces and the extreme levels ``W_±`` are the focal
submanifolds. Polynomials are written once and evaluated either on float
vectors or on seeded jets, so gradients and Hessians come for free.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
import scipy.linalg
import scipy.optimize
from cachetools import LRUCache, cached
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from geometry import jet
from geometry.errors import (
    FocalSearchError,
    InvalidFamilyError,
    InvalidInputError,
    NearFocalError,
    ProjectionError,
    UnreliableFitError,
    UnsupportedError,
)

logger = logging.getLogger(__name__)

CLUSTER_TOLERANCE = 1e-6
NEWTON_MAX_ITER = 100
LEVEL_TOLERANCE = 1e-12
REGULAR_FLOOR = 1e-8
FIT_CONDITION_LIMIT = 1e6
FOCAL_TOLERANCE = 1e-10

Polynomial = Callable[[Any], Any]


@dataclass(frozen=True)
class IsoparametricFamily:
    ambient_dim: int
    degree: int
    polynomial: Polynomial = field(repr=False)
    multiplicities: tuple[int, int]
    provenance: str
    params: dict[str, int] = field(default_factory=dict)

    @property
    def sphere_dim(self) -> int:
        return self.ambient_dim - 1

    def __call__(self, x: Any) -> Any:
        return self.polynomial(x)

    def value(self, x: np.ndarray) -> float:
        return float(self.polynomial(np.asarray(x, dtype=float)))

    def jet(self, x: np.ndarray) -> jet.Jet2:
        point = np.asarray(x, dtype=float).ravel()
        if point.size != self.ambient_dim:
            raise InvalidInputError(f"{self.provenance}: point of length {point.size}, expected {self.ambient_dim}")
        result = self.polynomial(jet.seed_vector(point))
        if not isinstance(result, jet.Jet2):
            return jet.constant(result, self.ambient_dim)
        return result


@dataclass(frozen=True)
class SpectrumSummary:
    clusters: tuple[tuple[float, int], ...]
    tolerance: float
    eigenvalues: tuple[float, ...] = ()
    separated: bool = True

    @property
    def dimension(self) -> int:
        return sum(m for _, m in self.clusters)

    @property
    def values(self) -> list[float]:
        return [v for v, _ in self.clusters]

    @property
    def multiplicities(self) -> list[int]:
        return [m for _, m in self.clusters]

    @property
    def trace(self) -> float:
        return float(sum(v * m for v, m in self.clusters))


def cluster_eigenvalues(eigenvalues: Sequence[float], tolerance: float = CLUSTER_TOLERANCE) -> SpectrumSummary:
    """Group sorted eigenvalues whose consecutive gaps are within ``tolerance``."""

    values = np.sort(np.asarray(eigenvalues, dtype=float))
    groups: list[list[float]] = []
    for v in values:
        if groups and v - groups[-1][-1] <= tolerance:
            groups[-1].append(float(v))
        else:
            groups.append([float(v)])
    clusters = tuple((float(np.mean(g)), len(g)) for g in groups)
    centers = [c for c, _ in clusters]
    separated = all(b - a > 10 * tolerance for a, b in zip(centers, centers[1:]))
    if not separated:
        logger.warning("eigenvalue clusters closer than 10x tolerance: %s", centers)
    return SpectrumSummary(clusters, tolerance, tuple(float(v) for v in values), separated)


# --- Clifford systems ------------------------------------------------------

# dimension of an irreducible module for the Clifford system P_0, ..., P_m is 2·δ(m)
CLIFFORD_DELTA: dict[int, int] = {1: 1, 2: 2, 3: 4, 4: 4, 5: 8, 6: 8, 7: 8, 8: 8}


@dataclass(frozen=True)
class CliffordSystem:
    size: int
    matrices: tuple[np.ndarray, ...] = field(repr=False)
    multiplier: int = 1

    def __post_init__(self) -> None:
        for p in self.matrices:
            if p.shape != (self.size, self.size):
                raise InvalidInputError(f"Clifford matrix of shape {p.shape}, expected {self.size}")
            p.setflags(write=False)

    @property
    def m(self) -> int:
        return len(self.matrices) - 1

    def anticommutator_defect(self) -> float:
        eye = np.eye(self.size)
        worst = 0.0
        for i, p in enumerate(self.matrices):
            for j, q in enumerate(self.matrices[i:], start=i):
                target = 2.0 * eye if i == j else 0.0
                worst = max(worst, float(np.max(np.abs(p @ q + q @ p - target))))
        return worst


def _cayley_dickson(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = a.size
    if n == 1:
        return a * b
    h = n // 2
    a1, a2, b1, b2 = a[:h], a[h:], b[:h], b[h:]
    return np.concatenate(
        [
            _cayley_dickson(a1, b1) - _cayley_dickson(_conjugate(b2), a2),
            _cayley_dickson(b2, a1) + _cayley_dickson(a2, _conjugate(b1)),
        ]
    )


def _conjugate(a: np.ndarray) -> np.ndarray:
    c = -a.copy()
    c[0] = a[0]
    return c


def _left_multiplications(count: int, size: int) -> list[np.ndarray]:
    """Left multiplication by the first ``count`` imaginary units of the size-``size`` algebra."""

    eye = np.eye(size)
    return [
        np.column_stack([_cayley_dickson(eye[i], eye[j]) for j in range(size)])
        for i in range(1, count + 1)
    ]


@cached(LRUCache(maxsize=32))
def clifford_system(m: int, multiplier: int = 1) -> CliffordSystem:
    """Symmetric ``P_0, ..., P_m`` on ``R^{2ℓδ(m)}`` with ``P_iP_j + P_jP_i = 2δ_ij``."""

    if multiplier < 1:
        raise InvalidInputError("Clifford multiplier must be at least 1")
    if m not in CLIFFORD_DELTA:
        raise UnsupportedError(f"Clifford systems with m={m} are not supported (1 <= m <= 8)")
    delta = CLIFFORD_DELTA[m]
    l = delta * multiplier
    units = [np.kron(np.eye(multiplier), e) for e in _left_multiplications(m - 1, delta)]
    eye, zero = np.eye(l), np.zeros((l, l))
    mats = [np.block([[eye, zero], [zero, -eye]]), np.block([[zero, eye], [eye, zero]])]
    mats += [np.block([[zero, e], [-e, zero]]) for e in units]
    system = CliffordSystem(2 * l, tuple(mats), multiplier)
    logger.debug("built Clifford system m=%d size=%d defect=%.1e", m, system.size, system.anticommutator_defect())
    return system


# --- families ---------------------------------------------------------------


def _norm2(x: Any) -> Any:
    return jet.einsum("i,i->", x, x)


def family_g1(n: int = 7) -> IsoparametricFamily:
    """``F = x_{n+1}``: levels are parallel small spheres, focal set the two poles."""

    if n < 2:
        raise InvalidInputError("family_g1 needs n >= 2")
    return IsoparametricFamily(n + 1, 1, lambda x: x[n], (n - 1, n - 1), "explicit-a", {"n": n})


def family_g2(k: int, n: int = 7) -> IsoparametricFamily:
    """Generalized Clifford torus ``S^k × S^{n-1-k}`` family in ``S^n``."""

    if n < 3 or not 1 <= k <= n - 2:
        raise InvalidInputError(f"family_g2 needs 1 <= k <= n-2, got k={k}, n={n}")
    split = k + 1
    signs = np.concatenate([np.ones(split), -np.ones(n + 1 - split)])

    def polynomial(x: Any) -> Any:
        return jet.einsum("i,i->", x * signs, x)

    return IsoparametricFamily(n + 1, 2, polynomial, (n - 1 - k, k), f"explicit-b({k})", {"k": k, "n": n})


_R3 = 3.0 * math.sqrt(3.0) / 2.0


def _cartan_polynomial(x: Any) -> Any:
    # coordinates (u, v, Re x, Im x, Re y, Im y, Re z, Im z)
    u, v = x[0], x[1]
    xr, xi, yr, yi, zr, zi = x[2], x[3], x[4], x[5], x[6], x[7]
    ax, ay, az = xr * xr + xi * xi, yr * yr + yi * yi, zr * zr + zi * zi
    # xyz + conj = 2 Re(xyz)
    re_xy = xr * yr - xi * yi
    im_xy = xr * yi + xi * yr
    re_xyz = re_xy * zr - im_xy * zi
    return (
        u * u * u
        - 3.0 * u * v * v
        + 1.5 * u * (ax + ay - 2.0 * az)
        + _R3 * v * (ax - ay)
        + _R3 * 2.0 * re_xyz
    )


def family_g3() -> IsoparametricFamily:
    """Cartan's degree-3 polynomial on ``R² × C³``; levels are ``SU(3)/T²``."""

    return IsoparametricFamily(8, 3, _cartan_polynomial, (2, 2), "explicit-c")


def _gell_mann() -> np.ndarray:
    t = np.zeros((8, 3, 3), dtype=complex)
    t[0][0, 1] = t[0][1, 0] = 1
    t[1][0, 1], t[1][1, 0] = -1j, 1j
    t[2][0, 0], t[2][1, 1] = 1, -1
    t[3][0, 2] = t[3][2, 0] = 1
    t[4][0, 2], t[4][2, 0] = -1j, 1j
    t[5][1, 2] = t[5][2, 1] = 1
    t[6][1, 2], t[6][2, 1] = -1j, 1j
    t[7] = np.diag([1, 1, -2]) / math.sqrt(3.0)
    # orthonormal for <A, B> = tr(AB)
    return t / math.sqrt(2.0)


HERMITIAN_BASIS = _gell_mann()
_ADJOINT_SCALE = 3.0 * math.sqrt(6.0)


def hermitian_matrix(x: np.ndarray) -> np.ndarray:
    return np.einsum("a,aij->ij", np.asarray(x, dtype=float), HERMITIAN_BASIS)


def hermitian_coordinates(a: np.ndarray) -> np.ndarray:
    return np.real(np.einsum("ij,aji->a", a, HERMITIAN_BASIS))


def _adjoint_polynomial(x: Any) -> Any:
    if not isinstance(x, jet.Jet2):
        return _ADJOINT_SCALE * float(np.real(np.linalg.det(hermitian_matrix(x))))
    a = jet.ComplexJet2(
        jet.einsum("a,aij->ij", x, HERMITIAN_BASIS.real),
        jet.einsum("a,aij->ij", x, HERMITIAN_BASIS.imag),
    )
    det = (
        a[0, 0] * a[1, 1] * a[2, 2]
        + a[0, 1] * a[1, 2] * a[2, 0]
        + a[0, 2] * a[1, 0] * a[2, 1]
        - a[0, 2] * a[1, 1] * a[2, 0]
        - a[0, 1] * a[1, 0] * a[2, 2]
        - a[0, 0] * a[1, 2] * a[2, 1]
    )
    return det.re * _ADJOINT_SCALE


def family_g3_adjoint() -> IsoparametricFamily:
    """``3√6·det`` on traceless Hermitian 3×3 matrices; focal levels are the CP² orbits."""

    return IsoparametricFamily(8, 3, _adjoint_polynomial, (2, 2), "adjoint")


def family_fkm(cs: CliffordSystem) -> IsoparametricFamily:
    """``|x|⁴ − 2Σ⟨P_i x, x⟩²`` for a Clifford system on ``R^{2l}``."""

    m1 = cs.m
    m2 = cs.size // 2 - cs.m - 1
    if m2 <= 0:
        raise InvalidFamilyError(f"FKM family with m={cs.m}, size={cs.size} has multiplicity m2={m2}")
    mats = cs.matrices

    def polynomial(x: Any) -> Any:
        r2 = _norm2(x)
        total = r2 * r2
        for p in mats:
            q = jet.einsum("i,i->", x, jet.einsum("ij,j->i", p, x))
            total = total - 2.0 * q * q
        return total

    return IsoparametricFamily(
        cs.size, 4, polynomial, (m1, m2), f"fkm({cs.m},{cs.multiplier})", {"m": cs.m, "ell": cs.multiplier}
    )


FAMILY_BUILDERS: dict[str, Callable[..., IsoparametricFamily]] = {
    "g1": family_g1,
    "g2": family_g2,
    "g3": family_g3,
    "g3-adjoint": family_g3_adjoint,
    "fkm": lambda m, ell=1: family_fkm(clifford_system(m, ell)),
}


@cached(LRUCache(maxsize=64))
def build_family(kind: str, **params: int) -> IsoparametricFamily:
    try:
        builder = FAMILY_BUILDERS[kind]
    except KeyError as exc:
        raise InvalidInputError(f"unknown family kind {kind!r}") from exc
    return builder(**params)


def family_to_manifest(fam: IsoparametricFamily) -> str:
    kind = {"explicit-a": "g1", "explicit-c": "g3", "adjoint": "g3-adjoint"}.get(fam.provenance)
    if kind is None:
        kind = "g2" if fam.provenance.startswith("explicit-b") else "fkm"
    lines = [f"kind = {kind}"]
    lines += [f"{key} = {value}" for key, value in sorted(fam.params.items())]
    lines.append(f"multiplicities = {fam.multiplicities[0]},{fam.multiplicities[1]}")
    return "\n".join(lines) + "\n"


def parse_manifest(text: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""

    entries: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInputError(f"malformed manifest line {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        entries[key] = value
    return entries


def family_from_manifest(text: str) -> IsoparametricFamily:
    """Rebuild a family from a manifest written by :func:`family_to_manifest`."""

    entries = parse_manifest(text)
    kind = entries.pop("kind", None)
    if kind is None:
        raise InvalidInputError("family manifest has no kind")
    declared = entries.pop("multiplicities", None)
    try:
        fam = build_family(kind, **{k: int(v) for k, v in entries.items()})
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"bad parameters for family {kind!r}: {exc}") from exc
    if declared is not None:
        expected = tuple(int(v) for v in declared.split(","))
        if expected != fam.multiplicities:
            raise InvalidFamilyError(f"manifest multiplicities {expected} != computed {fam.multiplicities}")
    return fam


# --- PDE checks ---------------------------------------------------------------


def munzner_pde_residuals(fam: IsoparametricFamily, points: Sequence[np.ndarray]) -> tuple[float, float]:
    """Max residuals of ``|∇F|² = g²|x|^{2g-2}`` and ``ΔF = ½g²(m₂−m₁)|x|^{g-2}``."""

    g = fam.degree
    m1, m2 = fam.multiplicities
    r1 = r2 = 0.0
    for point in points:
        x = np.asarray(point, dtype=float)
        r = float(np.linalg.norm(x))
        if r == 0.0:
            raise InvalidInputError("Münzner residuals need nonzero points")
        j = fam.jet(x)
        grad2 = float(j.grad @ j.grad)
        lap = float(np.trace(j.hess))
        r1 = max(r1, abs(grad2 - g * g * r ** (2 * g - 2)))
        r2 = max(r2, abs(lap - 0.5 * g * g * (m2 - m1) * r ** (g - 2)))
    return r1, r2


def homogeneity_defect(fam: IsoparametricFamily, x: np.ndarray, s: float) -> float:
    x = np.asarray(x, dtype=float)
    return abs(fam.value(s * x) - s**fam.degree * fam.value(x))


# --- level sets -----------------------------------------------------------------


def random_sphere_point(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def spherical_gradient(fam: IsoparametricFamily, x: np.ndarray) -> np.ndarray:
    j = fam.jet(x)
    return j.grad - fam.degree * float(j.value) * np.asarray(x, dtype=float)


def level_project(fam: IsoparametricFamily, t: float, seed: np.ndarray) -> np.ndarray:
    """Damped Newton onto ``|x| = 1, f(x) = t`` starting from ``seed``."""

    if not -1.0 < t < 1.0:
        raise InvalidInputError(f"level t={t} must lie in (-1, 1)")
    x = np.asarray(seed, dtype=float)
    x = x / np.linalg.norm(x)
    residual = fam.value(x) - t
    for _ in range(NEWTON_MAX_ITER):
        if abs(residual) < LEVEL_TOLERANCE:
            return x
        grad = spherical_gradient(fam, x)
        norm2 = float(grad @ grad)
        if norm2 < REGULAR_FLOOR**2:
            break
        step = -residual * grad / norm2
        alpha = 1.0
        while alpha > 1e-6:
            trial = x + alpha * step
            trial = trial / np.linalg.norm(trial)
            trial_residual = fam.value(trial) - t
            if abs(trial_residual) < abs(residual):
                x, residual = trial, trial_residual
                break
            alpha *= 0.5
        else:
            break
    if abs(residual) < LEVEL_TOLERANCE:
        return x
    raise ProjectionError(f"{fam.provenance}: projection onto level {t} did not converge", abs(residual))


def _tangent_basis(*vectors: np.ndarray) -> np.ndarray:
    return scipy.linalg.null_space(np.vstack(vectors))


def hypersurface_spectrum(fam: IsoparametricFamily, x: np.ndarray, tolerance: float = CLUSTER_TOLERANCE) -> SpectrumSummary:
    """Principal curvatures of the level through ``x`` with respect to ``ν = ∇^S f/|∇^S f|``."""

    x = np.asarray(x, dtype=float)
    j = fam.jet(x)
    f = float(j.value)
    grad = j.grad - fam.degree * f * x
    norm = float(np.linalg.norm(grad))
    if norm < REGULAR_FLOOR:
        raise NearFocalError(f"{fam.provenance}: |∇f| = {norm:.2e} at a near-focal point")
    nu = grad / norm
    basis = _tangent_basis(x, nu)
    shape = -(basis.T @ (j.hess - fam.degree * f * np.eye(x.size)) @ basis) / norm
    return cluster_eigenvalues(np.linalg.eigvalsh(0.5 * (shape + shape.T)), tolerance)


def mean_curvature(fam: IsoparametricFamily, x: np.ndarray) -> float:
    return float(sum(hypersurface_spectrum(fam, x).eigenvalues))


def project_with_retries(
    fam: IsoparametricFamily, t: float, rng: np.random.Generator, attempts: int = 3
) -> np.ndarray:
    """Project a fresh random seed per attempt until one converges."""

    for attempt in Retrying(
        stop=stop_after_attempt(attempts),
        retry=retry_if_exception_type(ProjectionError),
        reraise=True,
    ):
        with attempt:
            return level_project(fam, t, random_sphere_point(fam.ambient_dim, rng))
    raise ProjectionError("no projection attempts were made", float("nan"))


@dataclass(frozen=True)
class ConstancyReport:
    spread: float
    count: int
    failures: int
    reference: tuple[float, ...] = ()


def constancy_sweep(fam: IsoparametricFamily, t: float, count: int, seed: int = 0) -> ConstancyReport:
    """Max pairwise deviation of sorted principal curvatures over ``count`` points of ``W_t``."""

    rng = np.random.default_rng(seed)
    spectra: list[np.ndarray] = []
    failures = 0
    for index in range(count):
        try:
            x = project_with_retries(fam, t, rng)
            spectra.append(np.asarray(hypersurface_spectrum(fam, x).eigenvalues))
        except (ProjectionError, NearFocalError) as exc:
            failures += 1
            logger.warning("constancy sweep %s t=%s: point %d failed: %s", fam.provenance, t, index, exc)
    if not spectra:
        return ConstancyReport(float("inf"), count, failures)
    stacked = np.vstack(spectra)
    spread = float(np.max(stacked.max(axis=0) - stacked.min(axis=0)))
    return ConstancyReport(spread, count, failures, tuple(stacked[0]))


# --- focal submanifolds ------------------------------------------------------------


@dataclass(frozen=True)
class FocalPoint:
    point: np.ndarray
    angle: float
    branch: int
    value: float


def focal_point(fam: IsoparametricFamily, x: np.ndarray, branch: int = 1) -> FocalPoint:
    """Follow the normal great circle from ``x`` until ``f`` reaches ``branch·1``."""

    if branch not in (1, -1):
        raise InvalidInputError("branch must be +1 or -1")
    x = np.asarray(x, dtype=float)
    grad = spherical_gradient(fam, x)
    norm = float(np.linalg.norm(grad))
    if norm < REGULAR_FLOOR:
        raise NearFocalError(f"{fam.provenance}: starting point is near-focal")
    nu = branch * grad / norm

    def curve(theta: float) -> np.ndarray:
        return math.cos(theta) * x + math.sin(theta) * nu

    def slope(theta: float) -> float:
        velocity = -math.sin(theta) * x + math.cos(theta) * nu
        return branch * float(fam.jet(curve(theta)).grad @ velocity)

    grid = np.linspace(0.0, 2.0 * math.pi / fam.degree, 16 * fam.degree + 1)[1:]
    previous = 0.0
    for theta in grid:
        if slope(theta) < 0.0:
            try:
                angle = scipy.optimize.brentq(slope, previous, theta, xtol=1e-15)
            except ValueError as exc:
                raise FocalSearchError(f"{fam.provenance}: bracket failed: {exc}") from exc
            point = curve(angle)
            value = fam.value(point)
            if abs(value) < 1.0 - FOCAL_TOLERANCE:
                raise FocalSearchError(f"{fam.provenance}: critical point with |f| = {abs(value):.12f}")
            return FocalPoint(point, angle, branch, value)
        previous = theta
    raise FocalSearchError(f"{fam.provenance}: no critical point along the normal circle")


@dataclass(frozen=True)
class TubeReport:
    theta_plus: float
    theta_minus: float
    residual: float


def tube_check(fam: IsoparametricFamily, x: np.ndarray) -> TubeReport:
    """Focal distances on both sides of a regular level add up to ``π/g``."""

    plus = focal_point(fam, x, 1).angle
    minus = focal_point(fam, x, -1).angle
    return TubeReport(plus, minus, abs(plus + minus - math.pi / fam.degree))


@dataclass(frozen=True)
class FocalFrame:
    point: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    normal_hessian: np.ndarray
    condition: float


def focal_frame(fam: IsoparametricFamily, p: np.ndarray, rank_tolerance: float = 1e-6) -> FocalFrame:
    """Split ``T_pS^n`` by the spherical Hessian of ``f``: kernel is tangent to ``W_±``."""

    p = np.asarray(p, dtype=float)
    j = fam.jet(p)
    f = float(j.value)
    if abs(f) < 1.0 - FOCAL_TOLERANCE:
        raise InvalidInputError(f"{fam.provenance}: |f(p)| = {abs(f):.12f} is not focal")
    sphere = _tangent_basis(p)
    hess = sphere.T @ (j.hess - fam.degree * f * np.eye(p.size)) @ sphere
    eig, vecs = np.linalg.eigh(0.5 * (hess + hess.T))
    scale = max(1.0, float(np.max(np.abs(eig))))
    kernel = np.abs(eig) <= rank_tolerance * scale
    tangent = sphere @ vecs[:, kernel]
    normal = sphere @ vecs[:, ~kernel]
    normal_eig = eig[~kernel]
    condition = float(np.max(np.abs(normal_eig)) / np.min(np.abs(normal_eig))) if normal_eig.size else 1.0
    normal_hessian = normal.T @ j.hess @ normal - fam.degree * f * np.eye(normal.shape[1])
    return FocalFrame(p, tangent, normal, normal_hessian, condition)


def random_normal_direction(frame: FocalFrame, rng: np.random.Generator) -> np.ndarray:
    coeffs = rng.standard_normal(frame.normal.shape[1])
    return frame.normal @ (coeffs / np.linalg.norm(coeffs))


def focal_spectrum(
    fam: IsoparametricFamily,
    p: np.ndarray,
    xi: np.ndarray,
    frame: FocalFrame | None = None,
    tolerance: float = CLUSTER_TOLERANCE,
) -> SpectrumSummary:
    """Shape operator ``A_ξ`` of the focal submanifold through ``p``.

    On a Morse–Bott critical set of ``f`` the second fundamental form is
    ``II(X, Y) = −H_N⁻¹ D³F(X, Y, ·)`` where ``H_N`` is the spherical Hessian on
    the normal space. ``D³F(·, ·, η)`` is a central difference of Hessians along
    ``η``, exact for polynomials of degree at most four.

    This replaces a least-squares quadratic fit of the submanifold over its
    tangent plane. Such a fit carries a truncation error set by the sampling
    radius. The Hessian difference has no truncation error for these
    polynomials, so the only error left is rounding. Ill-conditioning of
    ``H_N`` is reported as :class:`UnreliableFitError`.
    """

    frame = frame or focal_frame(fam, p)
    xi = np.asarray(xi, dtype=float)
    if abs(float(np.linalg.norm(xi)) - 1.0) > 1e-8:
        raise InvalidInputError("normal direction must be a unit vector")
    coords = frame.normal.T @ xi
    if float(np.linalg.norm(frame.normal @ coords - xi)) > 1e-8:
        raise InvalidInputError("direction is not normal to the focal submanifold")
    if frame.condition > FIT_CONDITION_LIMIT:
        raise UnreliableFitError(f"{fam.provenance}: normal Hessian badly conditioned", frame.condition)
    eta = frame.normal @ np.linalg.solve(frame.normal_hessian, coords)
    h = 0.1
    third = (fam.jet(frame.point + h * eta).hess - fam.jet(frame.point - h * eta).hess) / (2.0 * h)
    shape = -(frame.tangent.T @ third @ frame.tangent)
    return cluster_eigenvalues(np.linalg.eigvalsh(0.5 * (shape + shape.T)), tolerance)


def sample_focal_points(
    fam: IsoparametricFamily, branch: int, count: int, rng: np.random.Generator, t: float = 0.0
) -> list[FocalPoint]:
    """Random points of ``W_±`` reached from random points of ``W_t``."""

    return [focal_point(fam, project_with_retries(fam, t, rng), branch) for _ in range(count)]


# --- austere certification -----------------------------------------------------------


@dataclass(frozen=True)
class AustereCertificate:
    status: str
    spectra: int
    worst_asymmetry: float
    unreliable: int = 0
    failing: tuple[int, ...] = ()


def austere_test(
    spectra: Sequence[SpectrumSummary], unreliable: int = 0, tolerance: float = CLUSTER_TOLERANCE
) -> AustereCertificate:
    """PASS iff every spectrum is symmetric under ``λ ↦ −λ`` with multiplicities."""

    worst = 0.0
    failing: list[int] = []
    for index, spectrum in enumerate(spectra):
        values = np.sort(np.asarray(spectrum.eigenvalues))
        asymmetry = float(np.max(np.abs(values + values[::-1]))) if values.size else 0.0
        worst = max(worst, asymmetry)
        if asymmetry > tolerance:
            failing.append(index)
    if failing:
        status = "FAIL"
    elif unreliable:
        status = "INCONCLUSIVE"
    else:
        status = "PASS"
    return AustereCertificate(status, len(spectra), worst, unreliable, tuple(failing))


def minimal_level(fam: IsoparametricFamily, seed: int = 0, margin: float = 0.05) -> float:
    """The level ``t`` whose hypersurface has vanishing mean curvature."""

    start = random_sphere_point(fam.ambient_dim, np.random.default_rng(seed))

    def trace(t: float) -> float:
        return mean_curvature(fam, level_project(fam, t, start))

    lo, hi = -1.0 + margin, 1.0 - margin
    a, b = trace(lo), trace(hi)
    if a * b > 0:
        raise FocalSearchError(f"{fam.provenance}: mean curvature has one sign on [{lo}, {hi}]")
    return float(scipy.optimize.brentq(trace, lo, hi, xtol=1e-13))


# --- adjoint orbits -----------------------------------------------------------------


def adjoint_orbit_sample(eigen: Sequence[float], unitary: np.ndarray) -> np.ndarray:
    """``U·diag(λ)·U*`` as a point of ``S⁷ ⊂ R⁸`` in the Hermitian basis."""

    lam = np.asarray(eigen, dtype=float)
    u = np.asarray(unitary, dtype=complex)
    if lam.shape != (3,) or u.shape != (3, 3):
        raise InvalidInputError("adjoint orbit needs three eigenvalues and a 3x3 unitary")
    if abs(lam.sum()) > 1e-12:
        raise InvalidInputError(f"eigenvalues must be traceless, sum={lam.sum():.3e}")
    if abs(float(lam @ lam) - 1.0) > 1e-10:
        raise InvalidInputError(f"eigenvalues must have unit norm, got {float(lam @ lam):.12f}")
    if float(np.max(np.abs(u.conj().T @ u - np.eye(3)))) > 1e-10:
        raise InvalidInputError("matrix is not unitary")
    return hermitian_coordinates(u @ np.diag(lam) @ u.conj().T)


def adjoint_level(eigen: Sequence[float]) -> float:
    """Value of the adjoint family on the orbit with the given eigenvalues."""

    lam = np.asarray(eigen, dtype=float)
    return _ADJOINT_SCALE * float(np.prod(lam))


def normalized_eigenvalues(lam: Sequence[float]) -> np.ndarray:
    v = np.asarray(lam, dtype=float)
    v = v - v.mean()
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise InvalidInputError("eigenvalue triple is a multiple of the identity")
    return v / norm


def eigenvalues_for_level(t: float) -> np.ndarray:
    """Unit traceless eigenvalues whose adjoint orbit lies on the level ``F = t``."""

    if not -1.0 <= t <= 1.0:
        raise InvalidInputError(f"level {t} outside [-1, 1]")
    phi = math.acos(t) / 3.0
    return math.sqrt(2.0 / 3.0) * np.cos(phi + 2.0 * math.pi * np.arange(3) / 3.0)
