"""
The Calabi–Yau structure on ``T*Sⁿ`` seen through the complex quadric
``Σ z_i² = 1`` and the special Lagrangian test for conormal bundles.

``(x, ξ) ↦ x cosh|ξ| + i ξ/|ξ| sinh|ξ|`` identifies the cotangent bundle with
the quadric. The holomorphic volume form is ``Ω(T) = det(Z, T₁, …, T_n)`` and
the Kähler form comes from a radial potential ``u(τ)``, ``τ = |z|²``. The
potential itself is never solved for: every check runs over a small catalog
of admissible potentials instead.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from tokenize import TokenError
from typing import Any, Callable, Sequence

import numpy as np
import scipy.linalg
import sympy
from sympy.parsing.sympy_parser import parse_expr

from geometry import jet
from geometry.errors import (
    DegenerateFrameError,
    InvalidInputError,
    NearFocalError,
    PivotError,
)
from geometry.exterior import AlternatingTensor, FormField
from geometry.isoparametric import (
    HERMITIAN_BASIS,
    REGULAR_FLOOR,
    IsoparametricFamily,
    clifford_system,
    parse_manifest,
    project_with_retries,
)

logger = logging.getLogger(__name__)

QUADRIC_TOLERANCE = 1e-10
TANGENCY_TOLERANCE = 1e-10
RANK_TOLERANCE = 1e-10
LAGRANGIAN_TOLERANCE = 1e-8
PHASE_TOLERANCE = 1e-6
GAUSS_TOLERANCE = 1e-8
ZERO_SECTION_RADIUS = 1e-12
MIN_SAMPLES = 20


# --- the quadric model -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QuadricPoint:
    z: np.ndarray

    def __post_init__(self) -> None:
        z = np.asarray(self.z, dtype=complex).ravel()
        if z.size < 2:
            raise InvalidInputError("a quadric point needs at least two coordinates")
        object.__setattr__(self, "z", z)
        if self.residual >= QUADRIC_TOLERANCE:
            raise InvalidInputError(f"point is off the quadric (|Σz² − 1| = {self.residual:.3e})")

    @property
    def n(self) -> int:
        return self.z.size - 1

    @property
    def residual(self) -> float:
        return float(abs(np.sum(self.z * self.z) - 1.0))

    @property
    def tau(self) -> float:
        return float(np.vdot(self.z, self.z).real)

    @classmethod
    def from_pairs(cls, pairs: np.ndarray) -> "QuadricPoint":
        p = np.asarray(pairs, dtype=float).reshape(-1, 2)
        return cls(p[:, 0] + 1j * p[:, 1])

    def pairs(self) -> np.ndarray:
        return np.column_stack([self.z.real, self.z.imag])


def to_quadric(x: np.ndarray, xi: np.ndarray) -> QuadricPoint:
    """``x cosh|ξ| + i ξ/|ξ| sinh|ξ|``; the zero covector maps to ``x`` itself."""

    x = np.asarray(x, dtype=float).ravel()
    xi = np.asarray(xi, dtype=float).ravel()
    if x.shape != xi.shape:
        raise InvalidInputError(f"base point and covector differ in length: {x.size} vs {xi.size}")
    if abs(float(x @ x) - 1.0) > QUADRIC_TOLERANCE:
        raise InvalidInputError(f"base point is not a unit vector (|x| = {np.linalg.norm(x):.12f})")
    pairing = float(x @ xi)
    if abs(pairing) > QUADRIC_TOLERANCE:
        raise InvalidInputError(f"covector is not orthogonal to the base point (<x, ξ> = {pairing:.3e})")
    size = float(np.linalg.norm(xi))
    if size < ZERO_SECTION_RADIUS:
        return QuadricPoint(x.astype(complex))
    return QuadricPoint(x * math.cosh(size) + 1j * (xi / size) * math.sinh(size))


def holomorphic_volume(z: QuadricPoint, frame: np.ndarray) -> complex:
    """``Ω(T₁, …, T_n)``: the determinant with columns ``(z, T₁, …, T_n)``."""

    frame = np.asarray(frame, dtype=complex)
    if frame.shape != (z.n + 1, z.n):
        raise InvalidInputError(f"expected a {z.n + 1}x{z.n} frame, got {frame.shape}")
    return complex(np.linalg.det(np.column_stack([z.z, frame])))


# --- radial potentials ---------------------------------------------------------------


Derivative = Callable[[Any], Any]


def _scalar(v: Any) -> float:
    return float(v.value) if isinstance(v, jet.Jet2) else float(v)


@dataclass(frozen=True)
class RadialPotential:
    """``u′`` and ``u″`` as functions of ``τ = |z|²``, evaluable on floats or jets."""

    name: str
    first: Derivative = field(repr=False)
    second: Derivative = field(repr=False)
    provenance: str = "generic-sample"

    def derivatives(self, tau: Any) -> tuple[Any, Any]:
        return self.first(tau), self.second(tau)

    def check(self, taus: Sequence[float]) -> None:
        for tau in taus:
            slope = _scalar(self.first(float(tau)))
            if slope <= 0.0:
                raise InvalidInputError(f"potential {self.name!r} has u′ = {slope:.3e} <= 0 at τ = {tau:.4f}")


def _linear() -> RadialPotential:
    return RadialPotential("linear", lambda tau: 1.0, lambda tau: 0.0)


def _quadratic() -> RadialPotential:
    return RadialPotential("quadratic", lambda tau: 1.0 + 0.5 * tau, lambda tau: 0.5)


def _exponential() -> RadialPotential:
    return RadialPotential("exponential", lambda tau: jet.exp(0.25 * tau), lambda tau: 0.25 * jet.exp(0.25 * tau))


POTENTIALS: dict[str, Callable[[], RadialPotential]] = {
    "linear": _linear,
    "quadratic": _quadratic,
    "exponential": _exponential,
}


def potential_catalog() -> list[RadialPotential]:
    return [build() for build in POTENTIALS.values()]


EXPRESSION_FUNCTIONS: dict[str, Any] = {
    "sin": jet.sin,
    "cos": jet.cos,
    "tan": jet.tan,
    "sinh": jet.sinh,
    "cosh": jet.cosh,
    "tanh": jet.tanh,
    "exp": jet.exp,
    "log": jet.log,
    "sqrt": jet.sqrt,
    "atan": jet.arctan,
}
_EXPRESSION_CONSTANTS = {"pi": math.pi, "E": math.e, "e": math.e}


def compile_expression(source: str, variables: Sequence[str]) -> tuple[sympy.Expr, Callable[..., Any]]:
    """Parse an arithmetic expression and compile it to a jet-aware callable.

    Only ``+ − * / **``, the functions in :data:`EXPRESSION_FUNCTIONS`,
    numbers, ``pi`` and ``E`` are accepted.
    """

    symbols = sympy.symbols(list(variables))
    if not isinstance(symbols, (list, tuple)):
        symbols = [symbols]
    local = {str(s): s for s in symbols}
    local.update({name: getattr(sympy, name) for name in EXPRESSION_FUNCTIONS})
    local.update({"pi": sympy.pi, "E": sympy.E})
    try:
        expr = parse_expr(source, local_dict=local, evaluate=True)
    except (SyntaxError, TypeError, ValueError, TokenError, sympy.SympifyError) as exc:
        raise InvalidInputError(f"cannot parse expression {source!r}: {exc}") from exc
    unknown = {str(s) for s in expr.free_symbols} - set(local)
    if unknown:
        raise InvalidInputError(f"expression {source!r} uses unknown names {sorted(unknown)}")
    functions = {type(f).__name__ for f in expr.atoms(sympy.Function)}
    if functions - set(EXPRESSION_FUNCTIONS):
        raise InvalidInputError(f"expression {source!r} uses unsupported functions {sorted(functions)}")
    return expr, _lambdify(symbols, expr)


def _lambdify(symbols: Sequence[sympy.Symbol], expr: sympy.Expr) -> Callable[..., Any]:
    return sympy.lambdify(list(symbols), expr, modules=[{**EXPRESSION_FUNCTIONS, **_EXPRESSION_CONSTANTS}])


def potential_from_expression(source: str, name: str | None = None) -> RadialPotential:
    """A user potential ``u(tau)``; its derivatives are taken symbolically."""

    expr, _ = compile_expression(source, ["tau"])
    tau = sympy.Symbol("tau")
    first = _lambdify([tau], sympy.diff(expr, tau))
    second = _lambdify([tau], sympy.diff(expr, tau, 2))
    return RadialPotential(name or source, first, second, provenance="user-supplied")


# --- the Kähler form -------------------------------------------------------------------


def _conj(w: Any) -> Any:
    return w.conj()


def _abs2(w: Any) -> Any:
    return w.abs2() if isinstance(w, jet.ComplexJet2) else float(abs(w) ** 2)


def _real_imag(w: Any) -> tuple[Any, Any]:
    if isinstance(w, jet.ComplexJet2):
        return w.re, w.im
    return float(np.real(w)), float(np.imag(w))


def _hermitian_entries(z0: Any, zs: Sequence[Any], up: Any, upp: Any) -> list[list[Any]]:
    ratio = _conj(z0) / z0
    inv_abs0 = 1.0 / _abs2(z0)
    rows = []
    for j, zj in enumerate(zs):
        row = []
        for k, zk in enumerate(zs):
            first = zj * _conj(zk) * inv_abs0 + (1.0 if j == k else 0.0)
            second, _ = _real_imag(_conj(zj) * zk - ratio * zj * zk)
            row.append(first * up + 2.0 * second * upp)
        rows.append(row)
    return rows


def _real_two_form(entries: Sequence[Sequence[Any]]) -> AlternatingTensor:
    # chart coordinates interleave (Re z_j, Im z_j)
    n = len(entries)
    terms: dict[tuple[int, int], Any] = {}

    def add(key: tuple[int, int], value: Any) -> None:
        terms[key] = terms[key] + value if key in terms else value

    for j in range(n):
        for k in range(n):
            p, q = _real_imag(entries[j][k])
            add((2 * j, 2 * k + 1), p)
            if j < k:
                add((2 * j, 2 * k), -q)
                add((2 * j + 1, 2 * k + 1), -q)
    return AlternatingTensor.from_terms(terms, 2 * n, one_based=False)


@dataclass(frozen=True, eq=False)
class KahlerForm:
    pivot: int
    slots: tuple[int, ...]
    hermitian: np.ndarray
    form: AlternatingTensor

    def chart_vector(self, v: np.ndarray) -> np.ndarray:
        w = np.asarray(v, dtype=complex)[list(self.slots)]
        return np.column_stack([w.real, w.imag]).ravel()

    def pair(self, v: np.ndarray, w: np.ndarray) -> float:
        return float(self.form.evaluate(np.column_stack([self.chart_vector(v), self.chart_vector(w)])))


def _choose_pivot(z: np.ndarray, pivot: int | None) -> int:
    if pivot is None:
        pivot = int(np.argmax(np.abs(z)))
    if not 0 <= pivot < z.size:
        raise InvalidInputError(f"pivot {pivot} out of range for {z.size} coordinates")
    if abs(z[pivot]) <= jet.EPS_DOM:
        raise PivotError(f"pivot coordinate {pivot} is too small (|z| = {abs(z[pivot]):.3e}); choose another slot")
    return pivot


def stenzel_kahler_form(u: RadialPotential, z: QuadricPoint, pivot: int | None = None) -> KahlerForm:
    """``ω = (i/2) Σ a_jk dz_j ∧ dz̄_k`` in the chart that drops the pivot slot."""

    p = _choose_pivot(z.z, pivot)
    slots = tuple(i for i in range(z.n + 1) if i != p)
    up, upp = u.derivatives(z.tau)
    up, upp = float(up), float(upp)
    if up <= 0.0:
        raise InvalidInputError(f"potential {u.name!r} has u′ = {up:.3e} <= 0 at τ = {z.tau:.4f}")
    entries = _hermitian_entries(z.z[p], [z.z[i] for i in slots], up, upp)
    return KahlerForm(p, slots, np.array(entries, dtype=complex), _real_two_form(entries))


def kahler_form_field(u: RadialPotential, z: QuadricPoint, pivot: int | None = None) -> tuple[FormField, np.ndarray]:
    """The Kähler form as a field on the pivot chart, and the chart point of ``z``.

    The pivot coordinate is recovered as ``±sqrt(1 − Σ z_j²)`` with the sign
    that reproduces ``z``.
    """

    p = _choose_pivot(z.z, pivot)
    slots = [i for i in range(z.n + 1) if i != p]
    root = np.sqrt(1.0 - np.sum(z.z[slots] ** 2))
    sign = 1.0 if abs(root - z.z[p]) <= abs(root + z.z[p]) else -1.0
    n = z.n

    def coefficients(point: jet.Jet2) -> dict[tuple[int, ...], Any]:
        zs = [jet.ComplexJet2(point[2 * j], point[2 * j + 1]) for j in range(n)]
        squares = zs[0] * zs[0]
        for w in zs[1:]:
            squares = squares + w * w
        z0 = jet.csqrt(1.0 - squares) * sign
        tau = z0.abs2()
        for w in zs:
            tau = tau + w.abs2()
        up, upp = u.derivatives(tau)
        return dict(_real_two_form(_hermitian_entries(z0, zs, up, upp)).coeffs)

    chart_point = np.column_stack([z.z[slots].real, z.z[slots].imag]).ravel()
    return FormField(2, 2 * n, coefficients), chart_point


# --- submanifolds of the sphere ----------------------------------------------------------


Embedding = Callable[[jet.Jet2], jet.Jet2]


@dataclass(frozen=True)
class SubmanifoldChart:
    """A parametrized ``N^p ⊂ Sⁿ``; ``embedding`` maps a parameter jet to a point jet."""

    name: str
    dim: int
    ambient_dim: int
    embedding: Embedding = field(repr=False)
    box: tuple[float, float] = (-0.6, 0.6)
    certified: bool = False

    def __post_init__(self) -> None:
        if not 1 <= self.dim <= self.ambient_dim - 2:
            raise InvalidInputError(f"{self.name}: dimension {self.dim} invalid in S^{self.ambient_dim - 1}")

    @property
    def codim(self) -> int:
        return self.ambient_dim - 1 - self.dim

    def point(self, s: Sequence[float]) -> np.ndarray:
        return np.asarray(self.embedding(jet.seed_vector(s)).value)

    def sample_parameters(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.box[0], self.box[1], size=self.dim)


def _sphere_block(y: jet.Jet2, radius: float) -> list[jet.Jet2]:
    s2 = jet.einsum("i,i->", y, y)
    inv = (1.0 + s2).reciprocal()
    return [(1.0 - s2) * inv * radius] + [y[i] * inv * (2.0 * radius) for i in range(y.shape[0])]


def sphere_product_chart(
    name: str, ambient_dim: int, blocks: Sequence[tuple[int, int, float]], certified: bool = False
) -> SubmanifoldChart:
    """Product of round spheres; each block is ``(start slot, sphere dim, radius)``."""

    dim = sum(d for _, d, _ in blocks)
    for start, d, _ in blocks:
        if start < 0 or start + d + 1 > ambient_dim:
            raise InvalidInputError(f"{name}: block at {start} of dim {d} leaves R^{ambient_dim}")

    def embedding(s: jet.Jet2) -> jet.Jet2:
        coords: list[Any] = [0.0] * ambient_dim
        offset = 0
        for start, d, radius in blocks:
            coords[start : start + d + 1] = _sphere_block(s[offset : offset + d], radius)
            offset += d
        return jet.stack(coords, dim=s.dim)

    return SubmanifoldChart(name, dim, ambient_dim, embedding, certified=certified)


def equator_chart(n: int = 4) -> SubmanifoldChart:
    return sphere_product_chart(f"equator(S^{n - 1})", n + 1, [(0, n - 1, 1.0)], certified=True)


def g2_focal_chart(k: int = 3, n: int = 7, branch: int = 1) -> SubmanifoldChart:
    """Focal spheres of the Clifford-torus family: ``S^k(1)`` on ``f = +1``, ``S^{n-1-k}(1)`` on ``f = −1``."""

    if branch not in (1, -1):
        raise InvalidInputError(f"branch must be +1 or -1, got {branch}")
    block = (0, k, 1.0) if branch == 1 else (k + 1, n - 1 - k, 1.0)
    return sphere_product_chart(f"g2-focal(k={k},n={n},{branch:+d})", n + 1, [block], certified=True)


def g2_level_chart(k: int = 1, n: int = 7, t: float = 0.5) -> SubmanifoldChart:
    """The level ``W_t = S^k(√((1+t)/2)) × S^{n-1-k}(√((1−t)/2))``; not austere unless minimal."""

    if not -1.0 < t < 1.0:
        raise InvalidInputError(f"level t={t} must lie in (-1, 1)")
    blocks = [(0, k, math.sqrt((1.0 + t) / 2.0)), (k + 1, n - 1 - k, math.sqrt((1.0 - t) / 2.0))]
    return sphere_product_chart(f"g2-level(k={k},n={n},t={t})", n + 1, blocks)


def veronese_chart(branch: int = -1) -> SubmanifoldChart:
    """The CP² focal orbit ``±(I − 3vv*)/√6`` of the adjoint family, affine chart ``v ∝ (1, w)``."""

    if branch not in (1, -1):
        raise InvalidInputError(f"branch must be +1 or -1, got {branch}")
    scale = -branch / math.sqrt(6.0)
    basis_re, basis_im = HERMITIAN_BASIS.real, HERMITIAN_BASIS.imag

    def embedding(s: jet.Jet2) -> jet.Jet2:
        re = jet.stack([1.0, s[0], s[2]], dim=s.dim)
        im = jet.stack([0.0, s[1], s[3]], dim=s.dim)
        inv = (1.0 + jet.einsum("i,i->", s, s)).reciprocal()
        proj_re = (jet.einsum("i,j->ij", re, re) + jet.einsum("i,j->ij", im, im)) * inv
        proj_im = (jet.einsum("i,j->ij", im, re) - jet.einsum("i,j->ij", re, im)) * inv
        a_re = (np.eye(3) - 3.0 * proj_re) * scale
        a_im = proj_im * (-3.0 * scale)
        return jet.einsum("ij,aji->a", a_re, basis_re) - jet.einsum("ij,aji->a", a_im, basis_im)

    return SubmanifoldChart(f"veronese({branch:+d})", 4, 8, embedding, certified=True)


def fkm_focal_chart(m: int = 1, ell: int = 3) -> SubmanifoldChart:
    """``W_−`` of an FKM family: unit vectors of ``E_+(P)`` for ``P`` on the Clifford sphere."""

    cs = clifford_system(m, ell)
    mats = np.stack(cs.matrices)
    half = cs.size // 2

    def embedding(s: jet.Jet2) -> jet.Jet2:
        weights = jet.stack(_sphere_block(s[:m], 1.0))
        fiber = _sphere_block(s[m:], 1.0)
        seed = jet.stack(fiber + [0.0] * half, dim=s.dim)
        p = jet.einsum("a,aij->ij", weights, mats)
        v = seed + jet.einsum("ij,j->i", p, seed)
        return v * jet.sqrt(jet.einsum("i,i->", v, v)).reciprocal()

    return SubmanifoldChart(f"fkm-focal(m={m},ell={ell})", m + half - 1, cs.size, embedding, certified=True)


SUBMANIFOLD_CATALOG: dict[str, Callable[..., SubmanifoldChart]] = {
    "equator": equator_chart,
    "g2-focal": g2_focal_chart,
    "g2-level": g2_level_chart,
    "veronese": veronese_chart,
    "fkm-focal": fkm_focal_chart,
}


def build_submanifold(name: str, **params: Any) -> SubmanifoldChart:
    try:
        builder = SUBMANIFOLD_CATALOG[name]
    except KeyError as exc:
        raise InvalidInputError(f"unknown submanifold {name!r}") from exc
    return builder(**params)


def _number(text: str) -> int | float:
    try:
        return int(text)
    except ValueError:
        return float(text)


def submanifold_from_manifest(text: str) -> SubmanifoldChart:
    """Either ``catalog = <name>`` plus parameters, or a user chart.

    A user chart gives ``dim``, ``ambient``, an optional ``box = lo, hi`` and
    one expression ``x1 … x<ambient>`` per coordinate in ``s1 … s<dim>``.
    User charts are never marked certified.
    """

    entries = parse_manifest(text)
    catalog = entries.pop("catalog", None)
    if catalog is not None:
        try:
            return build_submanifold(catalog, **{k: _number(v) for k, v in entries.items()})
        except (TypeError, ValueError) as exc:
            raise InvalidInputError(f"bad parameters for submanifold {catalog!r}: {exc}") from exc
    try:
        dim = int(entries.pop("dim"))
        ambient = int(entries.pop("ambient"))
    except KeyError as exc:
        raise InvalidInputError(f"user chart is missing {exc.args[0]!r}") from exc
    box = tuple(float(v) for v in entries.pop("box", "-0.5, 0.5").split(","))
    if len(box) != 2 or box[0] >= box[1]:
        raise InvalidInputError(f"bad parameter box {box}")
    name = entries.pop("name", "user-chart")
    variables = [f"s{i + 1}" for i in range(dim)]
    compiled = []
    for i in range(ambient):
        key = f"x{i + 1}"
        if key not in entries:
            raise InvalidInputError(f"user chart has no expression for {key}")
        compiled.append(compile_expression(entries.pop(key), variables)[1])
    if entries:
        raise InvalidInputError(f"unknown manifest keys {sorted(entries)}")

    def embedding(s: jet.Jet2) -> jet.Jet2:
        args = [s[i] for i in range(dim)]
        return jet.stack([f(*args) for f in compiled], dim=s.dim)

    return SubmanifoldChart(name, dim, ambient, embedding, (box[0], box[1]))


# --- conormal bundles ------------------------------------------------------------------------


def _first_order(value: np.ndarray, grad: np.ndarray, dim: int) -> jet.Jet2:
    """A jet whose Hessian is left at zero; only value and gradient are read."""

    value = np.asarray(value, dtype=float)
    padded = np.zeros(value.shape + (dim,))
    padded[..., : grad.shape[-1]] = grad
    return jet.Jet2(value, padded, np.zeros(value.shape + (dim, dim)))


def conormal_frame(chart: SubmanifoldChart, s: np.ndarray) -> tuple[jet.Jet2, list[jet.Jet2]]:
    """Base point and an orthonormal conormal frame ``ν^k``, with first derivatives in ``s``."""

    s = np.asarray(s, dtype=float).ravel()
    if s.size != chart.dim:
        raise InvalidInputError(f"{chart.name}: {s.size} parameters, expected {chart.dim}")
    position = chart.embedding(jet.seed_vector(s))
    x0, tangent, second = position.value, position.grad, position.hess
    if abs(float(x0 @ x0) - 1.0) > QUADRIC_TOLERANCE:
        raise InvalidInputError(f"{chart.name}: point is off the unit sphere (|x| = {np.linalg.norm(x0):.12f})")
    basis = np.column_stack([x0, tangent])
    sv = np.linalg.svd(basis, compute_uv=False)
    rank = int(np.sum(sv > RANK_TOLERANCE * sv[0]))
    if rank < chart.dim + 1:
        raise DegenerateFrameError(f"{chart.name}: parametrization is not immersive at s={s}", rank - 1)

    p = chart.dim
    span = [jet.Jet2(x0, tangent, np.zeros(second.shape))]
    span += [_first_order(tangent[:, a], second[:, a, :], p) for a in range(p)]
    span += [jet.constant(e, p) for e in scipy.linalg.null_space(basis.T).T]
    ortho: list[jet.Jet2] = []
    for v in span:
        for w in ortho:
            v = v - jet.einsum("i,i->", v, w) * w
        ortho.append(v * jet.sqrt(jet.einsum("i,i->", v, v)).reciprocal())
    return span[0], ortho[p + 1 :]


@dataclass(frozen=True, eq=False)
class ConormalSample:
    chart: str
    s: np.ndarray
    t: np.ndarray
    base: np.ndarray
    normals: np.ndarray
    z: QuadricPoint
    frame: np.ndarray
    tangency: float
    certified: bool = False

    @property
    def n(self) -> int:
        return self.z.n


def conormal_immersion(chart: SubmanifoldChart, s: np.ndarray, t: np.ndarray) -> ConormalSample:
    """``Ψ(s, t) = x(s) cosh|t| + i ν̂(s, t) sinh|t|`` with its tangent frame ``∂Ψ/∂(s, t)``."""

    s = np.asarray(s, dtype=float).ravel()
    t = np.asarray(t, dtype=float).ravel()
    if t.size != chart.codim:
        raise InvalidInputError(f"{chart.name}: {t.size} fiber coefficients, expected {chart.codim}")
    x, normals = conormal_frame(chart, s)
    p, q = chart.dim, chart.codim
    nu_values = np.column_stack([v.value for v in normals])
    if float(np.linalg.norm(t)) < ZERO_SECTION_RADIUS:
        z = x.value.astype(complex)
        frame = np.column_stack([x.grad, 1j * nu_values])
    else:
        d = p + q
        tj = jet.seed_vector(np.concatenate([s, t]))[p:]
        nu = jet.stack([_first_order(v.value, v.grad, d) for v in normals])
        r = jet.sqrt(jet.einsum("k,k->", tj, tj))
        nu_hat = jet.einsum("k,ki->i", tj, nu) * r.reciprocal()
        psi = jet.ComplexJet2(_first_order(x.value, x.grad, d) * jet.cosh(r), nu_hat * jet.sinh(r))
        z, frame = psi.value, psi.grad

    n = z.size - 1
    real = np.vstack([frame.real, frame.imag])
    sv = np.linalg.svd(real, compute_uv=False)
    rank = int(np.sum(sv > RANK_TOLERANCE * sv[0]))
    if rank < n:
        raise DegenerateFrameError(f"{chart.name}: conormal frame collapses at s={s}, t={t}", rank)
    tangency = float(np.max(np.abs(z @ frame)))
    if tangency > TANGENCY_TOLERANCE:
        logger.warning("%s: frame leaves the quadric tangent space (%.3e)", chart.name, tangency)
    return ConormalSample(chart.name, s, t, x.value, nu_values, QuadricPoint(z), frame, tangency, chart.certified)


def sample_conormal(
    chart: SubmanifoldChart,
    count: int,
    rng: np.random.Generator,
    radius: tuple[float, float] = (0.2, 1.2),
) -> list[ConormalSample]:
    """Random conormal samples; fiber coefficients have ``|t|`` uniform in ``radius``."""

    samples = []
    for _ in range(count):
        s = chart.sample_parameters(rng)
        direction = rng.standard_normal(chart.codim)
        direction /= np.linalg.norm(direction)
        samples.append(conormal_immersion(chart, s, direction * rng.uniform(*radius)))
    return samples


# --- special Lagrangian certification ---------------------------------------------------------


def orthonormal_frame(frame: np.ndarray) -> np.ndarray:
    """Orthonormalize complex columns for the real inner product on ``C^{n+1} = R^{2n+2}``."""

    frame = np.asarray(frame, dtype=complex)
    rows = frame.shape[0]
    q, r = np.linalg.qr(np.vstack([frame.real, frame.imag]))
    q = q * np.sign(np.diag(r))
    return q[:rows] + 1j * q[rows:]


def _mod_pi(angle: np.ndarray) -> np.ndarray:
    return np.mod(np.asarray(angle) + math.pi / 2.0, math.pi) - math.pi / 2.0


def phase_distance(a: float, b: float) -> float:
    """Angular distance modulo ``π``."""

    return float(abs(_mod_pi(a - b)))


def phase_spread(phases: Sequence[float]) -> tuple[float, float]:
    """Circular mean of phases mod ``π`` and the largest deviation from it."""

    doubled = np.exp(2j * np.asarray(phases, dtype=float))
    centre = float(np.angle(doubled.sum()) / 2.0)
    deviation = float(np.max(np.abs(_mod_pi(np.asarray(phases) - centre)))) if doubled.size else 0.0
    return float(_mod_pi(centre)), deviation


@dataclass(frozen=True)
class SlagCertificate:
    status: str
    lagrangian_residual: float
    phase: float
    phase_spread: float
    samples: int
    potential: str
    tangency: float
    min_volume: float
    certified: bool
    phases: tuple[float, ...] = field(default=(), repr=False)


def slag_verify(
    samples: Sequence[ConormalSample],
    u: RadialPotential,
    lagrangian_tolerance: float = LAGRANGIAN_TOLERANCE,
    phase_tolerance: float = PHASE_TOLERANCE,
) -> SlagCertificate:
    """Lagrangian residual of ``ω`` and the spread of ``arg Ω`` over conormal samples."""

    if len(samples) < MIN_SAMPLES:
        raise InvalidInputError(f"special Lagrangian check needs at least {MIN_SAMPLES} samples, got {len(samples)}")
    u.check([sample.z.tau for sample in samples])
    residual = 0.0
    phases = []
    min_volume = float("inf")
    for sample in samples:
        frame = orthonormal_frame(sample.frame)
        kahler = stenzel_kahler_form(u, sample.z)
        for a in range(frame.shape[1]):
            for b in range(a + 1, frame.shape[1]):
                residual = max(residual, abs(kahler.pair(frame[:, a], frame[:, b])))
        omega = holomorphic_volume(sample.z, frame)
        min_volume = min(min_volume, abs(omega))
        phases.append(float(np.angle(omega)))
    phase, spread = phase_spread(phases)
    status = "PASS" if residual < lagrangian_tolerance and spread < phase_tolerance else "FAIL"
    logger.debug(
        "slag %s under %s: residual=%.2e spread=%.2e -> %s", samples[0].chart, u.name, residual, spread, status
    )
    return SlagCertificate(
        status,
        residual,
        phase,
        spread,
        len(samples),
        u.name,
        max(sample.tangency for sample in samples),
        min_volume,
        all(sample.certified for sample in samples),
        tuple(phases),
    )


def slag_sweep(samples: Sequence[ConormalSample], potentials: Sequence[RadialPotential] | None = None) -> list[SlagCertificate]:
    """One certificate per potential; the verdict must not depend on the potential."""

    certificates = [slag_verify(samples, u) for u in (potentials or potential_catalog())]
    if len({c.status for c in certificates}) > 1:
        logger.warning("slag verdict depends on the potential: %s", [(c.potential, c.status) for c in certificates])
    return certificates


def phase_of_dimension(p: int, n: int) -> float:
    """Predicted phase mod ``π`` of a conormal bundle of ``N^p ⊂ Sⁿ``.

    Each of the ``n − p`` fiber directions contributes a factor ``i`` to ``Ω``
    along the zero section, so the phase is ``(n − p)·π/2`` mod ``π``.
    """

    if not 0 <= p <= n:
        raise InvalidInputError(f"dimension {p} out of range for S^{n}")
    return float(_mod_pi((n - p) * math.pi / 2.0))


# --- Gauss map of isoparametric hypersurfaces ---------------------------------------------------


@dataclass(frozen=True)
class GaussMapReport:
    status: str
    lagrangian_residual: float
    quadric_residual: float
    samples: int
    rejected: int


def gauss_map_residual(fam: IsoparametricFamily, x: np.ndarray) -> tuple[float, float]:
    """Fubini–Study pairing on the image frame of ``x ↦ [x + i n(x)]`` and ``|Σ w²|``."""

    x = np.asarray(x, dtype=float)
    j = fam.jet(x)
    spherical = j.grad - fam.degree * float(j.value) * x
    if float(np.linalg.norm(spherical)) < REGULAR_FLOOR:
        raise NearFocalError(f"{fam.provenance}: Gauss map undefined at a near-focal point")
    y = jet.seed_vector(x)
    grad = _first_order(j.grad, j.hess, x.size)
    tangential = grad - jet.einsum("i,i->", y, grad) * y
    normal = tangential * jet.sqrt(jet.einsum("i,i->", tangential, tangential)).reciprocal()
    nu, dnu = normal.value, normal.grad
    basis = scipy.linalg.null_space(np.vstack([x, nu]))
    images = basis + 1j * (dnu @ basis)
    w = x + 1j * nu
    horizontal = images - np.outer(w, w.conj() @ images) / float(np.vdot(w, w).real)
    pairing = np.imag(horizontal.T @ horizontal.conj()) / float(np.vdot(w, w).real)
    return float(np.max(np.abs(pairing))), float(abs(np.sum(w * w)))


def gauss_map_check(
    fam: IsoparametricFamily, points: Sequence[np.ndarray], tolerance: float = GAUSS_TOLERANCE
) -> GaussMapReport:
    residual = quadric = 0.0
    rejected = 0
    for x in points:
        try:
            r, qr = gauss_map_residual(fam, x)
        except NearFocalError as exc:
            rejected += 1
            logger.warning("gauss map %s: sample rejected: %s", fam.provenance, exc)
            continue
        residual, quadric = max(residual, r), max(quadric, qr)
    accepted = len(points) - rejected
    status = "PASS" if accepted and residual < tolerance else "FAIL"
    return GaussMapReport(status, residual, quadric, accepted, rejected)


def gauss_map_sweep(fam: IsoparametricFamily, t: float, count: int, seed: int = 0) -> GaussMapReport:
    rng = np.random.default_rng(seed)
    return gauss_map_check(fam, [project_with_retries(fam, t, rng) for _ in range(count)])
