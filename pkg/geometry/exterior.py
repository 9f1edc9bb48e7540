"""
Alternating tensors at a point, Hodge duality and the numerical exterior
derivative of form fields whose coefficients are evaluated as jets.

Indices are 0-based internally; :meth:`AlternatingTensor.from_terms` accepts
the 1-based labels used for the G2 form ``e^{125} - e^{345} + ...``.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping

import numpy as np

from geometry import jet
from geometry.errors import DegenerateFormError, InvalidInputError

logger = logging.getLogger(__name__)

Index = tuple[int, ...]


def permutation_sign(indices: Iterable[int]) -> int:
    """Sign of the permutation sorting ``indices``; 0 when an index repeats."""

    seq = list(indices)
    if len(set(seq)) != len(seq):
        return 0
    inversions = sum(1 for i, j in itertools.combinations(range(len(seq)), 2) if seq[i] > seq[j])
    return -1 if inversions % 2 else 1


@dataclass(frozen=True)
class AlternatingTensor:
    """Degree-``degree`` alternating form on R^``dim`` keyed by increasing tuples."""

    degree: int
    dim: int
    coeffs: Mapping[Index, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.degree < 0 or self.dim < 1:
            raise InvalidInputError(f"bad form shape degree={self.degree} dim={self.dim}")
        clean: dict[Index, Any] = {}
        if self.degree <= self.dim:
            for key, value in self.coeffs.items():
                if len(key) != self.degree or any(b <= a for a, b in zip(key, key[1:])):
                    raise InvalidInputError(f"coefficient key {key} is not strictly increasing")
                if key and (key[0] < 0 or key[-1] >= self.dim):
                    raise InvalidInputError(f"coefficient key {key} out of range for dim {self.dim}")
                clean[key] = value
        object.__setattr__(self, "coeffs", clean)

    # --- construction ---------------------------------------------------

    @classmethod
    def zero(cls, degree: int, dim: int) -> "AlternatingTensor":
        return cls(degree, dim, {})

    @classmethod
    def scalar(cls, value: Any, dim: int) -> "AlternatingTensor":
        return cls(0, dim, {(): value})

    @classmethod
    def from_terms(
        cls, terms: Mapping[Index, Any], dim: int, one_based: bool = True
    ) -> "AlternatingTensor":
        """Build a form from possibly unsorted index tuples, applying permutation signs."""

        degrees = {len(k) for k in terms}
        if len(degrees) != 1:
            raise InvalidInputError("terms must share one degree")
        degree = degrees.pop()
        coeffs: dict[Index, Any] = {}
        for key, value in terms.items():
            idx = tuple(i - 1 for i in key) if one_based else tuple(key)
            sign = permutation_sign(idx)
            if sign == 0:
                continue
            sorted_key = tuple(sorted(idx))
            coeffs[sorted_key] = coeffs.get(sorted_key, 0.0) + sign * value
        return cls(degree, dim, coeffs)

    @classmethod
    def covector(cls, values: Iterable[Any]) -> "AlternatingTensor":
        vals = list(values)
        return cls(1, len(vals), {(i,): v for i, v in enumerate(vals)})

    @classmethod
    def volume(cls, dim: int) -> "AlternatingTensor":
        return cls(dim, dim, {tuple(range(dim)): 1.0})

    # --- access ---------------------------------------------------------

    def component(self, indices: Iterable[int]) -> Any:
        """Coefficient on an arbitrary index order (permutation sign applied)."""

        idx = tuple(indices)
        sign = permutation_sign(idx)
        if sign == 0:
            return 0.0
        return sign * self.coeffs.get(tuple(sorted(idx)), 0.0)

    def norm_inf(self) -> float:
        return max((abs(float(np.asarray(_value_of(v)))) for v in self.coeffs.values()), default=0.0)

    def values(self) -> dict[Index, float]:
        return {k: float(_value_of(v)) for k, v in self.coeffs.items()}

    def evaluate(self, vectors: np.ndarray) -> Any:
        """Evaluate on ``degree`` vectors given as the columns of an n×k array."""

        vecs = np.asarray(vectors)
        if vecs.shape != (self.dim, self.degree):
            raise InvalidInputError(f"expected a {self.dim}x{self.degree} array of vectors")
        total: Any = 0.0
        for key, value in self.coeffs.items():
            total = total + value * np.linalg.det(vecs[list(key), :]) if key else total + value
        return total

    # --- linear structure -------------------------------------------------

    def _check(self, other: "AlternatingTensor") -> None:
        if self.dim != other.dim:
            raise InvalidInputError(f"dimension mismatch {self.dim} vs {other.dim}")
        if self.degree != other.degree:
            raise InvalidInputError(f"degree mismatch {self.degree} vs {other.degree}")

    def __add__(self, other: "AlternatingTensor") -> "AlternatingTensor":
        self._check(other)
        coeffs = dict(self.coeffs)
        for key, value in other.coeffs.items():
            coeffs[key] = coeffs[key] + value if key in coeffs else value
        return AlternatingTensor(self.degree, self.dim, coeffs)

    def __neg__(self) -> "AlternatingTensor":
        return AlternatingTensor(self.degree, self.dim, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: "AlternatingTensor") -> "AlternatingTensor":
        return self + (-other)

    def __mul__(self, scalar: Any) -> "AlternatingTensor":
        return AlternatingTensor(self.degree, self.dim, {k: v * scalar for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def __xor__(self, other: "AlternatingTensor") -> "AlternatingTensor":
        return wedge(self, other)


def _value_of(v: Any) -> Any:
    return v.value if isinstance(v, jet.Jet2) else v


def wedge(a: AlternatingTensor, b: AlternatingTensor) -> AlternatingTensor:
    if a.dim != b.dim:
        raise InvalidInputError(f"dimension mismatch {a.dim} vs {b.dim}")
    degree = a.degree + b.degree
    if degree > a.dim:
        return AlternatingTensor.zero(degree, a.dim)
    coeffs: dict[Index, Any] = {}
    for ka, va in a.coeffs.items():
        for kb, vb in b.coeffs.items():
            merged = ka + kb
            sign = permutation_sign(merged)
            if sign == 0:
                continue
            key = tuple(sorted(merged))
            term = va * vb if sign > 0 else -(va * vb)
            coeffs[key] = coeffs[key] + term if key in coeffs else term
    return AlternatingTensor(degree, a.dim, coeffs)


def interior(v: Iterable[float], a: AlternatingTensor) -> AlternatingTensor:
    """Contraction ``v ⌟ a`` into the first slot."""

    vec = np.asarray(list(v), dtype=float)
    if vec.size != a.dim:
        raise InvalidInputError(f"vector of length {vec.size} does not match dim {a.dim}")
    if a.degree == 0:
        raise InvalidInputError("cannot contract a degree-0 form")
    coeffs: dict[Index, Any] = {}
    for key, value in a.coeffs.items():
        for pos, i in enumerate(key):
            if vec[i] == 0.0:
                continue
            rest = key[:pos] + key[pos + 1 :]
            term = value * ((-1) ** pos * vec[i])
            coeffs[rest] = coeffs[rest] + term if rest in coeffs else term
    return AlternatingTensor(a.degree - 1, a.dim, coeffs)


def _check_metric(metric: np.ndarray, dim: int) -> np.ndarray:
    g = np.asarray(metric, dtype=float)
    if g.shape != (dim, dim) or not np.allclose(g, g.T, atol=1e-12):
        raise InvalidInputError("metric must be a symmetric matrix matching the form dimension")
    if np.min(np.linalg.eigvalsh(g)) <= 0.0:
        raise InvalidInputError("metric is not positive definite")
    return g


def _raise_indices(a: AlternatingTensor, ginv: np.ndarray) -> dict[Index, float]:
    raised: dict[Index, float] = {}
    keys = list(itertools.combinations(range(a.dim), a.degree))
    for key in keys:
        total = 0.0
        for other, value in a.coeffs.items():
            total += float(np.linalg.det(ginv[np.ix_(key, other)])) * value if key else value
        if total != 0.0:
            raised[key] = total
    return raised


def inner(a: AlternatingTensor, b: AlternatingTensor, metric: np.ndarray | None = None) -> float:
    """Pointwise inner product induced by ``metric`` (Euclidean by default)."""

    a._check(b)
    g = np.eye(a.dim) if metric is None else _check_metric(metric, a.dim)
    raised = _raise_indices(a, np.linalg.inv(g))
    return float(sum(value * b.coeffs.get(key, 0.0) for key, value in raised.items()))


def hodge_star(
    a: AlternatingTensor, metric: np.ndarray | None = None, orientation: int = 1
) -> AlternatingTensor:
    """Riemannian Hodge star with ``vol = orientation · √det g · e^{1…n}``."""

    if orientation not in (1, -1):
        raise InvalidInputError("orientation must be ±1")
    n, k = a.dim, a.degree
    g = np.eye(n) if metric is None else _check_metric(metric, n)
    raised = _raise_indices(a, np.linalg.inv(g))
    scale = orientation * float(np.sqrt(np.linalg.det(g)))
    coeffs: dict[Index, float] = {}
    for key, value in raised.items():
        comp = tuple(i for i in range(n) if i not in key)
        coeffs[comp] = scale * permutation_sign(key + comp) * value
    return AlternatingTensor(n - k, n, coeffs)


def pullback(a: AlternatingTensor, matrix: np.ndarray) -> AlternatingTensor:
    """Pull ``a`` back along the linear map ``x ↦ matrix @ x``."""

    m = np.asarray(matrix, dtype=float)
    if m.shape != (a.dim, a.dim):
        raise InvalidInputError("pullback needs a square matrix matching the form dimension")
    coeffs: dict[Index, float] = {}
    for key in itertools.combinations(range(a.dim), a.degree):
        total = sum(value * float(np.linalg.det(m[np.ix_(other, key)])) for other, value in a.coeffs.items())
        if abs(total) > 0.0:
            coeffs[key] = total
    return AlternatingTensor(a.degree, a.dim, coeffs)


# --- form fields and d -----------------------------------------------------


@dataclass(frozen=True)
class FormField:
    """A k-form on a chart; ``coefficients`` maps a seeded point jet to jet coefficients."""

    degree: int
    dim: int
    coefficients: Callable[[jet.Jet2], Mapping[Index, Any]]

    def at(self, point: Iterable[float]) -> AlternatingTensor:
        x = np.asarray(list(point), dtype=float)
        coeffs = self.coefficients(jet.seed_vector(x))
        return AlternatingTensor(self.degree, self.dim, {k: float(_value_of(v)) for k, v in coeffs.items()})


def _jet_coefficients(field_: FormField, point: Iterable[float]) -> dict[Index, jet.Jet2]:
    x = np.asarray(list(point), dtype=float)
    if x.size != field_.dim:
        raise InvalidInputError(f"point of length {x.size} does not match chart dim {field_.dim}")
    raw = field_.coefficients(jet.seed_vector(x))
    return {key: value if isinstance(value, jet.Jet2) else jet.constant(value, field_.dim) for key, value in raw.items()}


def exterior_derivative(field_: FormField, point: Iterable[float]) -> AlternatingTensor:
    """``dF`` at ``point`` from the jet gradients of the coefficients."""

    coeffs = _jet_coefficients(field_, point)
    result = AlternatingTensor.zero(field_.degree + 1, field_.dim)
    for key, value in coeffs.items():
        base = AlternatingTensor(field_.degree, field_.dim, {key: 1.0})
        result = result + wedge(AlternatingTensor.covector(value.grad), base)
    return result


def exterior_derivative_field(field_: FormField) -> FormField:
    """``dF`` as a form field.

    Its coefficient jets carry value and gradient only (the Hessian would need
    third derivatives), which is all :func:`exterior_derivative` reads.
    """

    n = field_.dim

    def coefficients(p: jet.Jet2) -> dict[Index, jet.Jet2]:
        out: dict[Index, jet.Jet2] = {}
        for key, value in field_.coefficients(p).items():
            if not isinstance(value, jet.Jet2):
                continue
            for j in range(n):
                if j in key:
                    continue
                sign = permutation_sign((j,) + key)
                term = jet.Jet2(sign * value.grad[j], sign * value.hess[j], np.zeros((n, n)))
                target = tuple(sorted((j,) + key))
                out[target] = out[target] + term if target in out else term
        return out

    return FormField(field_.degree + 1, n, coefficients)


def exterior_derivative_squared(field_: FormField, point: Iterable[float]) -> AlternatingTensor:
    """``d(dF)`` at ``point``: :func:`exterior_derivative` of :func:`exterior_derivative_field`."""

    return exterior_derivative(exterior_derivative_field(field_), point)


# --- G2 ------------------------------------------------------------------

G2_TERMS: dict[Index, float] = {
    (1, 2, 5): 1.0,
    (3, 4, 5): -1.0,
    (1, 3, 6): 1.0,
    (4, 2, 6): -1.0,
    (1, 4, 7): 1.0,
    (2, 3, 7): -1.0,
    (5, 6, 7): 1.0,
}

# fixed by requiring the standard form to induce the identity metric
_B_NORMALIZATION = -1.0 / 6.0


def g2_three_form() -> AlternatingTensor:
    return AlternatingTensor.from_terms(G2_TERMS, dim=7)


def three_form_bilinear(phi: AlternatingTensor) -> np.ndarray:
    """``B(eᵢ, eⱼ)`` with ``B(u,v)·vol = c·(u⌟φ)∧(v⌟φ)∧φ``."""

    if phi.dim != 7 or phi.degree != 3:
        raise InvalidInputError("metric_from_three_form needs a 3-form on R^7")
    eye = np.eye(7)
    contractions = [interior(eye[i], phi) for i in range(7)]
    top = tuple(range(7))
    b = np.zeros((7, 7))
    for i in range(7):
        for j in range(i, 7):
            form = wedge(wedge(contractions[i], contractions[j]), phi)
            b[i, j] = b[j, i] = _B_NORMALIZATION * float(form.coeffs.get(top, 0.0))
    return b


def metric_from_three_form(phi: AlternatingTensor) -> np.ndarray:
    """Riemannian metric induced by a 3-form in the open orbit."""

    b = three_form_bilinear(phi)
    eig = np.linalg.eigvalsh(b)
    if np.all(eig < 0):
        logger.debug("three-form induces the opposite orientation; flipping sign")
        b = -b
        eig = -eig[::-1]
    if np.min(eig) <= 1e-12 * max(1.0, float(np.max(np.abs(eig)))):
        raise DegenerateFormError(f"three-form is not in the open orbit (eigenvalues {eig})")
    return b / np.linalg.det(b) ** (1.0 / 9.0)
