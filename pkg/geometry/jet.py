"""
Second-order forward-mode automatic differentiation.

A ``Jet2`` carries a value together with its gradient and Hessian with
respect to a fixed set of ``d`` chart variables. Values may be scalars or
arrays; array-valued jets store ``grad`` with a trailing axis of length ``d``
and ``hess`` with two trailing axes. Every curvature, shape-operator and
tangent-frame computation in the package is built on this module.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from geometry.errors import InvalidInputError, JetDomainError, LinearSolveError

EPS_DOM = 1e-12


def _outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., :, None] * b[..., None, :]


def _sym(h: np.ndarray) -> np.ndarray:
    return 0.5 * (h + np.swapaxes(h, -1, -2))


@dataclass(frozen=True, eq=False)
class Jet2:
    """Value, gradient and Hessian of a (possibly array-valued) quantity."""

    value: Any
    grad: np.ndarray
    hess: np.ndarray = field(repr=False)

    # numpy defers mixed arithmetic to the Jet2 reflected operators
    __array_ufunc__ = None

    def __post_init__(self) -> None:
        value = np.asarray(self.value, dtype=float)
        grad = np.asarray(self.grad, dtype=float)
        hess = np.asarray(self.hess, dtype=float)
        if grad.shape != value.shape + grad.shape[-1:] or hess.shape != grad.shape + grad.shape[-1:]:
            raise InvalidInputError(
                f"inconsistent jet shapes value={value.shape} grad={grad.shape} hess={hess.shape}"
            )
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "grad", grad)
        object.__setattr__(self, "hess", _sym(hess))

    @property
    def dim(self) -> int:
        return self.grad.shape[-1]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def __len__(self) -> int:
        return self.value.shape[0]

    def __getitem__(self, index: Any) -> "Jet2":
        if not isinstance(index, tuple):
            index = (index,)
        if any(i is Ellipsis for i in index):
            raise InvalidInputError("ellipsis indexing is not supported on jets")
        return Jet2(self.value[index], self.grad[index], self.hess[index])

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __float__(self) -> float:
        return float(self.value)

    def _lift(self, other: Any) -> "Jet2":
        if isinstance(other, Jet2):
            if other.dim != self.dim:
                raise InvalidInputError(
                    f"mixing jet contexts of dimension {self.dim} and {other.dim}"
                )
            return other
        return constant(other, self.dim)

    def __neg__(self) -> "Jet2":
        return Jet2(-self.value, -self.grad, -self.hess)

    def __add__(self, other: Any) -> "Jet2":
        if isinstance(other, ComplexJet2):
            return NotImplemented
        o = self._lift(other)
        return Jet2(self.value + o.value, self.grad + o.grad, self.hess + o.hess)

    __radd__ = __add__

    def __sub__(self, other: Any) -> "Jet2":
        if isinstance(other, ComplexJet2):
            return NotImplemented
        return self + (-self._lift(other))

    def __rsub__(self, other: Any) -> "Jet2":
        return self._lift(other) - self

    def __mul__(self, other: Any) -> "Jet2":
        if isinstance(other, ComplexJet2):
            return NotImplemented
        if not isinstance(other, Jet2):
            c = np.asarray(other, dtype=float)
            return Jet2(self.value * c, self.grad * c[..., None], self.hess * c[..., None, None])
        o = self._lift(other)
        a0, a1, a2 = self.value, self.grad, self.hess
        b0, b1, b2 = o.value, o.grad, o.hess
        return Jet2(
            a0 * b0,
            a0[..., None] * b1 + b0[..., None] * a1,
            a0[..., None, None] * b2 + b0[..., None, None] * a2 + _outer(a1, b1) + _outer(b1, a1),
        )

    __rmul__ = __mul__

    def reciprocal(self, eps_dom: float = EPS_DOM) -> "Jet2":
        v = self.value
        if np.any(np.abs(v) <= eps_dom):
            raise JetDomainError("division by a near-zero jet", float(np.min(np.abs(v))))
        return _chain(self, 1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def __truediv__(self, other: Any) -> "Jet2":
        if isinstance(other, ComplexJet2):
            return NotImplemented
        if not isinstance(other, Jet2):
            c = np.asarray(other, dtype=float)
            if np.any(np.abs(c) <= EPS_DOM):
                raise JetDomainError("division by a near-zero constant", float(np.min(np.abs(c))))
            return self * (1.0 / c)
        return self * self._lift(other).reciprocal()

    def __rtruediv__(self, other: Any) -> "Jet2":
        return self.reciprocal() * other

    def __pow__(self, exponent: float) -> "Jet2":
        return power(self, exponent)

    def sum(self, axis: int | None = None) -> "Jet2":
        """Sum over value axes (all of them when ``axis`` is None)."""
        if axis is None:
            axes = tuple(range(self.value.ndim))
        else:
            axes = (axis % max(self.value.ndim, 1),)
        return Jet2(self.value.sum(axis=axes), self.grad.sum(axis=axes), self.hess.sum(axis=axes))

    @property
    def T(self) -> "Jet2":
        if self.value.ndim != 2:
            raise InvalidInputError("transpose needs a matrix-valued jet")
        return Jet2(self.value.T, np.swapaxes(self.grad, 0, 1), np.swapaxes(self.hess, 0, 1))

    def reshape(self, *shape: int) -> "Jet2":
        d = self.dim
        return Jet2(
            self.value.reshape(shape),
            self.grad.reshape(shape + (d,)),
            self.hess.reshape(shape + (d, d)),
        )

    def transpose(self, *axes: int) -> "Jet2":
        """Permute value axes; derivative axes stay last."""
        n = self.value.ndim
        if sorted(axes) != list(range(n)):
            raise InvalidInputError(f"bad axis permutation {axes} for a rank-{n} jet")
        return Jet2(
            self.value.transpose(axes),
            self.grad.transpose(axes + (n,)),
            self.hess.transpose(axes + (n, n + 1)),
        )


def embed(block: Jet2, offset: tuple[int, int], shape: tuple[int, int]) -> Jet2:
    """Place a matrix jet inside a zero matrix jet of ``shape`` at ``offset``."""

    r0, c0 = offset
    rows, cols = block.shape
    d = block.dim
    value = np.zeros(shape)
    grad = np.zeros(shape + (d,))
    hess = np.zeros(shape + (d, d))
    value[r0 : r0 + rows, c0 : c0 + cols] = block.value
    grad[r0 : r0 + rows, c0 : c0 + cols] = block.grad
    hess[r0 : r0 + rows, c0 : c0 + cols] = block.hess
    return Jet2(value, grad, hess)


def _chain(x: Jet2, f0: np.ndarray, f1: np.ndarray, f2: np.ndarray) -> Jet2:
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    return Jet2(
        f0,
        f1[..., None] * x.grad,
        f1[..., None, None] * x.hess + f2[..., None, None] * _outer(x.grad, x.grad),
    )


def constant(value: Any, dim: int) -> Jet2:
    v = np.asarray(value, dtype=float)
    return Jet2(v, np.zeros(v.shape + (dim,)), np.zeros(v.shape + (dim, dim)))


def seed(coords: Sequence[float]) -> list[Jet2]:
    """Return one scalar jet per chart coordinate, seeded along its own axis."""

    point = np.asarray(coords, dtype=float).ravel()
    if point.size == 0:
        raise InvalidInputError("cannot seed an empty coordinate vector")
    d = point.size
    eye = np.eye(d)
    return [Jet2(point[i], eye[i], np.zeros((d, d))) for i in range(d)]


def seed_vector(coords: Sequence[float]) -> Jet2:
    """Vector-valued variant of :func:`seed` (a single jet of shape ``(d,)``)."""

    point = np.asarray(coords, dtype=float).ravel()
    if point.size == 0:
        raise InvalidInputError("cannot seed an empty coordinate vector")
    d = point.size
    return Jet2(point, np.eye(d), np.zeros((d, d, d)))


def stack(items: Sequence[Any], dim: int | None = None) -> Jet2:
    """Stack jets (or constants) along a new leading axis."""

    if dim is None:
        dims = {item.dim for item in items if isinstance(item, Jet2)}
        if len(dims) != 1:
            raise InvalidInputError("stack needs exactly one jet dimension among its items")
        dim = dims.pop()
    lifted = [item if isinstance(item, Jet2) else constant(item, dim) for item in items]
    return Jet2(
        np.stack([j.value for j in lifted]),
        np.stack([j.grad for j in lifted]),
        np.stack([j.hess for j in lifted]),
    )


# --- elementary functions -------------------------------------------------


def power(x: Any, exponent: float, eps_dom: float = EPS_DOM) -> Any:
    if not isinstance(x, Jet2):
        return np.power(x, exponent)
    v = x.value
    p = float(exponent)
    if p.is_integer() and p >= 0:
        n = int(p)
        f0 = v**n
        f1 = n * v ** (n - 1) if n >= 1 else np.zeros_like(v)
        f2 = n * (n - 1) * v ** (n - 2) if n >= 2 else np.zeros_like(v)
        return _chain(x, f0, f1, f2)
    if p.is_integer():
        if np.any(np.abs(v) <= eps_dom):
            raise JetDomainError("negative power of a near-zero jet", float(np.min(np.abs(v))))
    elif np.any(v <= eps_dom):
        raise JetDomainError("fractional power of a non-positive jet", float(np.min(v)))
    return _chain(x, v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))


def sqrt(x: Any, eps_dom: float = EPS_DOM) -> Any:
    if not isinstance(x, Jet2):
        return np.sqrt(x)
    if np.any(x.value <= eps_dom):
        raise JetDomainError("square root of a non-positive jet", float(np.min(x.value)))
    s = np.sqrt(x.value)
    return _chain(x, s, 0.5 / s, -0.25 / (s * x.value))


def exp(x: Any) -> Any:
    if not isinstance(x, Jet2):
        return np.exp(x)
    e = np.exp(x.value)
    return _chain(x, e, e, e)


def log(x: Any, eps_dom: float = EPS_DOM) -> Any:
    if not isinstance(x, Jet2):
        return np.log(x)
    if np.any(x.value <= eps_dom):
        raise JetDomainError("logarithm of a non-positive jet", float(np.min(x.value)))
    v = x.value
    return _chain(x, np.log(v), 1.0 / v, -1.0 / v**2)


def sin(x: Any) -> Any:
    if not isinstance(x, Jet2):
        return np.sin(x)
    s, c = np.sin(x.value), np.cos(x.value)
    return _chain(x, s, c, -s)


def cos(x: Any) -> Any:
    if not isinstance(x, Jet2):
        return np.cos(x)
    s, c = np.sin(x.value), np.cos(x.value)
    return _chain(x, c, -s, -c)


def sinh(x: Any) -> Any:
    if not isinstance(x, Jet2):
        return np.sinh(x)
    s, c = np.sinh(x.value), np.cosh(x.value)
    return _chain(x, s, c, s)


def cosh(x: Any) -> Any:
    if not isinstance(x, Jet2):
        return np.cosh(x)
    s, c = np.sinh(x.value), np.cosh(x.value)
    return _chain(x, c, s, c)


def tan(x: Any) -> Any:
    if not isinstance(x, Jet2):
        return np.tan(x)
    t = np.tan(x.value)
    sec2 = 1.0 + t**2
    return _chain(x, t, sec2, 2.0 * t * sec2)


def tanh(x: Any) -> Any:
    if not isinstance(x, Jet2):
        return np.tanh(x)
    t = np.tanh(x.value)
    sech2 = 1.0 - t**2
    return _chain(x, t, sech2, -2.0 * t * sech2)


def arctan(x: Any) -> Any:
    if not isinstance(x, Jet2):
        return np.arctan(x)
    v = x.value
    return _chain(x, np.arctan(v), 1.0 / (1.0 + v**2), -2.0 * v / (1.0 + v**2) ** 2)


# --- tensor algebra on jets ------------------------------------------------


def _parts(x: Any) -> tuple[np.ndarray, np.ndarray | None, np.ndarray | None]:
    if isinstance(x, Jet2):
        return x.value, x.grad, x.hess
    return np.asarray(x, dtype=float), None, None


def einsum(subscripts: str, a: Any, b: Any) -> Any:
    """Two-operand ``numpy.einsum`` with the product rule applied to jets."""

    lhs, out = subscripts.replace(" ", "").split("->")
    sa, sb = lhs.split(",")
    spare = [c for c in string.ascii_letters if c not in subscripts]
    y, z = spare[0], spare[1]
    a0, a1, a2 = _parts(a)
    b0, b1, b2 = _parts(b)
    if a1 is None and b1 is None:
        return np.einsum(subscripts, a0, b0)
    d = (a1 if a1 is not None else b1).shape[-1]
    value = np.einsum(f"{sa},{sb}->{out}", a0, b0)
    grad = np.zeros(value.shape + (d,))
    hess = np.zeros(value.shape + (d, d))
    if a1 is not None:
        grad = grad + np.einsum(f"{sa}{y},{sb}->{out}{y}", a1, b0)
        hess = hess + np.einsum(f"{sa}{y}{z},{sb}->{out}{y}{z}", a2, b0)
    if b1 is not None:
        grad = grad + np.einsum(f"{sa},{sb}{y}->{out}{y}", a0, b1)
        hess = hess + np.einsum(f"{sa},{sb}{y}{z}->{out}{y}{z}", a0, b2)
    if a1 is not None and b1 is not None:
        cross = np.einsum(f"{sa}{y},{sb}{z}->{out}{y}{z}", a1, b1)
        hess = hess + cross + np.swapaxes(cross, -1, -2)
    return Jet2(value, grad, hess)


def inv(m: Jet2) -> Jet2:
    """Inverse of a square matrix-valued jet."""

    try:
        g = np.linalg.inv(m.value)
    except np.linalg.LinAlgError as exc:
        raise LinearSolveError("singular matrix jet", float("inf")) from exc
    a = np.einsum("ab,bck->ack", g, m.grad)
    grad = -np.einsum("ack,cd->adk", a, g)
    two = np.einsum("abk,bcl,cd->adkl", a, a, g)
    hess = two + np.swapaxes(two, -1, -2) - np.einsum("ab,bckl,cd->adkl", g, m.hess, g)
    return Jet2(g, grad, hess)


def det(m: Jet2) -> Jet2:
    """Determinant of a square matrix-valued jet."""

    d0 = float(np.linalg.det(m.value))
    if abs(d0) <= EPS_DOM:
        raise JetDomainError("determinant of a singular matrix jet", d0)
    g = np.linalg.inv(m.value)
    a = np.einsum("ab,bck->ack", g, m.grad)
    t = np.einsum("aak->k", a)
    tr2 = np.einsum("abk,bal->kl", a, a)
    tr3 = np.einsum("ab,bakl->kl", g, m.hess)
    return Jet2(d0, d0 * t, d0 * (np.outer(t, t) - tr2 + tr3))


# --- complex jets as real/imaginary pairs ----------------------------------


@dataclass(frozen=True, eq=False)
class ComplexJet2:
    """A complex quantity modelled as a pair of real jets."""

    re: Jet2
    im: Jet2

    __array_ufunc__ = None

    @property
    def dim(self) -> int:
        return self.re.dim

    @property
    def value(self) -> np.ndarray:
        return self.re.value + 1j * self.im.value

    @property
    def grad(self) -> np.ndarray:
        return self.re.grad + 1j * self.im.grad

    @property
    def hess(self) -> np.ndarray:
        return self.re.hess + 1j * self.im.hess

    def __len__(self) -> int:
        return len(self.re)

    def __getitem__(self, index: Any) -> "ComplexJet2":
        return ComplexJet2(self.re[index], self.im[index])

    def _lift(self, other: Any) -> "ComplexJet2":
        if isinstance(other, ComplexJet2):
            return other
        if isinstance(other, Jet2):
            return ComplexJet2(other, constant(np.zeros(other.shape), other.dim))
        c = np.asarray(other, dtype=complex)
        return ComplexJet2(constant(c.real, self.dim), constant(c.imag, self.dim))

    def conj(self) -> "ComplexJet2":
        return ComplexJet2(self.re, -self.im)

    def __neg__(self) -> "ComplexJet2":
        return ComplexJet2(-self.re, -self.im)

    def __add__(self, other: Any) -> "ComplexJet2":
        o = self._lift(other)
        return ComplexJet2(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other: Any) -> "ComplexJet2":
        return self + (-self._lift(other))

    def __rsub__(self, other: Any) -> "ComplexJet2":
        return self._lift(other) - self

    def __mul__(self, other: Any) -> "ComplexJet2":
        o = self._lift(other)
        return ComplexJet2(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def abs2(self) -> Jet2:
        return self.re * self.re + self.im * self.im

    def __truediv__(self, other: Any) -> "ComplexJet2":
        o = self._lift(other)
        return self * o.conj() * o.abs2().reciprocal()

    def __rtruediv__(self, other: Any) -> "ComplexJet2":
        return self._lift(other) / self

    def sum(self, axis: int | None = None) -> "ComplexJet2":
        return ComplexJet2(self.re.sum(axis), self.im.sum(axis))


def complex_constant(value: Any, dim: int) -> ComplexJet2:
    c = np.asarray(value, dtype=complex)
    return ComplexJet2(constant(c.real, dim), constant(c.imag, dim))


def complex_stack(items: Sequence[ComplexJet2]) -> ComplexJet2:
    return ComplexJet2(stack([z.re for z in items]), stack([z.im for z in items]))


def holomorphic(
    z: ComplexJet2,
    f: Callable[[np.ndarray], np.ndarray],
    df: Callable[[np.ndarray], np.ndarray],
    d2f: Callable[[np.ndarray], np.ndarray],
) -> ComplexJet2:
    """Apply a holomorphic function given its first two complex derivatives."""

    w = z.value
    f0, f1, f2 = f(w), df(w), d2f(w)
    g = z.grad
    grad = f1[..., None] * g
    hess = f1[..., None, None] * z.hess + f2[..., None, None] * _outer(g, g)
    return ComplexJet2(Jet2(f0.real, grad.real, hess.real), Jet2(f0.imag, grad.imag, hess.imag))


def csqrt(z: ComplexJet2, eps_dom: float = EPS_DOM) -> ComplexJet2:
    """Principal-branch square root; the argument must stay off the origin."""

    if np.any(np.abs(z.value) <= eps_dom):
        raise JetDomainError("complex square root at the origin", float(np.min(np.abs(z.value))))
    return holomorphic(
        z,
        np.sqrt,
        lambda w: 0.5 / np.sqrt(w),
        lambda w: -0.25 / (w * np.sqrt(w)),
    )


def cexp(z: ComplexJet2) -> ComplexJet2:
    return holomorphic(z, np.exp, np.exp, np.exp)


def ccosh(z: ComplexJet2) -> ComplexJet2:
    return holomorphic(z, np.cosh, np.sinh, np.cosh)


def csinh(z: ComplexJet2) -> ComplexJet2:
    return holomorphic(z, np.sinh, np.cosh, np.sinh)


# --- finite-difference self-oracle -----------------------------------------


@dataclass(frozen=True)
class DiscrepancyReport:
    """Jet derivatives against Richardson-extrapolated central differences."""

    grad_error: float
    hess_error: float
    scale: float

    @property
    def max_error(self) -> float:
        return max(self.grad_error, self.hess_error)

    @property
    def relative_error(self) -> float:
        return self.max_error / max(1.0, self.scale)


def _central(f: Callable[[Any], Any], x: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    d = x.size
    eye = np.eye(d)
    f0 = float(f(x))
    grad = np.zeros(d)
    hess = np.zeros((d, d))
    for i in range(d):
        fp, fm = float(f(x + h * eye[i])), float(f(x - h * eye[i]))
        grad[i] = (fp - fm) / (2 * h)
        hess[i, i] = (fp - 2 * f0 + fm) / h**2
        for j in range(i + 1, d):
            fpp = float(f(x + h * (eye[i] + eye[j])))
            fpm = float(f(x + h * (eye[i] - eye[j])))
            fmp = float(f(x - h * (eye[i] - eye[j])))
            fmm = float(f(x - h * (eye[i] + eye[j])))
            hess[i, j] = hess[j, i] = (fpp - fpm - fmp + fmm) / (4 * h**2)
    return grad, hess


def fd_check(f: Callable[[Any], Any], point: Sequence[float], h: float = 1e-3) -> DiscrepancyReport:
    """Compare jet derivatives of ``f`` with central differences (steps h, h/2).

    ``f`` receives either a seeded vector jet or a plain float vector and must
    index it as ``x[i]``.
    """

    if h <= 0:
        raise InvalidInputError("finite-difference step must be positive")
    x = np.asarray(point, dtype=float).ravel()
    jet = f(seed_vector(x))
    g1, h1 = _central(f, x, h)
    g2, h2 = _central(f, x, h / 2)
    grad_fd = (4 * g2 - g1) / 3
    hess_fd = (4 * h2 - h1) / 3
    scale = float(max(np.max(np.abs(jet.grad)), np.max(np.abs(jet.hess)), abs(float(jet.value))))
    return DiscrepancyReport(
        grad_error=float(np.max(np.abs(jet.grad - grad_fd))),
        hess_error=float(np.max(np.abs(jet.hess - hess_fd))),
        scale=scale,
    )
