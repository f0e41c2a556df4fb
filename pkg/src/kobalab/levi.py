"""Complex differential geometry on C^n: Wirtinger gradients, complex
Hessians, Levi forms and tangential frames.

Two routes are provided. ``Jet`` carries (value, d/dz, d^2/dz dzbar) of a
real function through arithmetic and scalar composition, which is exact up
to rounding and is what the bumping machinery relies on near the boundary.
The finite-difference routines work on any callable and serve as the
independent cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGradientError, EvaluationError


@dataclass
class Jet:
    """Second-order jet of a real function at a point of C^n.

    ``grad[j] = du/dz_j`` and ``hess[j, k] = d^2u / dz_j dzbar_k``.
    """

    val: float
    grad: np.ndarray
    hess: np.ndarray

    @classmethod
    def const(cls, c, n):
        return cls(float(c), np.zeros(n, complex), np.zeros((n, n), complex))

    @classmethod
    def re(cls, z, j):
        n = len(z)
        g = np.zeros(n, complex)
        g[j] = 0.5
        return cls(float(z[j].real), g, np.zeros((n, n), complex))

    @classmethod
    def im(cls, z, j):
        n = len(z)
        g = np.zeros(n, complex)
        g[j] = -0.5j
        return cls(float(z[j].imag), g, np.zeros((n, n), complex))

    @classmethod
    def abs2(cls, z, j):
        """``|z_j|^2``."""
        n = len(z)
        g = np.zeros(n, complex)
        g[j] = np.conj(z[j])
        H = np.zeros((n, n), complex)
        H[j, j] = 1.0
        return cls(float(abs(z[j]) ** 2), g, H)

    @classmethod
    def norm2(cls, z, w=None):
        """``|z - w|^2``."""
        d = z if w is None else z - w
        n = len(z)
        return cls(float(np.vdot(d, d).real), np.conj(d).astype(complex), np.eye(n, dtype=complex))

    def apply(self, f0, f1, f2):
        """Compose with a scalar function given its value and two derivatives at ``val``."""
        return Jet(f0, f1 * self.grad, f1 * self.hess + f2 * np.outer(self.grad, self.grad.conj()))

    def exp(self):
        e = math.exp(self.val)
        return self.apply(e, e, e)

    def power(self, p):
        v = self.val
        return self.apply(v ** p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.val + other.val, self.grad + other.grad, self.hess + other.hess)
        return Jet(self.val + other, self.grad, self.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.val, -self.grad, -self.hess)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            cross = np.outer(self.grad, other.grad.conj())
            return Jet(
                self.val * other.val,
                self.val * other.grad + other.val * self.grad,
                self.val * other.hess + other.val * self.hess + cross + cross.conj().T,
            )
        return Jet(self.val * other, self.grad * other, self.hess * other)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / c)

    # derived quantities
    def levi(self, X):
        X = np.asarray(X, complex)
        return float(np.real(X @ self.hess @ X.conj()))

    def deriv(self, X):
        """``X u = sum_j X_j du/dz_j``."""
        return complex(np.dot(np.asarray(X, complex), self.grad))

    def real_gradient_norm(self):
        """Euclidean norm of the real gradient, ``2 |du/dz|``."""
        return 2.0 * float(np.linalg.norm(self.grad))

    def real_gradient(self):
        """Real gradient packed as a complex vector ``u_x + i u_y``."""
        return 2.0 * self.grad.conj()

    def min_eigenvalue(self):
        H = 0.5 * (self.hess + self.hess.conj().T)
        return float(np.linalg.eigvalsh(H)[0])


class Field:
    """Real scalar field on C^n. Subclasses implement ``jet``."""

    def jet(self, z):
        raise NotImplementedError

    def __call__(self, z):
        return self.jet(np.asarray(z, complex)).val


class JetField(Field):
    def __init__(self, fn):
        self._fn = fn

    def jet(self, z):
        return self._fn(np.asarray(z, complex))


def _as_point(z):
    z = np.atleast_1d(np.asarray(z, complex))
    if not np.all(np.isfinite(z)):
        raise EvaluationError("non-finite point")
    return z


def _eval(u, z):
    try:
        v = float(u(z))
    except Exception as exc:  # noqa: BLE001 - any failure at a stencil point
        raise EvaluationError(f"field undefined at stencil point: {exc}") from exc
    if not math.isfinite(v):
        raise EvaluationError("field is not finite at a stencil point")
    return v


def default_step(z):
    return 1e-4 * max(1.0, float(np.linalg.norm(z)))


# -- finite differences ------------------------------------------------------


def _unit(n, k):
    """Real coordinate direction ``k`` of R^{2n} as a complex vector."""
    e = np.zeros(n, complex)
    e[k // 2] = 1.0 if k % 2 == 0 else 1.0j
    return e


def _real_gradient(u, z, h):
    n = len(z)
    out = np.empty(2 * n)
    for k in range(2 * n):
        e = _unit(n, k)
        out[k] = (_eval(u, z + h * e) - _eval(u, z - h * e)) / (2 * h)
    return out


def _real_hessian(u, z, h):
    n = len(z)
    m = 2 * n
    H = np.empty((m, m))
    u0 = _eval(u, z)
    for a in range(m):
        ea = _unit(n, a)
        H[a, a] = (_eval(u, z + h * ea) - 2 * u0 + _eval(u, z - h * ea)) / h ** 2
        for b in range(a + 1, m):
            eb = _unit(n, b)
            val = (_eval(u, z + h * (ea + eb)) - _eval(u, z + h * (ea - eb))
                   - _eval(u, z - h * (ea - eb)) + _eval(u, z - h * (ea + eb))) / (4 * h * h)
            H[a, b] = H[b, a] = val
    return H


def _wirtinger_from_real(g):
    return 0.5 * (g[0::2] - 1j * g[1::2])


def _complex_from_real(H):
    xx = H[0::2, 0::2]
    yy = H[1::2, 1::2]
    xy = H[0::2, 1::2]
    yx = H[1::2, 0::2]
    return 0.25 * ((xx + yy) + 1j * (xy - yx))


def complex_gradient(u, z, step=None, richardson=True):
    """``(du/dz_j)_j`` by central differences in the 2n real coordinates."""
    z = _as_point(z)
    h = default_step(z) if step is None else step
    g = _real_gradient(u, z, h)
    if richardson:
        g = (4 * _real_gradient(u, z, h / 2) - g) / 3
    return _wirtinger_from_real(g)


@dataclass
class ComplexHessian:
    matrix: np.ndarray
    fd_step: float
    truncation_error: float


def complex_hessian(u, z, step=None, richardson=True):
    """Hermitian matrix ``d^2u / dz_j dzbar_k`` by central differences."""
    z = _as_point(z)
    h = default_step(z) if step is None else step
    coarse = _complex_from_real(_real_hessian(u, z, h))
    if richardson:
        fine = _complex_from_real(_real_hessian(u, z, h / 2))
        H = (4 * fine - coarse) / 3
        err = float(np.max(np.abs(H - fine))) if H.size else 0.0
    else:
        H, err = coarse, math.nan
    H = 0.5 * (H + H.conj().T)
    return ComplexHessian(H, h, err)


def hessian_of(u, z, step=None):
    """Analytic Hessian when ``u`` carries jets, finite differences otherwise."""
    z = _as_point(z)
    if isinstance(u, Field):
        H = u.jet(z).hess
        return 0.5 * (H + H.conj().T)
    return complex_hessian(u, z, step).matrix


def gradient_of(u, z, step=None):
    z = _as_point(z)
    if isinstance(u, Field):
        return u.jet(z).grad
    return complex_gradient(u, z, step)


def levi_form(u, z, X, step=None):
    """``sum_jk H_jk X_j conj(X_k)``."""
    X = np.atleast_1d(np.asarray(X, complex))
    H = hessian_of(u, z, step)
    return float(np.real(X @ H @ X.conj()))


def min_levi_eigenvalue(u, z, step=None):
    H = hessian_of(u, z, step)
    return float(np.linalg.eigvalsh(H)[0])


def tangential_basis(rho, z, grad=None):
    """Orthonormal basis of ``{X : sum_j d rho/dz_j X_j = 0}``.

    Each coordinate vector is projected off ``conj(d rho)`` and the
    projections are orthonormalized, keeping the ``n - 1`` best conditioned.
    """
    z = _as_point(z)
    a = gradient_of(rho, z) if grad is None else np.asarray(grad, complex)
    norm = np.linalg.norm(a)
    if norm < 1e-8:
        raise DegenerateGradientError("d rho vanishes; no tangent space", norm=norm)
    b = a.conj() / norm
    n = len(z)
    cands = [np.eye(n, dtype=complex)[k] - b * np.vdot(b, np.eye(n)[k]) for k in range(n)]
    cands.sort(key=lambda v: -np.linalg.norm(v))
    basis = []
    for v in cands:
        for e in basis:
            v = v - e * np.vdot(e, v)
        nv = np.linalg.norm(v)
        if nv > 1e-8 and len(basis) < n - 1:
            basis.append(v / nv)
    return basis
