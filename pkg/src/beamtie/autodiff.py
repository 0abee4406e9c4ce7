"""Forward-mode automatic differentiation with dense first and second order.

A :class:`Dual2` carries a scalar value, the gradient with respect to a fixed
set of ``n`` active directions, and (optionally) the dense symmetric Hessian.
The number of active directions is fixed per evaluation context, which keeps
the storage small: coupling kernels only ever touch a few dozen unknowns at
a time.
"""

from __future__ import annotations

import numpy as np

__all__ = ["Dual2", "seed", "value_of", "dot", "cross", "norm", "normalize"]


class Dual2:
    """Scalar with first (and optionally second) derivatives.

    Parameters
    ----------
    value : float
        Scalar value.
    grad : ndarray, shape (n,)
        First partials with respect to the active directions.
    hess : ndarray, shape (n, n), or None
        Symmetric second partials.  ``None`` means the context is
        first-order only and Hessian propagation is skipped.
    """

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value, grad, hess=None):
        self.value = float(value)
        self.grad = grad
        self.hess = hess

    # -- helpers -----------------------------------------------------------

    def _like(self, value, grad, hess):
        return Dual2(value, grad, hess)

    def __repr__(self):
        return f"Dual2({self.value!r}, grad={self.grad!r})"

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if isinstance(other, Dual2):
            h = None
            if self.hess is not None:
                h = self.hess + other.hess
            return Dual2(self.value + other.value, self.grad + other.grad, h)
        return Dual2(self.value + other, self.grad, self.hess)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if isinstance(other, Dual2):
            h = None
            if self.hess is not None:
                h = self.hess - other.hess
            return Dual2(self.value - other.value, self.grad - other.grad, h)
        return Dual2(self.value - other, self.grad, self.hess)

    def __rsub__(self, other):
        h = None if self.hess is None else -self.hess
        return Dual2(other - self.value, -self.grad, h)

    def __neg__(self):
        h = None if self.hess is None else -self.hess
        return Dual2(-self.value, -self.grad, h)

    def __mul__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if isinstance(other, Dual2):
            h = None
            if self.hess is not None:
                gg = np.outer(self.grad, other.grad)
                h = self.hess * other.value + other.hess * self.value + gg + gg.T
            return Dual2(
                self.value * other.value,
                self.grad * other.value + other.grad * self.value,
                h,
            )
        h = None if self.hess is None else self.hess * other
        return Dual2(self.value * other, self.grad * other, h)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if isinstance(other, Dual2):
            return self * other._reciprocal()
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return self._reciprocal() * other

    def _reciprocal(self):
        v = 1.0 / self.value
        return self._chain(v, -v * v, 2.0 * v * v * v)

    def __pow__(self, p):
        if p == 2:
            return self * self
        v = self.value
        return self._chain(v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))

    # -- elementary functions ----------------------------------------------

    def _chain(self, f, fp, fpp):
        """Apply a scalar function with value f, first fp, second fpp."""
        h = None
        if self.hess is not None:
            h = fp * self.hess + fpp * np.outer(self.grad, self.grad)
        return Dual2(f, fp * self.grad, h)

    def sqrt(self):
        s = np.sqrt(self.value)
        return self._chain(s, 0.5 / s, -0.25 / (s * self.value))

    def sin(self):
        s, c = np.sin(self.value), np.cos(self.value)
        return self._chain(s, c, -s)

    def cos(self):
        s, c = np.sin(self.value), np.cos(self.value)
        return self._chain(c, -s, -c)


def seed(values, second_order=True):
    """Seed ``n`` active directions: the i-th output has grad = e_i, hess = 0."""
    values = np.asarray(values, dtype=float)
    n = values.size
    out = []
    for i, v in enumerate(values):
        g = np.zeros(n)
        g[i] = 1.0
        h = np.zeros((n, n)) if second_order else None
        out.append(Dual2(v, g, h))
    return out


def value_of(x):
    """Plain float value of a scalar that may be a Dual2."""
    return x.value if isinstance(x, Dual2) else float(x)


def atan2(y, x):
    """Two-argument arctangent for Dual2 and/or float operands."""
    if not isinstance(y, Dual2) and not isinstance(x, Dual2):
        return np.arctan2(y, x)
    yv = value_of(y)
    xv = value_of(x)
    r2 = xv * xv + yv * yv
    z = np.arctan2(yv, xv)
    zx, zy = -yv / r2, xv / r2
    zxx = 2.0 * xv * yv / r2**2
    zyy = -zxx
    zxy = (yv * yv - xv * xv) / r2**2

    if isinstance(y, Dual2):
        gy, hy = y.grad, y.hess
    else:
        gy, hy = None, None
    if isinstance(x, Dual2):
        gx, hx = x.grad, x.hess
    else:
        gx, hx = None, None

    n = gy.shape[0] if gy is not None else gx.shape[0]
    zero = np.zeros(n)
    gy = zero if gy is None else gy
    gx = zero if gx is None else gx
    grad = zy * gy + zx * gx

    ref_h = hy if hy is not None else hx
    if ref_h is None:
        return Dual2(z, grad, None)
    zh = np.zeros((n, n))
    hy = zh if hy is None else hy
    hx = zh if hx is None else hx
    cross_term = np.outer(gy, gx)
    hess = (
        zy * hy
        + zx * hx
        + zyy * np.outer(gy, gy)
        + zxx * np.outer(gx, gx)
        + zxy * (cross_term + cross_term.T)
    )
    return Dual2(z, grad, hess)


def sqrt(x):
    return x.sqrt() if isinstance(x, Dual2) else np.sqrt(x)


def sin(x):
    return x.sin() if isinstance(x, Dual2) else np.sin(x)


def cos(x):
    return x.cos() if isinstance(x, Dual2) else np.cos(x)


# -- small-vector helpers (3-vectors as length-3 lists / object arrays) ------


def dot(u, v):
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def cross(u, v):
    return np.array(
        [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ],
        dtype=object,
    )


def norm(u):
    return sqrt(dot(u, u))


def normalize(u):
    n = norm(u)
    return np.array([u[0] / n, u[1] / n, u[2] / n], dtype=object)
