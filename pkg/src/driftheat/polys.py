"""Dense multivariate polynomials with exact derivatives.

Used to build analytic jets for the identity checks and to convert Hermite
expansions to the monomial basis.
"""

from __future__ import annotations

import string

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.signal import convolve


class Poly:
    """Polynomial in ``n`` variables stored as a coefficient tensor.

    ``coef[i, j, ...]`` multiplies ``y0**i * y1**j * ...``.
    """

    def __init__(self, coef):
        coef = np.asarray(coef, dtype=float)
        if coef.ndim == 0:
            raise ValueError("coefficient tensor needs at least one axis")
        self.coef = coef

    @property
    def n(self) -> int:
        return self.coef.ndim

    @classmethod
    def constant(cls, value, n):
        return cls(np.full((1,) * n, float(value)))

    @classmethod
    def variable(cls, axis, n):
        shape = [1] * n
        shape[axis] = 2
        c = np.zeros(shape)
        c[tuple(1 if i == axis else 0 for i in range(n))] = 1.0
        return cls(c)

    @classmethod
    def random(cls, rng, n, degree):
        """Coefficients uniform in [-1, 1] on all monomials of total degree <= ``degree``."""
        c = rng.uniform(-1.0, 1.0, size=(degree + 1,) * n)
        idx = np.indices(c.shape).sum(axis=0)
        c[idx > degree] = 0.0
        return cls(c)

    def _padded(self, shape):
        out = np.zeros(shape)
        out[tuple(slice(0, s) for s in self.coef.shape)] = self.coef
        return out

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.constant(other, self.n)
        shape = tuple(max(a, b) for a, b in zip(self.coef.shape, other.coef.shape))
        return Poly(self._padded(shape) + other._padded(shape))

    __radd__ = __add__

    def __neg__(self):
        return Poly(-self.coef)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Poly):
            return Poly(convolve(self.coef, other.coef, method="direct"))
        return Poly(self.coef * float(other))

    __rmul__ = __mul__

    def deriv(self, axis: int) -> "Poly":
        if self.coef.shape[axis] == 1:
            return Poly(np.zeros_like(self.coef))
        return Poly(P.polyder(self.coef, axis=axis))

    def laplacian(self) -> "Poly":
        out = Poly.constant(0.0, self.n)
        for i in range(self.n):
            out = out + self.deriv(i).deriv(i)
        return out

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        letters = string.ascii_letters
        ops = [self.coef]
        sub_in = [letters[: self.n]]
        for i in range(self.n):
            deg = self.coef.shape[i]
            powers = pts[:, i][None, :] ** np.arange(deg)[:, None]
            ops.append(powers)
            sub_in.append(letters[i] + "Z")
        out = np.einsum(",".join(sub_in) + "->Z", *ops)
        return out[0] if single else out

    def grad_at(self, point) -> np.ndarray:
        return np.array([self.deriv(i)(point) for i in range(self.n)])

    def hess_at(self, point) -> np.ndarray:
        n = self.n
        out = np.empty((n, n))
        for i in range(n):
            di = self.deriv(i)
            for j in range(i, n):
                out[i, j] = out[j, i] = di.deriv(j)(point)
        return out

    def third_at(self, point) -> np.ndarray:
        n = self.n
        out = np.empty((n, n, n))
        for i in range(n):
            for j in range(n):
                dij = self.deriv(i).deriv(j)
                for k in range(n):
                    out[i, j, k] = dij.deriv(k)(point)
        return out
