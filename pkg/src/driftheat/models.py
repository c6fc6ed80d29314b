"""Closed-form normalized shrinking solitons.

Two models are provided:

* ``EUCLIDEAN``: the Gaussian shrinker on R^n with ``f(y) = |y|^2 / 4``.
* ``CYLINDER``: ``S^{n-1}(sqrt(2(n-2))) x R`` with ``f(theta, z) = z^2/4 + (n-1)/2``.

Both are normalized so that ``Ric + Hess f = g/2`` and

    R + Lap f = n/2,    R + |df|^2 = f,    Lap f - |df|^2 = n/2 - f

hold identically.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError

SOLITON_CONSTANT = 0.5


class Kind(enum.Enum):
    EUCLIDEAN = "euclidean"
    CYLINDER = "cylinder"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {
            "euclidean": cls.EUCLIDEAN,
            "euclideangaussian": cls.EUCLIDEAN,
            "gaussian": cls.EUCLIDEAN,
            "cylinder": cls.CYLINDER,
            "roundcylinder": cls.CYLINDER,
        }
        try:
            return aliases[key.replace("_", "").replace("-", "")]
        except KeyError:
            raise ConfigurationError(f"unknown soliton model kind {value!r}") from None


@dataclass(frozen=True)
class SolitonModel:
    """A normalized gradient shrinking soliton.

    ``f_offset`` exists only to build negative controls (see
    :func:`perturb_potential`); models from :func:`make_model` always have 0.
    """

    kind: Kind
    n: int
    f_offset: float = 0.0

    @property
    def sphere_dim(self) -> int:
        return self.n - 1 if self.kind is Kind.CYLINDER else 0

    @property
    def sphere_radius(self) -> float:
        if self.kind is not Kind.CYLINDER:
            raise ConfigurationError("only the cylinder has a sphere factor")
        return math.sqrt(2.0 * (self.n - 2))

    @property
    def potential_constant(self) -> float:
        """Additive constant in ``f``, fixed by the normalization."""
        if self.kind is Kind.CYLINDER:
            return (self.n - 1) / 2.0
        return 0.0

    @property
    def scalar_curvature(self) -> float:
        """R, constant on both models."""
        if self.kind is Kind.CYLINDER:
            m = self.n - 1
            return m * (m - 1) / self.sphere_radius**2
        return 0.0

    def sphere_eigenvalue(self, l: int) -> float:
        """Eigenvalue of ``-Lap`` on the sphere factor for harmonics of degree ``l``."""
        if self.kind is not Kind.CYLINDER:
            raise ConfigurationError("only the cylinder has a sphere factor")
        m = self.n - 1
        return l * (l + m - 1) / self.sphere_radius**2

    def potential(self, points) -> np.ndarray:
        """Vectorized ``f`` over an ``(..., n)`` array of chart points."""
        pts = np.asarray(points, dtype=float)
        if self.kind is Kind.CYLINDER:
            z = pts[..., -1]
            return z**2 / 4.0 + self.potential_constant + self.f_offset
        return np.sum(pts**2, axis=-1) / 4.0 + self.f_offset


@dataclass(frozen=True)
class PointProbe:
    """Jet of ``f`` and the scalar curvature at one point.

    For the cylinder the gradient and Hessian are expressed in an orthonormal
    frame whose last vector is ``d/dz``.
    """

    point: np.ndarray
    f_value: float
    f_gradient: np.ndarray
    f_hessian: np.ndarray
    f_laplacian: float
    R_value: float

    @property
    def grad_norm_sq(self) -> float:
        return float(self.f_gradient @ self.f_gradient)


@dataclass(frozen=True)
class IdentityReport:
    """Max absolute residuals of the three soliton identities."""

    n_points: int
    scalar_laplacian: float  # R + Lap f - n/2
    scalar_gradient: float  # R + |df|^2 - f
    laplacian_gradient: float  # Lap f - |df|^2 - (n/2 - f)
    min_R: float

    @property
    def max_residual(self) -> float:
        return max(self.scalar_laplacian, self.scalar_gradient, self.laplacian_gradient)


def make_model(kind, n: int) -> SolitonModel:
    """Build a normalized model.

    Raises
    ------
    ConfigurationError
        If ``n`` is out of range for the model kind.
    """
    kind = Kind.parse(kind)
    if isinstance(n, bool) or int(n) != n:
        raise ConfigurationError(f"dimension must be an integer, got {n!r}")
    n = int(n)
    if kind is Kind.EUCLIDEAN and n < 1:
        raise ConfigurationError("EuclideanGaussian needs n >= 1")
    if kind is Kind.CYLINDER and n < 3:
        raise ConfigurationError("RoundCylinder needs n >= 3 (sphere factor of dimension >= 2)")
    return SolitonModel(kind, n)


def perturb_potential(model: SolitonModel, shift: float) -> SolitonModel:
    """Return a copy of ``model`` whose potential is shifted by ``shift``.

    The result is *not* normalized; it is meant for negative controls of
    :func:`check_identities`.
    """
    return SolitonModel(model.kind, model.n, model.f_offset + float(shift))


def probe(model: SolitonModel, point) -> PointProbe:
    """Exact jet of ``f`` and ``R`` at a chart point of length ``n``."""
    y = np.asarray(point, dtype=float).reshape(-1)
    if y.shape[0] != model.n:
        raise ConfigurationError(f"point has length {y.shape[0]}, model dimension is {model.n}")
    n = model.n
    if model.kind is Kind.EUCLIDEAN:
        grad = y / 2.0
        hess = np.eye(n) / 2.0
    else:
        z = y[-1]
        grad = np.zeros(n)
        grad[-1] = z / 2.0
        hess = np.zeros((n, n))
        hess[-1, -1] = 0.5
    return PointProbe(
        point=y,
        f_value=float(model.potential(y)),
        f_gradient=grad,
        f_hessian=hess,
        f_laplacian=float(np.trace(hess)),
        R_value=model.scalar_curvature,
    )


def check_identities(model: SolitonModel, points) -> IdentityReport:
    """Evaluate the three soliton identities at every point."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 0:
        raise ConfigurationError("need at least one point")
    half_n = model.n / 2.0
    r1 = r2 = r3 = 0.0
    min_R = math.inf
    for y in pts:
        p = probe(model, y)
        g2 = p.grad_norm_sq
        r1 = max(r1, abs(p.R_value + p.f_laplacian - half_n))
        r2 = max(r2, abs(p.R_value + g2 - p.f_value))
        r3 = max(r3, abs(p.f_laplacian - g2 - (half_n - p.f_value)))
        min_R = min(min_R, p.R_value)
    return IdentityReport(pts.shape[0], r1, r2, r3, min_R)


def rescaled_potential(model: SolitonModel, tau: float, x) -> np.ndarray:
    """``(-tau) * f((-tau)^{-1/2} x)``, the potential pulled back along the flow.

    Euclidean model only; this is ``|x|^2/4`` for every ``tau`` in ``[-1, 0)``.
    """
    if model.kind is not Kind.EUCLIDEAN:
        raise ConfigurationError("the flow dictionary is implemented for the Euclidean model only")
    if not -1.0 <= tau < 0.0:
        raise DomainError(f"tau must lie in [-1, 0), got {tau}")
    x = np.asarray(x, dtype=float)
    return (-tau) * model.potential(x / math.sqrt(-tau))
