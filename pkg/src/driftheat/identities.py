"""Pointwise checks of the differential identities behind the derivative bound.

Jets are built from exact polynomial derivatives (:class:`~driftheat.polys.Poly`),
so residuals sit at round-off level.  A finite-difference mode is available
for arbitrary smooth callables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .oracles import FDGrid, fd_drift_laplacian, fd_evolve
from .polys import Poly
from .spectral import (
    HermiteField,
    apply_drift_laplacian,
    drift_laplacian_pointwise,
    evaluate,
    evolve,
    to_poly,
)


@dataclass(frozen=True)
class JetInput:
    """Second-order jets of ``v`` and ``f`` at a point, plus parameters.

    ``v_third`` (third derivatives of ``v``) and ``dvdt_grad`` (gradient of
    ``dv/dt``) are only needed by the Bochner check.
    """

    point: np.ndarray
    v: float
    v_grad: np.ndarray
    v_hess: np.ndarray
    f: float
    f_grad: np.ndarray
    f_hess: np.ndarray
    alpha: float = 0.0
    gamma: float = 1.0
    k: float = 0.0
    v_third: np.ndarray | None = None
    dvdt_grad: np.ndarray | None = None

    def __post_init__(self):
        if not self.gamma > 0:
            raise ConfigurationError("gamma must be positive")
        for name in ("v_hess", "f_hess"):
            h = getattr(self, name)
            if not np.allclose(h, h.T, rtol=0, atol=1e-12 * max(1.0, np.abs(h).max())):
                raise ConfigurationError(f"{name} is not symmetric")

    @property
    def v_lap(self) -> float:
        return float(np.trace(self.v_hess))

    @property
    def f_lap(self) -> float:
        return float(np.trace(self.f_hess))


def jet_from_polys(v: Poly, f: Poly, point, alpha=0.0, gamma=1.0, k=0.0, dvdt: Poly | None = None):
    """Exact jet of polynomial ``v`` and ``f``.

    ``dvdt`` defaults to the polynomial ``Lap v - <df, dv>``, i.e. ``v``
    treated as a solution of the drift heat equation at this instant.
    """
    y = np.asarray(point, dtype=float)
    if dvdt is None:
        dvdt = v.laplacian()
        for i in range(v.n):
            dvdt = dvdt - f.deriv(i) * v.deriv(i)
    return JetInput(
        point=y,
        v=float(v(y)),
        v_grad=v.grad_at(y),
        v_hess=v.hess_at(y),
        f=float(f(y)),
        f_grad=f.grad_at(y),
        f_hess=f.hess_at(y),
        alpha=float(alpha),
        gamma=float(gamma),
        k=float(k),
        v_third=v.third_at(y),
        dvdt_grad=dvdt.grad_at(y),
    )


def gaussian_potential(n) -> Poly:
    """``|y|^2/4`` as a polynomial."""
    out = Poly.constant(0.0, n)
    for i in range(n):
        y = Poly.variable(i, n)
        out = out + 0.25 * (y * y)
    return out


def jet_from_field(field: HermiteField, t: float, point, alpha=0.0, gamma=1.0, k=0.0) -> JetInput:
    """Jet of ``P_t field`` on the Gaussian shrinker.

    The time derivative comes from the coefficient action of the generator,
    independently of any pointwise formula.
    """
    vt = evolve(field, t)
    n = field.model.n
    return jet_from_polys(
        to_poly(vt), gaussian_potential(n), point, alpha, gamma, k, dvdt=to_poly(apply_drift_laplacian(vt))
    )


# --- divergence identity ----------------------------------------------------


def _unweighted_sides(jet: JetInput):
    a, g = jet.alpha, jet.gamma
    v, dv, df = jet.v, jet.v_grad, jet.f_grad
    df2 = float(df @ df)
    dv2 = float(dv @ dv)
    dfdv = float(df @ dv)
    lap_f_v = jet.v_lap - dfdv
    beta = (-1.0 + a + 1.0 / g) / 2.0
    shifted = dv - beta * v * df
    bracket = (0.5 * (1.0 - a) ** 2 + (0.5 - g) / g**2) * df2 + a * jet.f_lap
    lhs = 2 * v * lap_f_v + 2 * float(shifted @ shifted) - bracket * v * v

    # div(X w) = (div X) w + <X, dw>,  dw = -w df / g
    div_x = 2 * dv2 + 2 * v * jet.v_lap - 2 * a * v * dfdv - a * v * v * jet.f_lap
    x_dot_df = 2 * v * dfdv - a * v * v * df2
    rhs = div_x - x_dot_df / g
    return lhs, rhs


def divergence_identity_sides(jet: JetInput):
    """Both sides of the weighted divergence identity at the jet point.

    Left: ``2 v Lap_f v w + 2 |dv - beta v df|^2 w - {[(1-a)^2/2 + (1/2 - g)/g^2] |df|^2 + a Lap f} v^2 w``
    with ``beta = (-1 + a + 1/g)/2`` and ``w = e^{-f/g}``.
    Right: ``div[(2 v dv - a v^2 df) w]`` expanded by the product rule.
    """
    w = math.exp(-jet.f / jet.gamma)
    lhs, rhs = _unweighted_sides(jet)
    return lhs * w, rhs * w


def divergence_identity_residual(jet: JetInput) -> float:
    """``|lhs - rhs|`` with the common factor ``e^{-f/gamma}`` divided out.

    Both sides carry that positive factor; removing it keeps the residual
    at round-off scale when ``f/gamma`` is large in magnitude.
    """
    lhs, rhs = _unweighted_sides(jet)
    return abs(lhs - rhs)


def _fd_grad(fn, y, h):
    g = np.empty(y.shape[0])
    for i in range(y.shape[0]):
        e = np.zeros_like(y)
        e[i] = h
        g[i] = (fn(y + e) - fn(y - e)) / (2 * h)
    return g


def _fd_hess(fn, y, h):
    n = y.shape[0]
    out = np.empty((n, n))
    f0 = fn(y)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h
        out[i, i] = (fn(y + ei) - 2 * f0 + fn(y - ei)) / h**2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h
            out[i, j] = out[j, i] = (
                fn(y + ei + ej) - fn(y + ei - ej) - fn(y - ei + ej) + fn(y - ei - ej)
            ) / (4 * h * h)
    return out


def divergence_identity_residual_fd(v, f, point, alpha, gamma, h=1e-4) -> float:
    """Finite-difference version for arbitrary smooth callables ``v``, ``f``.

    The right side is the numerical divergence of the numerically formed flux
    field, so no product-rule expansion is involved.  Accuracy ~ ``h^2``.
    """
    y = np.asarray(point, dtype=float)
    jet = JetInput(
        point=y,
        v=float(v(y)),
        v_grad=_fd_grad(v, y, h),
        v_hess=_fd_hess(v, y, h),
        f=float(f(y)),
        f_grad=_fd_grad(f, y, h),
        f_hess=_fd_hess(f, y, h),
        alpha=alpha,
        gamma=gamma,
    )
    lhs, _ = divergence_identity_sides(jet)

    def flux(z, i):
        vz = v(z)
        return (2 * vz * _fd_grad(v, z, h)[i] - alpha * vz * vz * _fd_grad(f, z, h)[i]) * math.exp(-f(z) / gamma)

    div = 0.0
    for i in range(y.shape[0]):
        e = np.zeros_like(y)
        e[i] = h
        div += (flux(y + e, i) - flux(y - e, i)) / (2 * h)
    return abs(lhs - div)


# --- Bochner computation ----------------------------------------------------


@dataclass(frozen=True)
class BochnerValue:
    lhs: float
    rhs: float
    residual: float
    curvature_psd: bool


def bochner_sides(jet: JetInput, t: float, rate: float | None = None) -> BochnerValue:
    """``1/2 [Lap_f - d/dt](e^{-rate t}|dv|^2)`` against ``e^{-rate t}{|Hess v|^2 + (Hess f + k g)(dv,dv)}``.

    The two agree exactly when ``rate = 2k`` (the default).  Euclidean
    ambient space, so ``Ric_f = Hess f``.
    """
    if jet.v_third is None or jet.dvdt_grad is None:
        raise ConfigurationError("Bochner check needs third derivatives of v and grad(dv/dt)")
    k = jet.k
    rate = 2.0 * k if rate is None else rate
    dv, df = jet.v_grad, jet.f_grad
    H = jet.v_hess
    X = float(dv @ dv)
    grad_lap_v = np.einsum("iij->j", jet.v_third)
    lap_X = 2 * float(np.sum(H * H)) + 2 * float(dv @ grad_lap_v)
    df_dX = 2 * float(df @ H @ dv)
    X_dot = 2 * float(dv @ jet.dvdt_grad)
    decay = math.exp(-rate * t)
    lhs = 0.5 * decay * ((lap_X - df_dX) - X_dot + rate * X)
    curv = jet.f_hess + k * np.eye(dv.shape[0])
    rhs = decay * (float(np.sum(H * H)) + float(dv @ curv @ dv))
    psd = bool(np.linalg.eigvalsh(curv).min() >= -1e-14)
    return BochnerValue(lhs, rhs, abs(lhs - rhs), psd)


def bochner_subsolution_residual(jet: JetInput, t: float, rate: float | None = None) -> float:
    return bochner_sides(jet, t, rate).residual


# --- commuting with the generator -------------------------------------------


def laplacian_commutes(field: HermiteField, t: float) -> float:
    """Max coefficient difference between ``Lap_f P_t v`` and ``P_t Lap_f v``."""
    a = apply_drift_laplacian(evolve(field, t)).coeffs
    b = evolve(apply_drift_laplacian(field), t).coeffs
    return max((abs(a[k] - b[k]) for k in a), default=0.0)


def laplacian_commutes_fd(field: HermiteField, t: float, point=0.0, grid: FDGrid | None = None) -> float:
    """Pointwise check in 1D through the Crank-Nicolson oracle.

    ``Lap_f(P_t v)`` is the finite-difference drift Laplacian of the FD
    solution started from ``v``; ``P_t(Lap_f v)`` is the FD solution started
    from the analytic ``Lap_f v``.
    """
    if field.model.n != 1:
        raise ConfigurationError("the FD oracle check is one-dimensional")
    grid = grid or FDGrid()
    x = grid.x[:, None]
    first = fd_evolve(evaluate(field, x), t, grid)
    lhs = np.interp(point, grid.x, fd_drift_laplacian(first))
    second = fd_evolve(drift_laplacian_pointwise(field, x), t, grid)
    rhs = second.at(point)
    return float(abs(lhs - rhs))


# --- random sweeps ----------------------------------------------------------


@dataclass(frozen=True)
class SweepResult:
    seed: int
    count: int
    max_residual: float
    worst_index: int


def random_divergence_sweep(seed: int, count: int = 1000, max_n: int = 3, degree: int = 3) -> SweepResult:
    """Random polynomial ``v, f`` (coefficients in [-1, 1]), ``alpha in [-2, 2]``, ``gamma in [0.1, 5]``."""
    rng = np.random.default_rng(seed)
    worst, where = 0.0, -1
    for i in range(count):
        n = int(rng.integers(1, max_n + 1))
        v = Poly.random(rng, n, degree)
        f = Poly.random(rng, n, degree)
        point = rng.uniform(-1.0, 1.0, size=n)
        alpha = rng.uniform(-2.0, 2.0)
        gamma = rng.uniform(0.1, 5.0)
        r = divergence_identity_residual(jet_from_polys(v, f, point, alpha, gamma))
        if r > worst:
            worst, where = r, i
    return SweepResult(seed, count, worst, where)


def random_bochner_sweep(seed: int, count: int = 200, max_n: int = 3, degree: int = 4):
    """Random polynomial jets with ``k in [0, 2]``.

    Returns ``(SweepResult, min rhs over jets with Hess f + k g >= 0)``.
    """
    rng = np.random.default_rng(seed)
    worst, where = 0.0, -1
    min_rhs = math.inf
    for i in range(count):
        n = int(rng.integers(1, max_n + 1))
        v = Poly.random(rng, n, degree)
        f = Poly.random(rng, n, 3)
        point = rng.uniform(-1.0, 1.0, size=n)
        k = rng.uniform(0.0, 2.0)
        t = rng.uniform(0.0, 2.0)
        res = bochner_sides(jet_from_polys(v, f, point, k=k), t)
        scale = max(1.0, abs(res.lhs), abs(res.rhs))
        if res.residual / scale > worst:
            worst, where = res.residual / scale, i
        if res.curvature_psd:
            min_rhs = min(min_rhs, res.rhs)
    return SweepResult(seed, count, worst, where), min_rhs
