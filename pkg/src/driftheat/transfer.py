"""Soliton time <-> Ricci-flow time on the Gaussian shrinker, and the Schur bound.

On R^n with ``f = |y|^2/4`` the flow of ``grad f`` is ``psi_t(y) = e^{t/2} y``
and the dictionary reads

    u(tau, x) = v(-log(-tau), (-tau)^{-1/2} x),    v(t, y) = u(-e^{-t}, e^{-t/2} y).

The heat equation along the (static, flat) flow is the standard one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .models import Kind, SolitonModel, rescaled_potential
from .oracles import gaussian_integral
from .spectral import (
    Family,
    GaussianProfile,
    HermiteField,
    evaluate,
    evolve,
    evolve_gaussian,
    weighted_norm_sq,
)

TAU_RANGE_NOTE = (
    "flow-norm bound checked for tau in [-1, 0), where u(tau, x) = v(-log(-tau), (-tau)^(-1/2) x) is defined"
)


@dataclass(frozen=True)
class FlowFrame:
    """A Ricci-flow time ``tau`` in ``[-1, 0)`` with its soliton time ``t = -log(-tau)``."""

    tau: float

    def __post_init__(self):
        if not -1.0 <= self.tau < 0.0:
            raise DomainError(f"tau must lie in [-1, 0), got {self.tau}")

    @classmethod
    def from_t(cls, t: float) -> "FlowFrame":
        if t < 0:
            raise DomainError("negative soliton time")
        return cls(-math.exp(-t))

    @property
    def t(self) -> float:
        return -math.log(-self.tau)

    @property
    def scale(self) -> float:
        """``(-tau)^{-1/2}``, the factor with ``y = scale * x``."""
        return (-self.tau) ** -0.5


def _dim(v):
    return v.model.n if isinstance(v, HermiteField) else v.n


def to_flow(v, tau: float):
    """``u(tau, .)`` as a vectorized callable of ``x``."""
    frame = FlowFrame(tau)
    if isinstance(v, HermiteField):
        if v.model.kind is not Kind.EUCLIDEAN:
            raise ConfigurationError("flow dictionary needs the Euclidean model")
        vt = evolve(v, frame.t)
        return lambda x: evaluate(vt, np.asarray(x, dtype=float) * frame.scale)
    if isinstance(v, GaussianProfile):
        # profiles carry absolute soliton time
        if frame.t < v.t:
            raise DomainError(f"tau={tau} precedes the profile's time t={v.t}")
        vt = v.at(frame.t)
        return lambda x: vt(np.asarray(x, dtype=float) * frame.scale)
    raise TypeError(f"unsupported input {type(v).__name__}")


def flow_profile(family, c: float, n: int, tau: float):
    """Closed-form flow-side Gaussian solutions.

    REVERSE: ``(c - tau)^{-n/2} exp(|x|^2 / (4(c - tau)))``;
    FORWARD: ``(c + tau)^{-n/2} exp(-|x|^2 / (4(c + tau)))``.
    """
    family = Family.parse(family)
    s = c - tau if family is Family.REVERSE else c + tau
    if s <= 0:
        raise DomainError(f"flow profile singular at tau={tau} for c={c}")
    sign = 1.0 if family is Family.REVERSE else -1.0

    def u(x):
        r2 = np.sum(np.asarray(x, dtype=float) ** 2, axis=-1)
        return s ** (-n / 2) * np.exp(sign * r2 / (4.0 * s))

    return u


def heat_equation_residual(u_of_tau, tau: float, points, h: float = 1e-3) -> float:
    """Max ``|du/dtau - Lap u|`` at ``points`` by central differences.

    ``u_of_tau(tau)`` must return a callable of ``x``.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[1]
    du = (u_of_tau(tau + h)(pts) - u_of_tau(tau - h)(pts)) / (2 * h)
    u0 = u_of_tau(tau)
    base = u0(pts)
    lap = np.zeros(pts.shape[0])
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        lap += (u0(pts + e) - 2 * base + u0(pts - e)) / h**2
    return float(np.max(np.abs(du - lap)))


# --- norm identity ------------------------------------------------------------


@dataclass(frozen=True)
class FlowNormValue:
    t: float
    soliton_side: float
    flow_side: float
    initial_norm_sq: float

    @property
    def residual(self) -> float:
        return abs(self.soliton_side - self.flow_side) / max(abs(self.soliton_side), 1e-300)

    @property
    def bound_ratio(self) -> float:
        """Flow-side weighted norm squared over ``||u_{-1}||^2_{e^{-f}}``."""
        return self.flow_side / self.initial_norm_sq


def _growth(v, t):
    # signed: forward profiles decay, and matching the rule to that keeps GH exact
    if isinstance(v, GaussianProfile):
        return evolve_gaussian(v, t).exponent
    return 0.0


def _order(v):
    return v.degree + 2 if isinstance(v, HermiteField) else 40


def flow_norm_identity(v, t: float) -> FlowNormValue:
    """Critical-weight norm computed on both sides of the change of variables.

    Soliton side: ``e^{-nt/2} int v_t(y)^2 e^{-f(y)/((e^t+1)/2)} dy``.
    Flow side: ``int u_tau(x)^2 e^{-f_tau(x)/((1-tau)/2)} dx`` at ``tau = -e^{-t}``
    with ``f_tau`` the rescaled potential.  The two quadratures use unrelated
    node sets.
    """
    n = _dim(v)
    if isinstance(v, GaussianProfile) and v.t != 0:
        raise DomainError("flow_norm_identity starts from the t = 0 state")
    frame = FlowFrame.from_t(t)
    model = SolitonModel(Kind.EUCLIDEAN, n)
    growth = _growth(v, t)
    order = _order(v)

    gamma_s = (math.exp(t) + 1.0) / 2.0
    width = (1.0 - frame.tau) / 2.0
    flow_decay = 1.0 / (4.0 * width)
    flow_growth = 2 * growth * frame.scale**2

    if isinstance(v, HermiteField):
        vt = evolve(v, t)
        u = to_flow(v, frame.tau)

        def sq_soliton(y):
            return evaluate(vt, y) ** 2

        def sq_flow(x):
            return u(x) ** 2
    else:
        # squares in log form with the Gaussian growth removed; raw values overflow at outer nodes
        vt = evolve_gaussian(v, t)
        log_a = math.log(vt.amplitude)

        def sq_soliton(y):
            return np.exp(2 * log_a + (2 * vt.exponent - 2 * growth) * np.sum(y**2, axis=-1))

        def sq_flow(x):
            y2 = frame.scale**2 * np.sum(x**2, axis=-1)
            return np.exp(2 * log_a + 2 * vt.exponent * y2 - flow_growth * np.sum(x**2, axis=-1))

    damped = isinstance(v, GaussianProfile)
    soliton = math.exp(-n * t / 2.0) * gaussian_integral(
        sq_soliton, n, 1.0 / (4.0 * gamma_s), growth=2 * growth, order=order, damped=damped
    )

    # weight exp(-f_tau(x)/width) evaluated pointwise through the rescaled potential
    def flow_integrand(x):
        pot = rescaled_potential(model, frame.tau, x)
        r2 = np.sum(x**2, axis=-1)
        return sq_flow(x) * np.exp(-pot / width + flow_decay * r2)

    flow = gaussian_integral(flow_integrand, n, flow_decay, growth=flow_growth, order=order + 1, damped=damped)

    try:
        base = weighted_norm_sq(v, 1.0)
    except DomainError:
        base = math.nan
    return FlowNormValue(t, soliton, flow, base)


# --- Schur test ---------------------------------------------------------------


def _check_schur_tau(tau):
    if not 0.0 <= tau < 1.0:
        raise DomainError(f"Schur kernel needs tau in [0, 1), got {tau}")


def schur_kernel(x, y, tau: float):
    """``[4 pi (tau+1)]^{-n/2} exp(|y|^2/4 - |x-y|^2/(4(tau+1)))``."""
    _check_schur_tau(tau)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[-1]
    return (4 * math.pi * (tau + 1)) ** (-n / 2) * np.exp(
        np.sum(y**2, axis=-1) / 4.0 - np.sum((x - y) ** 2, axis=-1) / (4.0 * (tau + 1))
    )


def h_Y(y):
    return np.exp(np.sum(np.asarray(y, dtype=float) ** 2, axis=-1) / 8.0)


def h_X(x, tau):
    return np.exp(np.sum(np.asarray(x, dtype=float) ** 2, axis=-1) / (4.0 * (1.0 - tau)))


def schur_identity_residual(x, y, tau: float) -> float:
    """``|(2/(tau+1))|x-y|^2 - |y|^2 - [((1-tau)/(tau+1))|y - 2x/(1-tau)|^2 - 2|x|^2/(1-tau)]|``."""
    _check_schur_tau(tau)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lhs = 2.0 / (tau + 1) * np.sum((x - y) ** 2) - np.sum(y**2)
    rhs = (1 - tau) / (tau + 1) * np.sum((y - 2 * x / (1 - tau)) ** 2) - 2 * np.sum(x**2) / (1 - tau)
    return float(abs(lhs - rhs))


@dataclass(frozen=True)
class SchurRowValue:
    tau: float
    n: int
    x_row: np.ndarray  # int K h_Y dnu / h_X at each sample x
    y_row: np.ndarray  # int K h_X dmu / h_Y at each sample y

    @property
    def C_X(self) -> float:
        return float(np.mean(self.x_row))

    @property
    def C_Y(self) -> float:
        return float(np.mean(self.y_row))

    @property
    def operator_bound(self) -> float:
        return math.sqrt(self.C_X * self.C_Y)

    @property
    def x_variance(self) -> float:
        return float(np.var(self.x_row))

    @property
    def y_variance(self) -> float:
        return float(np.var(self.y_row))


def _gauss_center_integral(log_quadratic, n, a, center, order):
    """``int exp(g(z)) dz`` where ``g`` is quadratic with leading part ``-a|z|^2``.

    The rule is centered at the stationary point so the residual integrand
    is constant and the rule is exact up to round-off.
    """
    return gaussian_integral(
        lambda z: np.exp(log_quadratic(z) + a * np.sum(z**2, axis=-1)), n, a, order=order, center=center
    )


def schur_row_constant(tau: float, n: int, points, order: int = 12) -> SchurRowValue:
    """Row integrals of the Schur test at each sample point.

    X-row: ``int K(x,y) h_Y(y) e^{-|y|^2/4} dy / h_X(x)``.
    Y-row: ``int K(x,y) h_X(x) e^{-|x|^2/(2(1-tau))} dx / h_Y(y)``.
    """
    _check_schur_tau(tau)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != n:
        raise ConfigurationError("sample points have the wrong dimension")
    s = tau + 1.0
    norm = (4 * math.pi * s) ** (-n / 2)

    # y-exponent: -|x-y|^2/(4s) + |y|^2/8 = -a|y|^2 + b.y + const
    a_y = 1.0 / (4 * s) - 1.0 / 8.0
    x_row = []
    for x in pts:
        center = (x / (2 * s)) / (2 * a_y)
        log_g = lambda y, x=x: (  # noqa: E731
            -np.sum((x - y) ** 2, axis=-1) / (4 * s) + np.sum(y**2, axis=-1) / 8.0 - np.sum(x**2) / (4 * (1 - tau))
        )
        x_row.append(norm * _gauss_center_integral(log_g, n, a_y, center, order))

    # x-exponent: |y|^2/4 - |x-y|^2/(4s) - |x|^2/(4(1-tau)) - |y|^2/8
    a_x = 1.0 / (4 * s) + 1.0 / (4 * (1 - tau))
    y_row = []
    for y in pts:
        center = (y / (2 * s)) / (2 * a_x)
        log_g = lambda x, y=y: (  # noqa: E731
            np.sum(y**2) / 8.0 - np.sum((x - y) ** 2, axis=-1) / (4 * s) - np.sum(x**2, axis=-1) / (4 * (1 - tau))
        )
        y_row.append(norm * _gauss_center_integral(log_g, n, a_x, center, order))
    return SchurRowValue(tau, n, np.array(x_row), np.array(y_row))


def expected_row_constants(tau: float, n: int):
    """Closed forms ``C_X = (2/(1-tau))^{n/2}``, ``C_Y = ((1-tau)/2)^{n/2}``."""
    return (2.0 / (1.0 - tau)) ** (n / 2), ((1.0 - tau) / 2.0) ** (n / 2)


def heat_apply(u0, tau: float, points, growth: float = 0.0, order: int = 40, damped: bool = False) -> np.ndarray:
    """``(T u0)(x) = int K(x,y) u0(y) e^{-|y|^2/4} dy`` at each sample ``x``.

    ``growth`` is the Gaussian growth rate of ``u0``.  With ``damped=True``
    the callable returns ``u0(y) e^{-growth |y|^2}`` instead, which keeps
    fast-growing data finite at the outer nodes.
    """
    _check_schur_tau(tau)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[1]
    s = tau + 1.0
    a = 1.0 / (4 * s)
    norm = (4 * math.pi * s) ** (-n / 2)
    eff = a - growth
    out = []
    for x in pts:
        center = a * x / eff if eff > 0 else x

        # K e^{-|y|^2/4} = norm exp(-a|x-y|^2); times e^{a|y|^2} to undo the rule weight
        def integrand(y, x=x):
            return norm * np.exp(a * (2.0 * (y @ x) - x @ x)) * u0(y)

        out.append(gaussian_integral(integrand, n, a, growth=growth, order=order, center=center, damped=damped))
    return np.array(out)


def heat_apply_vs_kernel(family, c0: float, n: int, tau: float, points, order: int = 40) -> float:
    """Max gap between kernel application and the closed-form heat evolution.

    ``u0 = c0^{-n/2} exp(+-|x|^2/(4 c0))``; after heat time ``tau + 1`` the
    exact result is the same family with ``c0 -+ (tau + 1)``.
    """
    family = Family.parse(family)
    sign = 1.0 if family is Family.REVERSE else -1.0
    growth = 1.0 / (4.0 * c0) if family is Family.REVERSE else 0.0

    def u0_damped(y):
        return c0 ** (-n / 2) * np.exp((sign / (4.0 * c0) - growth) * np.sum(y**2, axis=-1))

    numeric = heat_apply(u0_damped, tau, points, growth=growth, order=order, damped=True)
    s = tau + 1.0
    c1 = c0 - s if family is Family.REVERSE else c0 + s
    if c1 <= 0:
        raise DomainError(f"heat evolution of the profile blows up before tau={tau}")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    exact = c1 ** (-n / 2) * np.exp(sign * np.sum(pts**2, axis=-1) / (4.0 * c1))
    return float(np.max(np.abs(numeric - exact)))


def composition_gap(v: GaussianProfile, points, eps: float = 1e-9) -> float:
    """Continuity at ``tau = 0`` of flow-side evolution followed by the kernel.

    Compares ``to_flow(v, -eps)`` with ``T_0 u_{-1}`` (heat time 1 from ``tau = -1``).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    growth = max(v.exponent, 0.0)
    log_a = math.log(v.amplitude)

    def u_minus_damped(y):
        # u at tau = -1 is v itself
        return np.exp(log_a + (v.exponent - growth) * np.sum(y**2, axis=-1))

    kernel = heat_apply(u_minus_damped, 0.0, pts, growth=growth, damped=True)
    left = to_flow(v, -eps)(pts)
    return float(np.max(np.abs(kernel - left)))
