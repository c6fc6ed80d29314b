"""Monitors for the weighted L^2 estimates of the drift heat semigroup.

Every bound is tracked as a dimensionless squared ratio; a report passes when
``max ratio <= 1 + tolerance``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as spi

from .errors import ConfigurationError, DivergenceError, DomainError
from .models import Kind
from .oracles import gaussian_integral, lq_norm
from .spectral import (
    Family,
    GaussianProfile,
    HermiteField,
    evaluate,
    evolve,
    evolve_gaussian,
    weighted_norm_sq,
)

CLOSED_FORM_TOL = 1e-8
NUMERIC_TOL = 1e-4
MONOTONE_TOL = 1e-10


class GammaKind(enum.Enum):
    CONSTANT = "constant"
    CRITICAL = "critical"
    SUBCRITICAL = "subcritical"


class MuKind(enum.Enum):
    CONSTANT = "constant"
    EXP_DECAY = "exp_decay"


@dataclass(frozen=True)
class Schedule:
    """Weight parameter ``gamma(t)``, normalization ``mu(t)`` and the constant ``alpha``.

    CONSTANT gamma uses ``gamma0``; SUBCRITICAL uses ``epsilon`` in
    ``gamma = (1 + e^t - eps (e^t - 1)) / 2``.
    """

    gamma_kind: GammaKind = GammaKind.CRITICAL
    mu_kind: MuKind = MuKind.EXP_DECAY
    alpha: float = 1.0
    gamma0: float = 1.0
    epsilon: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "gamma_kind", GammaKind(self.gamma_kind))
        object.__setattr__(self, "mu_kind", MuKind(self.mu_kind))
        if self.gamma_kind is GammaKind.CONSTANT and not self.gamma0 > 0:
            raise ConfigurationError("constant gamma must be positive")

    @classmethod
    def critical(cls):
        return cls(GammaKind.CRITICAL, MuKind.EXP_DECAY, 1.0)

    @classmethod
    def classical(cls):
        return cls(GammaKind.CONSTANT, MuKind.CONSTANT, 0.0, gamma0=1.0)

    def gamma(self, t):
        e = math.exp(t)
        if self.gamma_kind is GammaKind.CONSTANT:
            return self.gamma0
        if self.gamma_kind is GammaKind.CRITICAL:
            return (e + 1.0) / 2.0
        return (1.0 + e - self.epsilon * (e - 1.0)) / 2.0

    def gamma_dot(self, t):
        e = math.exp(t)
        if self.gamma_kind is GammaKind.CONSTANT:
            return 0.0
        if self.gamma_kind is GammaKind.CRITICAL:
            return e / 2.0
        return (1.0 - self.epsilon) * e / 2.0

    def mu(self, t):
        return 1.0 if self.mu_kind is MuKind.CONSTANT else math.exp(-t)

    def mu_dot(self, t):
        return 0.0 if self.mu_kind is MuKind.CONSTANT else -math.exp(-t)

    def validate(self, times):
        for t in times:
            if not self.gamma(t) > 0:
                raise ConfigurationError(f"gamma({t}) = {self.gamma(t)} is not positive")

    def describe(self) -> dict:
        out = {"gamma": self.gamma_kind.value, "mu": self.mu_kind.value, "alpha": self.alpha}
        if self.gamma_kind is GammaKind.CONSTANT:
            out["gamma0"] = self.gamma0
        if self.gamma_kind is GammaKind.SUBCRITICAL:
            out["epsilon"] = self.epsilon
        return out


@dataclass
class BoundReport:
    name: str
    times: list
    ratios: list
    tolerance: float
    schedule: dict | None = None
    require_monotone: bool = False
    extra: dict = field(default_factory=dict)
    status: str | None = None  # overrides the computed verdict, e.g. "diverged"

    @property
    def max_ratio(self) -> float:
        # np.max propagates NaN, so a broken ratio cannot pass
        return float(np.max(self.ratios)) if self.ratios else math.nan

    @property
    def monotone(self) -> bool:
        r = self.ratios
        return all(r[i + 1] - r[i] <= MONOTONE_TOL for i in range(len(r) - 1))

    @property
    def verdict(self) -> str:
        if self.status is not None:
            return self.status
        return "pass" if self.max_ratio <= 1.0 + self.tolerance else "fail"

    @property
    def passed(self) -> bool:
        ok = self.verdict == "pass"
        return ok and (self.monotone or not self.require_monotone)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "schedule": self.schedule,
            "times": list(self.times),
            "ratios": list(self.ratios),
            "max_ratio": self.max_ratio,
            "monotone": self.monotone,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "passed": self.passed,
            "extra": self.extra,
        }


def default_times(t_max=5.0, points=40):
    """``t = 0`` followed by log-spaced points up to ``t_max``."""
    if points < 2:
        return [0.0]
    return [0.0] + list(np.geomspace(t_max * 1e-3, t_max, points - 1))


# --- generic helpers --------------------------------------------------------


def dimension(v) -> int:
    return v.model.n if isinstance(v, HermiteField) else v.n


def evolved(v, t):
    if isinstance(v, GaussianProfile):
        return evolve_gaussian(v, t)
    if isinstance(v, HermiteField):
        return evolve(v, t)
    raise TypeError(f"unsupported input {type(v).__name__}")


def norm_sq(v, gamma):
    return weighted_norm_sq(v, gamma)


# --- monitors ---------------------------------------------------------------


def classical_bound(v, times=None, tolerance=CLOSED_FORM_TOL) -> BoundReport:
    """``||P_t v||^2 / ||v||^2`` in ``L^2(e^{-f})``."""
    times = default_times() if times is None else list(times)
    base = norm_sq(v, 1.0)
    ratios = [norm_sq(evolved(v, t), 1.0) / base for t in times]
    return BoundReport(
        "classical", times, ratios, tolerance, Schedule.classical().describe(), require_monotone=True
    )


def monitored_quantity(v, t, schedule: Schedule) -> float:
    """``mu(t)^{n/2} ||P_t v||^2_{gamma(t)}``."""
    n = dimension(v)
    return schedule.mu(t) ** (n / 2) * norm_sq(evolved(v, t), schedule.gamma(t))


def critical_bound(v, times=None, schedule=None, tolerance=CLOSED_FORM_TOL) -> BoundReport:
    """Squared ratio ``e^{-nt/2} ||P_t v||^2_{(e^t+1)/2} / ||v||^2_1``.

    A different ``schedule`` may be supplied (negative controls).
    """
    times = default_times() if times is None else list(times)
    schedule = schedule or Schedule.critical()
    schedule.validate(times)
    base = norm_sq(v, 1.0)
    ratios = [monitored_quantity(v, t, schedule) / base for t in times]
    return BoundReport("critical", times, ratios, tolerance, schedule.describe(), require_monotone=True)


def gamma_ode(gamma0: float, t: float) -> float:
    """Solution of ``gamma' = gamma - 1/2`` with ``gamma(0) = gamma0``."""
    return (gamma0 - 0.5) * math.exp(t) + 0.5


def euclidean_constant(t: float, gamma: float, n: int) -> float:
    """Holder constant ``C_{1+e^t, gamma}`` on the Gaussian shrinker."""
    q_half = (1.0 + math.exp(t)) / 2.0
    if not 0 < gamma < q_half:
        raise DomainError(f"need 0 < gamma < (1+e^t)/2 = {q_half}, got {gamma}")
    if t == 0:
        return 1.0
    e = math.exp(t)
    inner = (1.0 / gamma - 2.0 / (1.0 + e)) * (1.0 + e) / (4.0 * (e - 1.0))
    c_sq = (math.pi / inner) ** ((e - 1.0) / (1.0 + e) * n / 2.0)
    return math.sqrt(c_sq)


def holder_constant_quadrature(q: float, gamma: float, n: int) -> float:
    """``C_{q,gamma}`` from its defining integral, by adaptive 1D quadrature.

    The integrand is a product over coordinates, so the n-dimensional
    integral is the n-th power of a line integral.
    """
    if not (q > 2 and 0 < gamma < q / 2):
        raise DomainError("need q > 2 and 0 < gamma < q/2")
    rate = (1.0 / gamma - 2.0 / q) * q / (q - 2.0) / 4.0
    scale = 1.0 / math.sqrt(rate)
    # substitute y = scale * s to keep the integrand O(1)
    line, _ = spi.quad(lambda s: math.exp(-rate * (scale * s) ** 2), -np.inf, np.inf, epsabs=0, epsrel=1e-13)
    total = (scale * line) ** n
    return total ** ((q - 2.0) / (2.0 * q))


def bakry_emery_bound(v, t: float, gamma: float, tolerance=CLOSED_FORM_TOL, margin=1e-9) -> BoundReport:
    """``||P_t v||_{L^2(e^{-f/gamma})} <= C_{1+e^t,gamma} ||v||_{L^2(e^{-f})}``.

    Reports ``status="diverged"`` when ``gamma`` is within ``margin`` (relative)
    of ``(1+e^t)/2``, where the constant blows up.
    """
    n = dimension(v)
    limit = (1.0 + math.exp(t)) / 2.0
    extra = {"t": t, "gamma": gamma, "gamma_limit": limit}
    if gamma >= limit * (1.0 - margin):
        return BoundReport("bakry_emery", [t], [math.inf], tolerance, None, extra=extra, status="diverged")
    C = euclidean_constant(t, gamma, n)
    lhs = math.sqrt(norm_sq(evolved(v, t), gamma))
    rhs = C * math.sqrt(norm_sq(v, 1.0))
    extra.update(constant=C, lhs=lhs, rhs=rhs)
    return BoundReport("bakry_emery", [t], [lhs / rhs], tolerance, None, extra=extra)


def _pointwise(v):
    if isinstance(v, GaussianProfile):
        return v, max(v.exponent, 0.0)
    if v.model.kind is not Kind.EUCLIDEAN:
        raise ConfigurationError("pointwise probes need the Euclidean model")
    return (lambda y: evaluate(v, y)), 0.0


def _log_abs(v):
    if isinstance(v, GaussianProfile):
        return lambda y: math.log(v.amplitude) + v.exponent * np.sum(y**2, axis=-1)
    return None


def hypercontractivity_probe(v, t: float, order: int = 120) -> dict:
    """``||P_t v||_{L^q(e^{-f})} / ||v||_{L^2(e^{-f})}`` for q = (1+e^t)/2 and q = 1+e^t.

    This is data, not a certificate; ``holds`` flags are informational.
    """
    n = dimension(v)
    vt = evolved(v, t)
    fn, growth = _pointwise(vt)
    base = math.sqrt(norm_sq(v, 1.0))
    out = {"t": t, "base_norm": base, "exponents": {}}
    for label, q in (("stated", (1.0 + math.exp(t)) / 2.0), ("holder", 1.0 + math.exp(t))):
        if q < 1:
            continue
        try:
            val = lq_norm(fn, q, 1.0, n, order=order, growth=growth, log_abs=_log_abs(vt))
        except DivergenceError as exc:
            out["exponents"][label] = {"q": q, "error": str(exc)}
            continue
        out["exponents"][label] = {"q": q, "norm": val, "ratio": val / base, "holds": val / base <= 1.0}
    return out


def ansatz_coefficients(schedule: Schedule, t: float):
    """``(f coefficient, constant coefficient)`` of the derivative bound.

    ``1/2 (1-alpha)^2 + gamma^{-2} (1/2 - gamma + gamma')`` and
    ``alpha + mu'/mu``; the latter multiplies ``n/2``.
    """
    g = schedule.gamma(t)
    a = schedule.alpha
    f_coef = 0.5 * (1.0 - a) ** 2 + (0.5 - g + schedule.gamma_dot(t)) / g**2
    c_coef = a + schedule.mu_dot(t) / schedule.mu(t)
    return f_coef, c_coef


@dataclass(frozen=True)
class AnsatzValue:
    t: float
    f_coefficient: float
    constant_coefficient: float
    value: float

    @property
    def sign(self) -> int:
        return int(np.sign(self.value))


def ansatz_derivative(v_t, schedule: Schedule, t: float, order: int | None = None) -> AnsatzValue:
    """``int {f_coef f + c_coef n/2} v_t^2 e^{-f/gamma(t)}`` on the Gaussian shrinker.

    ``v_t`` is the already evolved state at time ``t``.
    """
    n = dimension(v_t)
    f_coef, c_coef = ansatz_coefficients(schedule, t)
    g = schedule.gamma(t)
    fn, growth = _pointwise(v_t)
    if order is None:
        order = v_t.degree + 3 if isinstance(v_t, HermiteField) else 60

    def integrand(y):
        f = np.sum(y**2, axis=-1) / 4.0
        return (f_coef * f + c_coef * n / 2.0) * fn(y) ** 2

    val = gaussian_integral(integrand, n, 1.0 / (4.0 * g), growth=2 * growth, order=order)
    return AnsatzValue(t, f_coef, c_coef, val)


def derivative_gap(v, schedule: Schedule, t: float, h: float = 1e-4):
    """Central-difference ``mu^{-n/2} d/dt [mu^{n/2} ||P_t v||^2_gamma]`` and the ansatz value.

    The derivative bound asserts ``numeric <= ansatz``.
    """
    n = dimension(v)
    lo = max(t - h, 0.0)
    hi = t + h
    dq = (monitored_quantity(v, hi, schedule) - monitored_quantity(v, lo, schedule)) / (hi - lo)
    numeric = dq / schedule.mu(t) ** (n / 2)
    return numeric, ansatz_derivative(evolved(v, t), schedule, t).value


# --- sharpness --------------------------------------------------------------


def _limit_field_norm_sq(field: HermiteField) -> float:
    """``lim e^{-nt/2} ||P_t v||^2_{(e^t+1)/2}`` for a polynomial field.

    Rescaling ``y = e^{t/2} s`` shows every ``e^{-|k|t/2} h_k`` tends to
    ``prod (s_i/sqrt2)^{k_i}`` while the weight tends to ``e^{-|s|^2/2}``.
    """
    n = field.model.n

    def limit_poly(s):
        out = np.zeros(s.shape[0])
        for key, a in field.coeffs.items():
            out += a * np.prod((s / math.sqrt(2.0)) ** np.asarray(key), axis=-1)
        return out**2

    return gaussian_integral(limit_poly, n, 0.5, order=field.degree + 2)


@dataclass(frozen=True)
class SharpnessValue:
    closed_form: float
    numeric_t20: float
    numeric_t25: float

    @property
    def limit_agreement(self) -> float:
        return abs(self.numeric_t20 - self.closed_form)

    @property
    def richardson_gap(self) -> float:
        return abs(self.numeric_t25 - self.numeric_t20)


def sharpness_L(v, t_check=20.0, t_richardson=25.0) -> SharpnessValue:
    """``L(v)`` from a closed form, plus large-time numeric confirmations."""
    n = dimension(v)
    base = norm_sq(v, 1.0)
    if isinstance(v, GaussianProfile):
        if v.t != 0:
            raise DomainError("sharpness is defined from the initial state (t = 0)")
        if v.family is Family.REVERSE:
            if v.c <= 1:
                raise DomainError("reverse profile needs c > 1 for the critical weight at all times")
            closed = ((v.c + 1.0) / (2.0 * v.c)) ** (n / 4)
        else:
            closed = math.sqrt(_forward_limit(v) / base)
    else:
        if v.model.kind is not Kind.EUCLIDEAN:
            raise ConfigurationError("sharpness closed forms need the Euclidean model")
        closed = math.sqrt(_limit_field_norm_sq(v) / base)
    crit = Schedule.critical()
    num20 = math.sqrt(monitored_quantity(v, t_check, crit) / base)
    num25 = math.sqrt(monitored_quantity(v, t_richardson, crit) / base)
    return SharpnessValue(closed, num20, num25)


def _forward_limit(v: GaussianProfile) -> float:
    # A -> c^{-n/2}, B e^t -> -1/(4c): e^{-nt/2} int A^2 e^{2B|y|^2 - |y|^2/(2(e^t+1))}
    # -> c^{-n} (pi / (1/(2c) + 1/2))^{n/2}
    n = v.n
    return v.c ** (-n) * (math.pi / (0.5 / v.c + 0.5)) ** (n / 2)
