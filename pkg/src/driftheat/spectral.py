"""Drift-Laplacian eigenbasis and the exact semigroup.

On the Gaussian shrinker the eigenfunctions are scaled probabilists' Hermite
products ``h_k(y) = prod_i He_{k_i}(y_i / sqrt(2))`` with
``Lap_f h_k = -(|k|/2) h_k`` and

    int h_j h_k e^{-f} dy = delta_jk (4 pi)^{n/2} prod_i k_i!

On the cylinder a basis element is ``Y_l(theta) h_k(z)`` with ``Y_l`` an
L^2-normalized spherical harmonic of degree ``l``; only its norm is used.

Closed-form Gaussian solutions ``A(t) exp(B(t) |y|^2)`` are handled by
:class:`GaussianProfile`.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from types import MappingProxyType

import numpy as np
from numpy.polynomial import hermite_e as He

from .errors import ConfigurationError, DivergenceError, DomainError
from .models import Kind, SolitonModel
from .oracles import FDGrid, fd_evolve, gauss_rule, gaussian_integral, integrate, multi_indices
from .polys import Poly

DEFAULT_DEGREE = 16
SQRT2 = math.sqrt(2.0)


class HermiteField:
    """Truncated eigen-expansion ``sum_k a_k h_k``.

    Keys are multi-indices of length ``n`` on the Euclidean model and pairs
    ``(l, k)`` (sphere degree, axial Hermite degree) on the cylinder.
    Instances are immutable.
    """

    __slots__ = ("model", "degree", "_coeffs")

    def __init__(self, model: SolitonModel, coeffs, degree: int | None = None):
        items = {}
        for key, val in dict(coeffs).items():
            key = tuple(int(k) for k in (key if isinstance(key, (tuple, list)) else (key,)))
            expect = 2 if model.kind is Kind.CYLINDER else model.n
            if len(key) != expect or min(key) < 0:
                raise ConfigurationError(f"bad index {key} for {model.kind.value} n={model.n}")
            items[key] = items.get(key, 0.0) + float(val)
        top = max((_total_degree(model, k) for k in items), default=0)
        if degree is None:
            degree = top
        if top > degree:
            raise ConfigurationError(f"index of degree {top} exceeds truncation degree {degree}")
        object.__setattr__(self, "model", model)
        object.__setattr__(self, "degree", int(degree))
        object.__setattr__(self, "_coeffs", MappingProxyType(dict(sorted(items.items()))))

    def __setattr__(self, name, value):
        raise AttributeError("HermiteField is immutable")

    @property
    def coeffs(self):
        return self._coeffs

    def __repr__(self):
        return f"HermiteField({self.model.kind.value}, n={self.model.n}, N={self.degree}, {dict(self._coeffs)})"

    def __eq__(self, other):
        return (
            isinstance(other, HermiteField)
            and self.model == other.model
            and self.degree == other.degree
            and dict(self._coeffs) == dict(other._coeffs)
        )

    def __hash__(self):
        return hash((self.model, self.degree, tuple(self._coeffs.items())))

    def map_coeffs(self, fn) -> "HermiteField":
        """New field with ``a_k -> fn(k, a_k)``; same degree and sparsity."""
        return HermiteField(self.model, {k: fn(k, a) for k, a in self._coeffs.items()}, self.degree)

    def __add__(self, other):
        if not isinstance(other, HermiteField) or other.model != self.model:
            return NotImplemented
        out = dict(self._coeffs)
        for k, a in other.coeffs.items():
            out[k] = out.get(k, 0.0) + a
        return HermiteField(self.model, out, max(self.degree, other.degree))

    def __mul__(self, scalar):
        return self.map_coeffs(lambda k, a: a * float(scalar))

    __rmul__ = __mul__

    def __call__(self, points):
        return evaluate(self, points)


def _total_degree(model, key) -> int:
    return key[1] if model.kind is Kind.CYLINDER else sum(key)


def eigenvalue(model: SolitonModel, key) -> float:
    """Eigenvalue ``lambda`` with ``Lap_f h = -lambda h`` for basis element ``key``."""
    if model.kind is Kind.CYLINDER:
        l, k = key
        return model.sphere_eigenvalue(l) + k / 2.0
    return sum(key) / 2.0


def basis_norm_sq(model: SolitonModel, key) -> float:
    """``||h_key||^2`` in ``L^2(e^{-f} dVol)``."""
    if model.kind is Kind.CYLINDER:
        _, k = key
        return math.exp(-model.potential_constant) * math.sqrt(4 * math.pi) * math.factorial(k)
    return (4 * math.pi) ** (model.n / 2) * math.prod(math.factorial(k) for k in key)


# --- constructors -----------------------------------------------------------


def constant_field(model, value=1.0, degree=0) -> HermiteField:
    if model.kind is Kind.CYLINDER:
        # constant function = sqrt(vol(S)) * Y_0; stored through the harmonic
        vol = _sphere_volume(model.n - 1, model.sphere_radius)
        return HermiteField(model, {(0, 0): value * math.sqrt(vol)}, degree)
    return HermiteField(model, {(0,) * model.n: value}, degree)


def linear_field(model, c, degree=1) -> HermiteField:
    """``c . y`` on R^n (``y_i = sqrt(2) h_{e_i}``)."""
    _require_euclidean(model)
    c = np.broadcast_to(np.asarray(c, dtype=float), (model.n,))
    coeffs = {}
    for i in range(model.n):
        key = tuple(1 if j == i else 0 for j in range(model.n))
        coeffs[key] = SQRT2 * c[i]
    return HermiteField(model, coeffs, degree)


def potential_field(model, degree=2) -> HermiteField:
    """``f - n/2`` (the lambda = 1 eigenfunction shared by every soliton)."""
    if model.kind is Kind.CYLINDER:
        # f - n/2 = z^2/4 - 1/2 = h_2(z)/2, times the constant harmonic
        vol = _sphere_volume(model.n - 1, model.sphere_radius)
        return HermiteField(model, {(0, 2): 0.5 * math.sqrt(vol)}, degree)
    coeffs = {}
    for i in range(model.n):
        coeffs[tuple(2 if j == i else 0 for j in range(model.n))] = 0.5
    return HermiteField(model, coeffs, degree)


def random_field(model, degree, rng) -> HermiteField:
    """Coefficients uniform in [-1, 1] on every index up to ``degree``."""
    _require_euclidean(model)
    keys = multi_indices(model.n, degree)
    vals = rng.uniform(-1.0, 1.0, size=len(keys))
    return HermiteField(model, dict(zip(keys, vals)), degree)


def _sphere_volume(m, radius):
    """Volume of the round ``S^m`` of the given radius."""
    return 2 * math.pi ** ((m + 1) / 2) / math.gamma((m + 1) / 2) * radius**m


def _require_euclidean(model):
    if model.kind is not Kind.EUCLIDEAN:
        raise ConfigurationError("operation is defined for the Euclidean model only")


# --- semigroup --------------------------------------------------------------


def evolve(field: HermiteField, t: float) -> HermiteField:
    """Exact ``P_t``: ``a_k -> exp(-lambda_k t) a_k``."""
    if t < 0:
        raise DomainError(f"negative time {t}")
    model = field.model
    return field.map_coeffs(lambda k, a: math.exp(-eigenvalue(model, k) * t) * a)


def apply_drift_laplacian(field: HermiteField) -> HermiteField:
    """``Lap_f`` on coefficients (also the time derivative of ``P_t v``)."""
    model = field.model
    return field.map_coeffs(lambda k, a: -eigenvalue(model, k) * a)


def parseval_norm_sq(field: HermiteField) -> float:
    return math.fsum(a * a * basis_norm_sq(field.model, k) for k, a in field.coeffs.items())


# --- pointwise evaluation (Euclidean) ---------------------------------------


def _axis_tables(points, degree, deriv=0):
    """``T[i][j, m] = d^deriv/dy^deriv He_j(y_{m,i}/sqrt 2)``."""
    x = points / SQRT2
    tables = []
    for i in range(points.shape[1]):
        rows = np.zeros((degree + 1, points.shape[0]))
        for j in range(deriv, degree + 1):
            # d/dy He_j(y/sqrt2) = j/sqrt2 He_{j-1}(y/sqrt2)
            scale = math.perm(j, deriv) / SQRT2**deriv
            rows[j] = scale * He.hermeval(x[:, i], _unit(j - deriv))
        tables.append(rows)
    return tables


def _unit(j):
    e = np.zeros(j + 1)
    e[j] = 1.0
    return e


def evaluate(field: HermiteField, points) -> np.ndarray:
    """Pointwise values on the Euclidean model; ``points`` has shape ``(M, n)`` or ``(n,)``."""
    _require_euclidean(field.model)
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = pts.reshape(-1, field.model.n)
    tabs = _axis_tables(pts, field.degree)
    out = np.zeros(pts.shape[0])
    for key, a in field.coeffs.items():
        term = np.full(pts.shape[0], a)
        for i, ki in enumerate(key):
            term = term * tabs[i][ki]
        out += term
    return out[0] if single else out


def drift_laplacian_pointwise(field: HermiteField, points) -> np.ndarray:
    """``Lap v - (y/2).grad v`` from analytic derivatives of the Hermite factors."""
    _require_euclidean(field.model)
    pts = np.asarray(points, dtype=float).reshape(-1, field.model.n)
    t0 = _axis_tables(pts, field.degree)
    t1 = _axis_tables(pts, field.degree, 1)
    t2 = _axis_tables(pts, field.degree, 2)
    n = field.model.n
    out = np.zeros(pts.shape[0])
    for key, a in field.coeffs.items():
        for i in range(n):
            others = np.full(pts.shape[0], a)
            for j, kj in enumerate(key):
                if j != i:
                    others = others * t0[j][kj]
            out += others * (t2[i][key[i]] - pts[:, i] / 2.0 * t1[i][key[i]])
    return out


def to_poly(field: HermiteField) -> Poly:
    """Monomial-basis form of a Euclidean field."""
    _require_euclidean(field.model)
    n = field.model.n
    coef = np.zeros((field.degree + 1,) * n)
    for key, a in field.coeffs.items():
        factors = []
        for k in key:
            c = He.herme2poly(_unit(k))
            factors.append(c / SQRT2 ** np.arange(k + 1))
        outer = factors[0]
        for fct in factors[1:]:
            outer = np.multiply.outer(outer, fct)
        coef[tuple(slice(0, k + 1) for k in key)] += a * outer
    return Poly(coef)


# --- Gaussian closed-form solutions -----------------------------------------


class Family(enum.Enum):
    REVERSE = "reverse"
    FORWARD = "forward"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ConfigurationError(f"unknown Gaussian family {value!r}") from None


@dataclass(frozen=True)
class GaussianProfile:
    """``A(t) exp(B(t) |y|^2)`` on R^n.

    REVERSE: ``A = (c + e^{-t})^{-n/2}``, ``B = 1/(4(c e^t + 1))``, ``c >= 0``.
    FORWARD: ``A = (c - e^{-t})^{-n/2}``, ``B = -1/(4(c e^t - 1))``, ``c >= 1``.
    """

    family: Family
    c: float
    n: int
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if self.n < 1:
            raise ConfigurationError("n must be >= 1")
        if self.t < 0:
            raise DomainError(f"negative time {self.t}")
        if self.family is Family.REVERSE and self.c < 0:
            raise DomainError("reverse profile needs c >= 0")
        if self.family is Family.FORWARD:
            if self.c < 1:
                raise DomainError("forward profile needs c >= 1")
            if self.c - math.exp(-self.t) <= 0:
                raise DomainError(f"forward profile with c={self.c} is singular at t={self.t}")

    @property
    def amplitude(self) -> float:
        s = math.exp(-self.t)
        base = self.c + s if self.family is Family.REVERSE else self.c - s
        return base ** (-self.n / 2)

    @property
    def exponent(self) -> float:
        e = math.exp(self.t)
        if self.family is Family.REVERSE:
            return 1.0 / (4.0 * (self.c * e + 1.0))
        return -1.0 / (4.0 * (self.c * e - 1.0))

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        r2 = np.sum(pts**2, axis=-1)
        return self.amplitude * np.exp(self.exponent * r2)

    def drift_laplacian(self, points):
        """Analytic ``Lap v - (y/2).grad v``."""
        pts = np.asarray(points, dtype=float)
        r2 = np.sum(pts**2, axis=-1)
        b = self.exponent
        return (2 * b * self.n + 4 * b * b * r2 - b * r2) * self(pts)

    def at(self, t) -> "GaussianProfile":
        return GaussianProfile(self.family, self.c, self.n, t)

    @property
    def critical_gamma(self) -> float:
        """Largest ``gamma`` with ``v^2 e^{-f/gamma}`` integrable (inf if none)."""
        b = self.exponent
        return math.inf if b <= 0 else 1.0 / (8.0 * b)


def evolve_gaussian(profile: GaussianProfile, t: float) -> GaussianProfile:
    """Advance a Gaussian solution by ``t``."""
    if t < 0:
        raise DomainError(f"negative time {t}")
    return profile.at(profile.t + t)


# --- weighted norms ---------------------------------------------------------


def weighted_norm_sq(v, gamma: float, order: int | None = None) -> float:
    """``int v^2 e^{-f/gamma} dVol``.

    Gaussian profiles use the closed Gaussian-moment formula; fields use a
    Gauss-Hermite rule exact for their degree.
    """
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    if isinstance(v, GaussianProfile):
        rate = 1.0 / (4.0 * gamma) - 2.0 * v.exponent
        if rate <= 0:
            raise DivergenceError(
                f"v^2 e^(-f/gamma) is not integrable for gamma={gamma} >= {v.critical_gamma}",
                critical_gamma=v.critical_gamma,
            )
        return v.amplitude**2 * (math.pi / rate) ** (v.n / 2)
    if isinstance(v, HermiteField):
        return _field_norm_sq(v, gamma, order)
    raise TypeError(f"unsupported input {type(v).__name__}")


def quadrature_norm_sq(v, gamma, order=60) -> float:
    """Independent quadrature of ``int v^2 e^{-f/gamma}`` for profiles and fields."""
    if isinstance(v, GaussianProfile):
        growth = 2.0 * max(v.exponent, 0.0)
        log_a2 = 2.0 * math.log(v.amplitude)

        # v^2 e^{-growth |y|^2} in log form; v^2 alone overflows at outer nodes
        def damped_sq(y):
            return np.exp(log_a2 + (2.0 * v.exponent - growth) * np.sum(y**2, axis=-1))

        return gaussian_integral(damped_sq, v.n, 1.0 / (4.0 * gamma), growth, order, damped=True)
    return _field_norm_sq(v, gamma, order)


def _field_norm_sq(field, gamma, order):
    model = field.model
    m = max(field.degree + 1, 2) if order is None else int(order)
    if m < field.degree + 1:
        raise ConfigurationError(f"order {m} is not exact for degree {field.degree}")
    if model.kind is Kind.CYLINDER:
        rule = gauss_rule(m, 1, gamma=gamma)
        by_l = {}
        for (l, k), a in field.coeffs.items():
            by_l.setdefault(l, {})[(k,)] = a
        total = 0.0
        line = SolitonModel(Kind.EUCLIDEAN, 1)
        for l in sorted(by_l):
            sub = HermiteField(line, by_l[l], field.degree)
            total += integrate(lambda y, s=sub: evaluate(s, y) ** 2, rule)
        return math.exp(-model.potential_constant / gamma) * total
    rule = gauss_rule(m, model.n, gamma=gamma)
    return integrate(lambda y: evaluate(field, y) ** 2, rule)


def project(func, model: SolitonModel, degree: int = DEFAULT_DEGREE, order: int | None = None):
    """Truncated eigen-expansion of ``func`` in ``L^2(e^{-f} dy)``.

    Returns ``(field, residual_norm)`` where ``residual_norm`` is the norm of
    the discarded tail, estimated with the same rule.
    """
    _require_euclidean(model)
    if degree < 0:
        raise ConfigurationError("degree must be >= 0")
    m = 2 * degree + 8 if order is None else int(order)
    if m < degree + 1:
        raise ConfigurationError(f"quadrature order {m} is too low for degree {degree}")
    rule = gauss_rule(m, model.n, gamma=1.0)
    nodes, weights = rule.nodes_weights()
    vals = np.asarray(func(nodes), dtype=float).reshape(-1)
    tabs = _axis_tables(nodes, degree)
    coeffs = {}
    tail = vals.copy()
    for key in multi_indices(model.n, degree):
        h = np.prod([tabs[i][k] for i, k in enumerate(key)], axis=0)
        a = float(np.dot(weights, vals * h)) / basis_norm_sq(model, key)
        coeffs[key] = a
        tail -= a * h
    residual = math.sqrt(float(np.dot(weights, tail**2)))
    return HermiteField(model, coeffs, degree), residual


def normalized_random_field(model, degree, rng) -> HermiteField:
    """Coefficients uniform in [-1, 1] against the orthonormalized basis."""
    raw = random_field(model, degree, rng)
    return raw.map_coeffs(lambda k, a: a / math.sqrt(basis_norm_sq(model, k)))


# --- comparison with the finite-difference oracle ---------------------------


@functools.lru_cache(maxsize=256)
def _fd_basis(j: int, t: float, grid: FDGrid):
    res = fd_evolve(lambda y: He.hermeval(y / SQRT2, _unit(j)), t, grid)
    res.x.setflags(write=False)
    res.values.setflags(write=False)
    return res.x, res.values


def fd_evolve_field(field: HermiteField, t: float, grid: FDGrid | None = None, window: float = 4.0, stride: int = 1):
    """Evolve a Euclidean field with the 1D oracle, one Hermite factor at a time.

    ``P_t`` factorizes over axes, so each ``He_j(y/sqrt 2)`` is evolved on
    its own and the products are reassembled.  Returns ``(nodes, values)``
    on the tensor grid of oracle nodes with ``|y_i| <= window``.
    """
    _require_euclidean(field.model)
    grid = grid or FDGrid()
    if grid.radial_dim is not None:
        raise ConfigurationError("axis-wise evolution needs the 1D grid")
    n = field.model.n
    degree = field.degree
    factors = {}
    for j in range(degree + 1):
        x, vals = _fd_basis(j, float(t), grid)
        mask = np.abs(x) <= window + 1e-12
        factors[j] = vals[mask][::stride]
        axis = x[mask][::stride]
    mesh = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)
    values = np.zeros(mesh.shape[0])
    for key, a in field.coeffs.items():
        prod = np.full(1, a)
        for k in key:
            prod = np.multiply.outer(prod, factors[k]).reshape(-1)
        values += prod
    return mesh, values


@dataclass(frozen=True)
class OracleComparison:
    t: float
    sup_error: float
    sup_error_refined: float
    scale: float  # sup |P_t v| on the window

    @property
    def ratio(self) -> float:
        return self.sup_error / self.sup_error_refined if self.sup_error_refined > 0 else math.inf

    @property
    def relative_error(self) -> float:
        return self.sup_error / self.scale if self.scale > 0 else self.sup_error


def oracle_discrepancy(field: HermiteField, t: float, grid: FDGrid | None = None, window: float = 4.0) -> OracleComparison:
    """Sup-norm gap between :func:`evolve` and the oracle on ``|y| <= window``, default and refined grids."""
    grid = grid or FDGrid()
    stride = 1 if field.model.n == 1 else 8
    errs = []
    scale = 0.0
    for g, s in ((grid, stride), (grid.refined(), 2 * stride)):
        mesh, vals = fd_evolve_field(field, t, g, window, s)
        exact = evaluate(evolve(field, t), mesh)
        errs.append(float(np.max(np.abs(vals - exact))))
        scale = float(np.max(np.abs(exact)))
    return OracleComparison(t, errs[0], errs[1], scale)
