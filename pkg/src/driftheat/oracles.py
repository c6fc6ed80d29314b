"""Independent numerical oracles.

Scaled Gauss-Hermite quadrature for Gaussian-weighted integrals, and a
Crank-Nicolson solver for the drift heat equation ``v_t = v'' - (y/2) v'``
in one dimension or for radial data in R^n.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import ConfigurationError, DivergenceError, DomainError

MAX_TENSOR_NODES = 4_000_000


@functools.lru_cache(maxsize=64)
def _hermgauss(order: int):
    x, w = np.polynomial.hermite.hermgauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor Gauss-Hermite rule for the weight ``exp(-|y - center|^2 / (2 sigma^2))``.

    Exact for polynomials of degree ``<= 2*order - 1`` in each variable.
    """

    order: int
    n: int
    sigma: float
    center: tuple = ()

    def __post_init__(self):
        if self.order < 1:
            raise ConfigurationError("quadrature order must be >= 1")
        if self.n < 1:
            raise ConfigurationError("dimension must be >= 1")
        if not self.sigma > 0:
            raise ConfigurationError("sigma must be positive")
        if self.order**self.n > MAX_TENSOR_NODES:
            raise ConfigurationError(
                f"tensor rule with {self.order}^{self.n} nodes exceeds {MAX_TENSOR_NODES}"
            )
        if not self.center:
            object.__setattr__(self, "center", (0.0,) * self.n)
        elif len(self.center) != self.n:
            raise ConfigurationError("center has the wrong length")

    def axis(self):
        """One-dimensional nodes and weights (without centering)."""
        x, w = _hermgauss(self.order)
        s = math.sqrt(2.0) * self.sigma
        return s * x, s * w

    def nodes_weights(self):
        """Tensorized ``(order**n, n)`` nodes and ``(order**n,)`` weights."""
        x, w = self.axis()
        grids = np.meshgrid(*([x] * self.n), indexing="ij")
        nodes = np.stack([g.reshape(-1) for g in grids], axis=-1) + np.asarray(self.center)
        wgrids = np.meshgrid(*([w] * self.n), indexing="ij")
        weights = functools.reduce(np.multiply, [g.reshape(-1) for g in wgrids])
        return nodes, weights


def gauss_rule(order, n, gamma=None, sigma=None, decay=None, center=None) -> QuadratureRule:
    """Rule matched to one of three equivalent weight parametrizations.

    ``gamma``: weight ``exp(-|y|^2/(4 gamma))`` (i.e. ``e^{-f/gamma}`` on the
    Gaussian shrinker), ``sigma^2 = 2 gamma``. ``decay``: weight
    ``exp(-decay |y|^2)``. ``sigma``: given directly.
    """
    given = [a is not None for a in (gamma, sigma, decay)]
    if sum(given) != 1:
        raise ConfigurationError("give exactly one of gamma, sigma, decay")
    if gamma is not None:
        if not gamma > 0:
            raise DomainError("gamma must be positive")
        sigma = math.sqrt(2.0 * gamma)
    elif decay is not None:
        if not decay > 0:
            raise DivergenceError(f"non-positive Gaussian decay {decay}")
        sigma = math.sqrt(0.5 / decay)
    c = () if center is None else tuple(float(v) for v in np.ravel(center))
    return QuadratureRule(int(order), int(n), float(sigma), c)


def integrate(integrand, rule: QuadratureRule) -> float:
    """``int integrand(y) * weight(y) dy`` where ``weight`` is the rule's Gaussian.

    ``integrand`` maps an ``(M, n)`` node array to ``(M,)`` values.
    """
    nodes, weights = rule.nodes_weights()
    vals = np.asarray(integrand(nodes), dtype=float).reshape(-1)
    # dot keeps a fixed summation order -> deterministic
    return float(np.dot(weights, vals))


def gaussian_integral(func, n, decay, growth=0.0, order=40, center=None, damped=False) -> float:
    """``int func(y) exp(-decay |y|^2) dy`` over R^n.

    ``growth`` declares that ``func`` itself grows like ``exp(growth |y|^2)``
    (or ``exp(growth |y - center|^2)`` roughly); the rule is matched to the
    residual decay ``decay - growth`` and ``func * exp(-growth |y|^2)`` is
    evaluated at the nodes.  Integrability ``decay > growth`` is checked up
    front.  With ``damped=True`` the caller supplies ``func * exp(-growth |y|^2)``
    directly, which avoids overflow when ``func`` grows fast.
    """
    eff = decay - growth
    if not eff > 0:
        raise DivergenceError(
            f"integrand decay {decay} does not dominate growth {growth}",
            critical_gamma=(1.0 / (4.0 * growth)) if growth > 0 else None,
        )
    rule = gauss_rule(order, n, decay=eff, center=center)
    c = np.asarray(rule.center)

    def integrand(y):
        r2 = np.sum(y**2, axis=-1)
        rc2 = np.sum((y - c) ** 2, axis=-1)
        if damped:
            return np.asarray(func(y), dtype=float) * np.exp(eff * (rc2 - r2))
        return np.asarray(func(y), dtype=float) * np.exp(-decay * r2 + eff * rc2)

    return integrate(integrand, rule)


def lq_norm(func, q, gamma, n, order=80, growth=0.0, log_abs=None) -> float:
    """``(int |v|^q e^{-|y|^2/(4 gamma)} dy)^{1/q}`` by quadrature.

    ``growth`` is the Gaussian growth rate of ``|v|``; ``|v|^q`` then grows at
    ``q * growth``.  ``log_abs(y) = log|v(y)|``, when given, is used instead of
    ``func`` so that fast-growing data do not overflow at the outer nodes.
    """
    if q < 1:
        raise DomainError(f"q must be >= 1, got {q}")
    if log_abs is None:
        def log_abs(y):
            with np.errstate(divide="ignore"):
                return np.log(np.abs(func(y)))

    def damped(y):
        return np.exp(q * (log_abs(y) - growth * np.sum(y**2, axis=-1)))

    val = gaussian_integral(damped, n, 1.0 / (4.0 * gamma), growth=q * growth, order=order, damped=True)
    return val ** (1.0 / q)


# ---------------------------------------------------------------------------
# Crank-Nicolson oracle


@dataclass(frozen=True)
class FDGrid:
    """Grid for the Crank-Nicolson oracle.

    ``radial_dim = None`` means the 1D problem on ``[-length, length]``;
    an integer ``n`` means radial data in R^n on ``[0, length]``.
    """

    length: float = 12.0
    nodes: int = 2001
    dt: float = 1e-3
    radial_dim: int | None = None
    scheme: str = "crank-nicolson"

    def __post_init__(self):
        if self.nodes < 5:
            raise ConfigurationError("need at least 5 grid nodes")
        if not (self.length > 0 and self.dt > 0):
            raise ConfigurationError("length and dt must be positive")
        if self.radial_dim is not None and self.radial_dim < 1:
            raise ConfigurationError("radial_dim must be >= 1")
        if self.scheme != "crank-nicolson":
            raise ConfigurationError(f"unsupported scheme {self.scheme!r}")

    @property
    def x(self) -> np.ndarray:
        if self.radial_dim is None:
            return np.linspace(-self.length, self.length, self.nodes)
        return np.linspace(0.0, self.length, self.nodes)

    @property
    def h(self) -> float:
        span = 2 * self.length if self.radial_dim is None else self.length
        return span / (self.nodes - 1)

    def refined(self) -> "FDGrid":
        """Halve both the spatial and the temporal step."""
        return FDGrid(self.length, 2 * self.nodes - 1, self.dt / 2, self.radial_dim, self.scheme)


@dataclass
class FDResult:
    x: np.ndarray
    values: np.ndarray
    t: float
    steps: int
    boundary_flux: float
    notes: list = field(default_factory=list)

    def at(self, points) -> np.ndarray:
        """Linear interpolation of the solution (radial: at ``|points|``)."""
        return np.interp(np.asarray(points, dtype=float), self.x, self.values)


def _operator_bands(grid: FDGrid):
    """Tridiagonal coefficients (lower, diag, upper) of the discrete drift Laplacian."""
    x = grid.x
    h = grid.h
    lower = np.full(x.shape, 1.0 / h**2)
    upper = np.full(x.shape, 1.0 / h**2)
    diag = np.full(x.shape, -2.0 / h**2)
    if grid.radial_dim is None:
        drift = -x / 2.0
    else:
        n = grid.radial_dim
        with np.errstate(divide="ignore", invalid="ignore"):
            drift = np.where(x > 0, (n - 1) / x, 0.0) - x / 2.0
    lower -= drift / (2 * h)
    upper += drift / (2 * h)
    if grid.radial_dim is not None:
        # symmetry at r = 0: v_{-1} = v_1 and the singular term tends to (n-1) v''
        n = grid.radial_dim
        diag[0] = -2.0 * n / h**2
        upper[0] = 2.0 * n / h**2
        lower[0] = 0.0
    return lower, diag, upper


def fd_evolve(initial, t: float, grid: FDGrid | None = None) -> FDResult:
    """Crank-Nicolson solution of the drift heat equation at time ``t``.

    ``initial`` is a callable on grid points or an array of samples on
    ``grid.x``. The far boundary (both ends in 1D) is held at zero; the
    returned ``boundary_flux`` is the largest weighted flux
    ``|e^{-f} v'|`` seen at the artificial boundary over the run.
    """
    if t < 0:
        raise DomainError(f"negative time {t}")
    grid = grid or FDGrid()
    x = grid.x
    v = np.array(initial(x) if callable(initial) else initial, dtype=float)
    if v.shape != x.shape:
        raise ConfigurationError("initial samples do not match the grid")
    steps = int(math.ceil(t / grid.dt - 1e-9)) if t > 0 else 0
    notes = []
    if steps == 0:
        return FDResult(x, v, t, 0, 0.0, notes)
    dt = t / steps

    lower, diag, upper = _operator_bands(grid)
    # rows 1..end-1 (and row 0 when radial) are unknowns; Dirichlet zero at the far end(s)
    interior = slice(0 if grid.radial_dim is not None else 1, -1)
    lo, di, up = lower[interior], diag[interior], upper[interior]
    m = di.shape[0]
    ab = np.zeros((3, m))
    ab[0, 1:] = -0.5 * dt * up[:-1]
    ab[1, :] = 1.0 - 0.5 * dt * di
    ab[2, :-1] = -0.5 * dt * lo[1:]

    v[-1] = 0.0
    if grid.radial_dim is None:
        v[0] = 0.0
    weight_edge = math.exp(-grid.length**2 / 4.0)
    flux = 0.0
    h = grid.h
    for _ in range(steps):
        u = v[interior]
        rhs = u + 0.5 * dt * di * u
        rhs[1:] += 0.5 * dt * lo[1:] * u[:-1]
        rhs[:-1] += 0.5 * dt * up[:-1] * u[1:]
        v[interior] = solve_banded((1, 1), ab, rhs)
        edge = abs(v[-2] - v[-1]) / h
        if grid.radial_dim is None:
            edge = max(edge, abs(v[1] - v[0]) / h)
        flux = max(flux, weight_edge * edge)
    if flux > 1e-8:
        notes.append(f"boundary flux {flux:.3e} is not negligible; enlarge the domain")
    return FDResult(x, v, t, steps, flux, notes)


def fd_drift_laplacian(result: FDResult) -> np.ndarray:
    """Second-order finite-difference drift Laplacian of a 1D FD solution."""
    v = result.values
    h = result.x[1] - result.x[0]
    out = np.zeros_like(v)
    out[1:-1] = (v[2:] - 2 * v[1:-1] + v[:-2]) / h**2 - result.x[1:-1] / 2.0 * (v[2:] - v[:-2]) / (2 * h)
    return out


def multi_indices(n: int, degree: int):
    """All length-``n`` multi-indices of total degree ``<= degree``, graded-lex order."""
    out = []
    for total in range(degree + 1):
        for combo in itertools.product(range(total + 1), repeat=n):
            if sum(combo) == total:
                out.append(tuple(combo))
    return sorted(out, key=lambda k: (sum(k), tuple(-c for c in k)))
