import math

import numpy as np
import pytest

from driftheat import ConfigurationError, DomainError
from driftheat.oracles import FDGrid, fd_evolve, gauss_rule, gaussian_integral, integrate, lq_norm
from driftheat.spectral import GaussianProfile, quadrature_norm_sq, weighted_norm_sq

SQ4PI = math.sqrt(4 * math.pi)


def test_gaussian_mass():
    assert gaussian_integral(lambda y: np.ones(len(y)), 1, 0.25) == pytest.approx(SQ4PI, rel=1e-14)


def test_second_moment():
    val = gaussian_integral(lambda y: y[:, 0] ** 2, 1, 0.25)
    assert val == pytest.approx(2 * SQ4PI, rel=1e-13)


def test_integrate_with_rule():
    rule = gauss_rule(20, 2, gamma=1.0)
    assert integrate(lambda y: np.ones(len(y)), rule) == pytest.approx(4 * math.pi, rel=1e-13)


def test_reverse_profile_norm_quadrature_vs_closed():
    v = GaussianProfile("reverse", 2.0, 1)
    closed = weighted_norm_sq(v, 1.0)
    assert closed == pytest.approx(math.sqrt(4 * math.pi / 3), rel=1e-14)
    assert quadrature_norm_sq(v, 1.0) == pytest.approx(closed, rel=1e-8)


@pytest.mark.parametrize("q", [2.0, 4.0])
def test_lq_constant(q):
    val = lq_norm(lambda y: np.ones(len(y)), q, 1.0, 1)
    assert val == pytest.approx((4 * math.pi) ** (1 / (2 * q)), rel=1e-12)


def test_lq_h1():
    # h_1(y) = y / sqrt2 has squared norm sqrt(4 pi) * 1!
    val = lq_norm(lambda y: y[:, 0] / math.sqrt(2), 2.0, 1.0, 1)
    assert val == pytest.approx(math.sqrt(SQ4PI), rel=1e-12)


def test_lq_identity_function():
    val = lq_norm(lambda y: y[:, 0], 2.0, 1.0, 1)
    assert val == pytest.approx(math.sqrt(2 * SQ4PI), rel=1e-12)


def test_fd_constant():
    res = fd_evolve(lambda x: np.ones_like(x), 1.0)
    inner = np.abs(res.x) <= 4
    assert np.max(np.abs(res.values[inner] - 1)) < 1e-10


def test_fd_linear():
    res = fd_evolve(lambda x: x, 1.0)
    x = res.x[np.abs(res.x) <= 4]
    assert np.max(np.abs(res.at(x) - math.exp(-0.5) * x)) < 1e-3


def test_fd_quadratic_at_origin():
    res = fd_evolve(lambda x: x**2 / 4 - 0.5, 1.0)
    assert res.at(0.0) == pytest.approx(-0.5 * math.exp(-1), abs=1e-4)
    assert res.at(0.0) == pytest.approx(-0.18394, abs=1e-4)


def test_fd_refinement_ratio():
    exact = lambda x: math.exp(-1) * (x**2 / 4 - 0.5)  # noqa: E731
    errs = []
    for grid in (FDGrid(), FDGrid().refined()):
        res = fd_evolve(lambda x: x**2 / 4 - 0.5, 1.0, grid)
        x = np.linspace(-4, 4, 81)
        errs.append(np.max(np.abs(res.at(x) - exact(x))))
    assert errs[0] / errs[1] > 3


def test_fd_radial_constant():
    res = fd_evolve(lambda r: np.ones_like(r), 0.5, FDGrid(radial_dim=3, nodes=801))
    assert np.max(np.abs(res.values[res.x <= 4] - 1)) < 1e-10


def test_fd_radial_quadratic():
    # |y|^2/4 - n/2 decays like e^{-t} in any dimension
    n = 2
    res = fd_evolve(lambda r: r**2 / 4 - n / 2, 1.0, FDGrid(radial_dim=n))
    assert res.at(0.0) == pytest.approx(-math.exp(-1), abs=1e-3)


def test_fd_negative_time():
    with pytest.raises(DomainError):
        fd_evolve(lambda x: x, -0.1)


@pytest.mark.parametrize("kw", [{"nodes": 3}, {"length": 0.0}, {"dt": -1.0}, {"scheme": "euler"}])
def test_fd_grid_validation(kw):
    with pytest.raises(ConfigurationError):
        FDGrid(**kw)


def test_fd_bad_samples():
    with pytest.raises(ConfigurationError):
        fd_evolve(np.ones(5), 1.0)
