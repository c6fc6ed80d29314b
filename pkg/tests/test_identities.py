import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from driftheat import ConfigurationError, HermiteField, make_model
from driftheat.identities import (
    JetInput,
    bochner_sides,
    bochner_subsolution_residual,
    divergence_identity_residual,
    divergence_identity_residual_fd,
    divergence_identity_sides,
    gaussian_potential,
    jet_from_field,
    jet_from_polys,
    laplacian_commutes,
    laplacian_commutes_fd,
    random_bochner_sweep,
    random_divergence_sweep,
)
from driftheat.polys import Poly
from driftheat.spectral import random_field

E1 = make_model("euclidean", 1)


def test_hand_anchor():
    jet = jet_from_polys(Poly.constant(1.0, 1), gaussian_potential(1), [1.0], alpha=1.0, gamma=2.0)
    lhs, rhs = divergence_identity_sides(jet)
    want = -0.375 * math.exp(-0.125)
    assert want == pytest.approx(-0.330936, abs=1e-6)
    assert abs(lhs - want) < 1e-12 and abs(rhs - want) < 1e-12


def test_zero_function():
    jet = jet_from_polys(Poly.constant(0.0, 2), gaussian_potential(2), [0.3, -0.2], 0.5, 1.3)
    assert divergence_identity_sides(jet) == (0.0, 0.0)


def test_random_sweep():
    res = random_divergence_sweep(seed=0, count=300)
    assert res.max_residual < 1e-9


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 3), st.floats(-2, 2), st.floats(0.1, 5))
def test_divergence_property(seed, n, alpha, gamma):
    rng = np.random.default_rng(seed)
    jet = jet_from_polys(Poly.random(rng, n, 3), Poly.random(rng, n, 3), rng.uniform(-1, 1, n), alpha, gamma)
    assert divergence_identity_residual(jet) < 1e-9


def test_divergence_fd_mode():
    v = lambda y: math.sin(y[0]) + y[1] ** 2 * 0.3  # noqa: E731
    f = lambda y: np.sum(y**2) / 4 + 0.1 * math.cos(y[0] * y[1])  # noqa: E731
    assert divergence_identity_residual_fd(v, f, [0.4, -0.7], 0.6, 1.7, h=1e-3) < 1e-4


def test_jet_rejects_asymmetric_hessian():
    with pytest.raises(ConfigurationError):
        JetInput(np.zeros(2), 1.0, np.zeros(2), np.array([[0, 1], [0, 0.0]]), 0.0, np.zeros(2), np.eye(2))


def test_bochner_linear_evolved():
    h1 = HermiteField(E1, {(1,): math.sqrt(2)})  # the function y
    for t in (0.0, 0.5, 2.0):
        val = bochner_sides(jet_from_field(h1, t, [0.7]), t)
        assert val.lhs == pytest.approx(0.5 * math.exp(-t), rel=1e-13)
        assert val.residual < 1e-12


def test_bochner_h2_random_point():
    h2 = HermiteField(E1, {(2,): 1.0})
    rng = np.random.default_rng(1)
    for _ in range(10):
        assert bochner_subsolution_residual(jet_from_field(h2, 0.3, rng.uniform(-3, 3, 1)), 0.3) < 1e-10


def test_bochner_negative_curvature_equality_still_holds():
    rng = np.random.default_rng(4)
    y = Poly.variable(0, 2)
    z = Poly.variable(1, 2)
    f = -1.0 * (y * y) - 0.5 * (z * z)  # Hess f negative definite
    v = Poly.random(rng, 2, 3)
    val = bochner_sides(jet_from_polys(v, f, [0.2, 0.9], k=0.0), 0.4)
    assert not val.curvature_psd
    assert val.residual < 1e-10


def test_bochner_rate_k_is_not_an_identity():
    rng = np.random.default_rng(9)
    v = Poly.random(rng, 1, 3)
    jet = jet_from_polys(v, gaussian_potential(1), [0.5], k=1.0)
    assert bochner_subsolution_residual(jet, 0.7) < 1e-10
    assert bochner_subsolution_residual(jet, 0.7, rate=1.0) > 1e-3


def test_bochner_sweep():
    res, min_rhs = random_bochner_sweep(seed=3, count=50)
    assert res.max_residual < 1e-9
    assert min_rhs >= 0


@pytest.mark.parametrize("n", [1, 2, 3])
def test_laplacian_commutes_exact(n):
    v = random_field(make_model("euclidean", n), 5, np.random.default_rng(n))
    assert laplacian_commutes(v, 1.3) < 1e-15


def test_laplacian_commutes_constant():
    assert laplacian_commutes(HermiteField(E1, {(0,): 1.0}), 2.0) == 0.0


def test_laplacian_commutes_fd_h2():
    assert laplacian_commutes_fd(HermiteField(E1, {(2,): 1.0}), 1.0, 0.0) < 1e-3


def test_laplacian_commutes_fd_needs_1d():
    with pytest.raises(ConfigurationError):
        laplacian_commutes_fd(HermiteField(make_model("euclidean", 2), {(0, 0): 1.0}), 1.0)
