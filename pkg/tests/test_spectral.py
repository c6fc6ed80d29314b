import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from driftheat import (
    ConfigurationError,
    DivergenceError,
    DomainError,
    GaussianProfile,
    HermiteField,
    evolve,
    evolve_gaussian,
    make_model,
    project,
    weighted_norm_sq,
)
from driftheat.spectral import (
    apply_drift_laplacian,
    basis_norm_sq,
    constant_field,
    drift_laplacian_pointwise,
    eigenvalue,
    evaluate,
    linear_field,
    normalized_random_field,
    oracle_discrepancy,
    parseval_norm_sq,
    potential_field,
    quadrature_norm_sq,
    random_field,
)

E1 = make_model("euclidean", 1)


def test_constant_is_stationary():
    v = constant_field(E1)
    assert evaluate(evolve(v, 3.7), [[0.4]])[0] == pytest.approx(1.0)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_linear_row(n):
    m = make_model("euclidean", n)
    c = np.arange(1, n + 1) * 0.5
    v = evolve(linear_field(m, c), 0.8)
    y = np.linspace(-2, 2, 3 * n).reshape(3, n)
    np.testing.assert_allclose(evaluate(v, y), math.exp(-0.4) * y @ c, rtol=1e-13)


@pytest.mark.parametrize("n", [1, 2, 4])
def test_potential_row(n):
    m = make_model("euclidean", n)
    v = evolve(potential_field(m), 1.0)
    assert evaluate(v, np.zeros(n)) == pytest.approx(-(n / 2) * math.exp(-1), rel=1e-13)
    y = np.full((1, n), 1.3)
    assert evaluate(v, y)[0] == pytest.approx(math.exp(-1) * (np.sum(y**2) / 4 - n / 2), rel=1e-12)


def test_negative_time():
    with pytest.raises(DomainError):
        evolve(constant_field(E1), -1e-9)


def test_immutable():
    v = constant_field(E1)
    with pytest.raises(AttributeError):
        v.degree = 3


def test_degree_guard():
    with pytest.raises(ConfigurationError):
        HermiteField(E1, {(3,): 1.0}, degree=2)


def test_basis_norms():
    m = make_model("euclidean", 2)
    assert basis_norm_sq(m, (2, 3)) == pytest.approx(4 * math.pi * 2 * 6)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 3), st.floats(0, 3), st.floats(0, 3))
def test_semigroup_law(seed, n, s, t):
    v = random_field(make_model("euclidean", n), 4, np.random.default_rng(seed))
    a = evolve(evolve(v, s), t).coeffs
    b = evolve(v, s + t).coeffs
    for k in a:
        assert a[k] == pytest.approx(b[k], rel=1e-13, abs=1e-300)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_eigen_relation_pointwise(n):
    m = make_model("euclidean", n)
    rng = np.random.default_rng(n)
    pts = rng.uniform(-2, 2, size=(25, n))
    for key in [(0,) * n, (1,) + (0,) * (n - 1), (2,) * n, (4,) + (1,) * (n - 1)]:
        h = HermiteField(m, {key: 1.0})
        res = drift_laplacian_pointwise(h, pts) + eigenvalue(m, key) * evaluate(h, pts)
        assert np.max(np.abs(res)) < 1e-10


@pytest.mark.parametrize("n", [1, 2])
def test_parseval(n):
    v = random_field(make_model("euclidean", n), 6, np.random.default_rng(5))
    assert weighted_norm_sq(v, 1.0) == pytest.approx(parseval_norm_sq(v), rel=1e-10)


def test_cylinder_parseval_and_eigenvalues():
    m = make_model("cylinder", 3)
    v = HermiteField(m, {(0, 0): 1.0, (1, 2): 0.5, (2, 1): -0.3})
    assert weighted_norm_sq(v, 1.0) == pytest.approx(parseval_norm_sq(v), rel=1e-10)
    # S^2 of radius sqrt2 has Laplace eigenvalues l(l+1)/2
    assert eigenvalue(m, (1, 0)) == pytest.approx(1.0)
    assert eigenvalue(m, (2, 3)) == pytest.approx(3.0 + 1.5)


def test_constant_norm_closed_form():
    assert weighted_norm_sq(constant_field(E1), 1.0) == pytest.approx(math.sqrt(4 * math.pi))
    assert weighted_norm_sq(constant_field(make_model("euclidean", 3)), 1.7) == pytest.approx(
        (4 * math.pi * 1.7) ** 1.5
    )


@pytest.mark.parametrize("n,t,gamma", [(1, 0.5, 1.0), (2, 1.0, 1.5), (3, 2.0, 0.75)])
def test_linear_norm_closed_form(n, t, gamma):
    m = make_model("euclidean", n)
    c = np.linspace(0.5, -1, n)
    got = weighted_norm_sq(evolve(linear_field(m, c), t), gamma)
    want = 2 ** (n + 1) * math.pi ** (n / 2) * float(c @ c) * math.exp(-t) * gamma ** (n / 2 + 1)
    assert got == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("n,c,t,gamma", [(1, 2.0, 0.0, 1.0), (2, 1.5, 0.7, 1.2), (1, 3.0, 2.0, 4.0)])
def test_reverse_norm_closed_form(n, c, t, gamma):
    v = GaussianProfile("reverse", c, n, t)
    e = math.exp(t)
    want = (2 * math.pi * e / (((c * e + 1) / (2 * gamma) - 1) * (c + 1 / e))) ** (n / 2)
    assert weighted_norm_sq(v, gamma) == pytest.approx(want, rel=1e-12)
    assert quadrature_norm_sq(v, gamma) == pytest.approx(want, rel=1e-8)


def test_divergence_reports_critical_gamma():
    v = GaussianProfile("reverse", 2.0, 1)
    with pytest.raises(DivergenceError) as err:
        weighted_norm_sq(v, 2.0)
    assert err.value.critical_gamma == pytest.approx(1.5)


def test_profile_examples():
    v = GaussianProfile("reverse", 2.0, 1)
    assert v.amplitude == pytest.approx(3**-0.5)
    assert v.exponent == pytest.approx(1 / 12)
    w = evolve_gaussian(v, math.log(2))
    assert w.amplitude == pytest.approx(2.5**-0.5)
    assert w.exponent == pytest.approx(1 / 20)


def test_forward_c1_rejected_at_zero():
    with pytest.raises(DomainError):
        GaussianProfile("forward", 1.0, 1)
    GaussianProfile("forward", 1.0, 1, 0.1)
    GaussianProfile("forward", 1.2, 1)


@pytest.mark.parametrize("family,c", [("reverse", -0.1), ("forward", 0.9)])
def test_profile_constraints(family, c):
    with pytest.raises(DomainError):
        GaussianProfile(family, c, 1)


@pytest.mark.parametrize("family,c,n", [("reverse", 0.5, 1), ("reverse", 2.0, 3), ("forward", 1.5, 2), ("forward", 1.0, 1)])
def test_profile_solves_pde(family, c, n):
    h = 1e-4
    t = 0.6
    v = GaussianProfile(family, c, n, t)
    y = np.random.default_rng(2).uniform(-2, 2, size=(10, n))
    dvdt = (v.at(t + h)(y) - v.at(t - h)(y)) / (2 * h)
    assert np.max(np.abs(dvdt - v.drift_laplacian(y))) < 1e-6


def test_project_y_squared():
    field, resid = project(lambda y: y[:, 0] ** 2, E1, 2)
    assert field.coeffs[(0,)] == pytest.approx(2.0)
    assert field.coeffs[(2,)] == pytest.approx(2.0)
    assert field.coeffs[(1,)] == pytest.approx(0.0, abs=1e-13)
    assert resid < 1e-12


def test_project_drops_h3():
    h3 = HermiteField(E1, {(3,): 1.0})
    field, resid = project(lambda y: evaluate(h3, y), E1, 2)
    assert all(abs(a) < 1e-12 for a in field.coeffs.values())
    assert resid == pytest.approx(math.sqrt(basis_norm_sq(E1, (3,))), rel=1e-10)


def test_project_constant():
    field, resid = project(lambda y: np.ones(len(y)), E1, 0)
    assert field.coeffs[(0,)] == pytest.approx(1.0)
    assert resid == pytest.approx(0.0, abs=1e-12)


def test_project_order_too_low():
    with pytest.raises(ConfigurationError):
        project(lambda y: y[:, 0], E1, 8, order=4)


def test_generator_on_coefficients():
    v = HermiteField(E1, {(0,): 1.0, (3,): 2.0})
    assert apply_drift_laplacian(v).coeffs[(3,)] == pytest.approx(-3.0)


@pytest.mark.slow
def test_oracle_discrepancy_n2():
    v = normalized_random_field(make_model("euclidean", 2), 3, np.random.default_rng(0))
    cmp = oracle_discrepancy(v, 0.5)
    assert cmp.sup_error < 1e-3
    assert cmp.ratio > 3
