import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from driftheat import ConfigurationError, check_identities, make_model, perturb_potential, probe, rescaled_potential
from driftheat.models import SOLITON_CONSTANT, Kind


def test_euclidean_n1_at_two():
    p = probe(make_model("euclidean", 1), [2.0])
    assert p.f_value == 1.0
    assert p.f_gradient[0] == 1.0
    assert p.f_laplacian == 0.5
    assert p.R_value == 0.0


def test_euclidean_origin_n2():
    p = probe(make_model("euclidean", 2), [0.0, 0.0])
    assert p.f_value == 0.0
    np.testing.assert_array_equal(p.f_gradient, 0.0)
    np.testing.assert_array_equal(p.f_hessian, np.eye(2) / 2)


def test_euclidean_n1_at_three():
    p = probe(make_model("euclidean", 1), [3.0])
    assert p.grad_norm_sq == pytest.approx(9 / 4)
    assert p.f_value - p.R_value == pytest.approx(9 / 4)


def test_cylinder_equator():
    m = make_model("cylinder", 3)
    p = probe(m, [0.3, -1.1, 0.0])
    assert p.f_value == pytest.approx(1.0)
    assert p.R_value == pytest.approx(1.0)
    assert p.f_laplacian == pytest.approx(0.5)


def test_cylinder_z2():
    p = probe(make_model("cylinder", 3), [0.0, 0.0, 2.0])
    assert p.f_value == pytest.approx(2.0)
    assert p.grad_norm_sq == pytest.approx(1.0)
    assert p.R_value + p.grad_norm_sq == pytest.approx(p.f_value)


@pytest.mark.parametrize("kind,n", [("euclidean", 0), ("cylinder", 2), ("cylinder", 1), ("euclidean", 1.5)])
def test_bad_dimension(kind, n):
    with pytest.raises(ConfigurationError):
        make_model(kind, n)


def test_unknown_kind():
    with pytest.raises(ConfigurationError):
        make_model("torus", 3)


def test_soliton_constant_fixed():
    assert SOLITON_CONSTANT == 0.5


@pytest.mark.parametrize("kind,n", [("euclidean", 1), ("euclidean", 4), ("cylinder", 3), ("cylinder", 5)])
def test_identities_random_points(kind, n):
    rng = np.random.default_rng(3)
    rep = check_identities(make_model(kind, n), rng.uniform(-5, 5, size=(100, n)))
    assert rep.max_residual < 1e-12
    assert rep.min_R >= 0


def test_euclidean_identities_exact_zero():
    rng = np.random.default_rng(0)
    rep = check_identities(make_model("euclidean", 4), rng.normal(size=(100, 4)))
    assert rep.max_residual <= 4 * np.finfo(float).eps * 50


def test_perturbed_negative_control():
    m = perturb_potential(make_model("euclidean", 1), 0.1)
    rep = check_identities(m, np.linspace(-3, 3, 11)[:, None])
    assert rep.scalar_gradient == pytest.approx(0.1, abs=1e-15)
    assert rep.scalar_laplacian == 0.0


def test_empty_points():
    with pytest.raises(ConfigurationError):
        check_identities(make_model("euclidean", 1), np.empty((0, 1)))


def test_wrong_point_length():
    with pytest.raises(ConfigurationError):
        probe(make_model("euclidean", 2), [1.0])


def test_rescaled_potential_examples():
    m = make_model("euclidean", 2)
    assert rescaled_potential(m, -0.25, np.array([2.0, 0.0])) == pytest.approx(1.0)
    x = np.array([[0.3, -1.7], [2.0, 2.0]])
    np.testing.assert_allclose(rescaled_potential(m, -1.0, x), m.potential(x))


def test_rescaled_potential_cylinder_rejected():
    with pytest.raises(ConfigurationError):
        rescaled_potential(make_model("cylinder", 3), -0.5, np.zeros(3))


@settings(max_examples=60, deadline=None)
@given(
    tau=st.floats(-1.0, -1e-3),
    x=st.lists(st.floats(-10, 10), min_size=3, max_size=3),
)
def test_rescaled_potential_stationary(tau, x):
    m = make_model("euclidean", 3)
    x = np.array(x)
    assert rescaled_potential(m, tau, x) == pytest.approx(np.sum(x**2) / 4, rel=1e-13, abs=1e-13)


@settings(max_examples=50, deadline=None)
@given(st.integers(3, 7), st.lists(st.floats(-20, 20), min_size=7, max_size=7))
def test_cylinder_identities_property(n, coords):
    rep = check_identities(make_model(Kind.CYLINDER, n), [coords[:n]])
    assert rep.max_residual < 1e-12 * max(1.0, coords[n - 1] ** 2)
