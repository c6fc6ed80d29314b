import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from driftheat.polys import Poly


def _xy():
    return Poly.variable(0, 2), Poly.variable(1, 2)


def test_evaluate_and_arithmetic():
    x, y = _xy()
    p = x * x * y + 3.0 * y - 1.0
    pts = np.array([[1.0, 2.0], [-0.5, 3.0]])
    np.testing.assert_allclose(p(pts), pts[:, 0] ** 2 * pts[:, 1] + 3 * pts[:, 1] - 1)


def test_derivatives():
    x, y = _xy()
    p = x * x * x * y
    pt = np.array([2.0, -1.0])
    np.testing.assert_allclose(p.grad_at(pt), [3 * 4 * -1, 8])
    np.testing.assert_allclose(p.hess_at(pt), [[6 * 2 * -1, 12], [12, 0]])
    t = p.third_at(pt)
    assert t[0, 0, 0] == pytest.approx(-6)
    assert t[0, 0, 1] == pytest.approx(12)
    assert t[1, 1, 1] == 0


def test_laplacian():
    x, y = _xy()
    p = x * x + y * y * y
    assert p.laplacian()(np.array([[0.0, 2.0]]))[0] == pytest.approx(2 + 12)


def test_scalar_only_axis_required():
    with pytest.raises(ValueError):
        Poly(3.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 3), st.integers(0, 4))
def test_hessian_symmetric_and_third_symmetric(seed, n, degree):
    rng = np.random.default_rng(seed)
    p = Poly.random(rng, n, degree)
    pt = rng.uniform(-1, 1, n)
    h = p.hess_at(pt)
    np.testing.assert_allclose(h, h.T, atol=1e-12)
    t = p.third_at(pt)
    np.testing.assert_allclose(t, np.transpose(t, (1, 0, 2)), atol=1e-12)
    np.testing.assert_allclose(t, np.transpose(t, (0, 2, 1)), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 3))
def test_product_rule(seed, n):
    rng = np.random.default_rng(seed)
    a, b = Poly.random(rng, n, 3), Poly.random(rng, n, 2)
    pt = rng.uniform(-1, 1, n)
    lhs = (a * b).grad_at(pt)
    rhs = a.grad_at(pt) * b(pt[None])[0] + b.grad_at(pt) * a(pt[None])[0]
    np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-10)
