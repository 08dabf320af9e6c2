import numpy as np
import pytest

from fixtures import *
from heislab.exceptions import QuadratureError
from heislab.quadrature import gauss_legendre, interpolate, normalized_weights, radial_rule, tail_radius


def test_gauss_legendre_is_exact_on_polynomials():
    x, w = gauss_legendre(5, -1.0, 3.0)
    # exact up to degree 9
    for k in range(10):
        assert np.sum(w * x ** k) == pytest.approx((3.0 ** (k + 1) - (-1.0) ** (k + 1)) / (k + 1), rel=1e-12)


def test_radial_rule_moments():
    r, w = radial_rule(48, 12.0)
    for k in range(4):
        assert np.sum(w * r ** k * np.exp(-r ** 2)) == pytest.approx(0.5 * gaussian_moment(k), rel=1e-9)


def test_tail_radius():
    r = tail_radius(lambda r: r ** 2)
    assert 6.0 < r < 15.0
    assert r ** 3 * np.exp(-r ** 2) < 1e-16
    # several contexts: the widest one decides
    r2 = tail_radius(lambda r: np.stack([r ** 2, 0.25 * r ** 2], axis=-1))
    assert r2 == pytest.approx(2 * r, rel=0.05)


def test_tail_radius_diverges():
    with pytest.raises(QuadratureError):
        tail_radius(lambda r: 0.0 * r)


def test_normalized_weights_stable():
    W = normalized_weights(np.array([[1000.0, 1000.0 + np.log(3.0)], [-1e4, -1e4]]))
    np.testing.assert_allclose(W, [[0.25, 0.75], [0.5, 0.5]])


def test_interpolate_reproduces_polynomials():
    nodes = np.linspace(0.0, 1.0, 6)
    values = np.stack([nodes ** 3, 1.0 - nodes], axis=-1)
    x = np.array([0.13, 0.77])
    np.testing.assert_allclose(interpolate(nodes, values, x), np.stack([x ** 3, 1.0 - x], axis=-1), rtol=1e-10)
