import numpy as np
import pytest

from fixtures import *
from heislab.exceptions import SingularPointError
from heislab.group import (GroupElement, HorizontalVector, ScalarField, Smoothness, multiply, inverse,
                           dilation, gauge, horizontal_derivative, sub_gradient, sub_laplacian, gamma, gamma2,
                           cd_condition_probe, cd_trial_family, cd_sample_points, coordinate_field)


def _triples(rng, n=10000):
    return rng.normal(size=(3, n, 3)) * [1.0, 1.0, 2.0]


def test_associativity(rng):
    a, b, c = _triples(rng)
    np.testing.assert_allclose(multiply(multiply(a, b), c), multiply(a, multiply(b, c)),
                               rtol=1e-12, atol=1e-12)


def test_identity_and_inverse(rng):
    a, _, _ = _triples(rng)
    e = np.zeros(3)
    np.testing.assert_allclose(multiply(a, e), a, rtol=1e-12)
    np.testing.assert_allclose(multiply(e, a), a, rtol=1e-12)
    np.testing.assert_allclose(multiply(a, inverse(a)), 0.0, atol=1e-12)
    np.testing.assert_allclose(multiply(inverse(a), a), 0.0, atol=1e-12)


def test_dilation_is_automorphism(rng):
    a, b, _ = _triples(rng)
    for lam in (0.1, 1.0, 3.7):
        np.testing.assert_allclose(dilation(multiply(a, b), lam),
                                   multiply(dilation(a, lam), dilation(b, lam)),
                                   rtol=1e-12, atol=1e-12)


def test_gauge_homogeneous(rng):
    a, _, _ = _triples(rng, 100)
    np.testing.assert_allclose(gauge(dilation(a, 2.5)), 2.5 * gauge(a), rtol=1e-12)


def test_group_element():
    a = GroupElement(1.0, 2.0, 3.0)
    b = GroupElement(-1.0, 0.5, 0.0)
    ab = a * b
    assert ab.x3 == pytest.approx(3.0 + 0.5 * (1.0 * 0.5 - 2.0 * -1.0))
    assert a * a.inverse() == GroupElement.identity()
    assert a.dilate(2.0) == GroupElement(2.0, 4.0, 12.0)
    with pytest.raises(ValueError):
        a.dilate(0.0)


def test_parse():
    assert GroupElement.parse("3, 4,0") == GroupElement(3.0, 4.0, 0.0)
    for bad in ("1,2", "1,2,3,4", "a,b,c", "1,2,inf"):
        with pytest.raises(ValueError):
            GroupElement.parse(bad)


def test_horizontal_vector_norm():
    v = HorizontalVector(3.0, -4.0)
    assert v.norm() == 5.0
    assert v.norm(1.5) == pytest.approx((3 ** 1.5 + 4 ** 1.5) ** (1 / 1.5))
    with pytest.raises(ValueError):
        HorizontalVector(np.nan, 0.0)


def test_sub_gradient_of_coordinates():
    a = GroupElement(1.0, 2.0, 0.5)
    g1 = sub_gradient(coordinate_field(1), a)
    g3 = sub_gradient(coordinate_field(3), a)
    assert (g1.v1, g1.v2) == pytest.approx((1.0, 0.0), abs=1e-8)
    # X1 x3 = -x2/2, X2 x3 = x1/2
    assert (g3.v1, g3.v2) == pytest.approx((-1.0, 0.5), abs=1e-8)


def test_sub_laplacian_of_planar_square(rng):
    f = ScalarField(lambda P: P[..., 0] ** 2 + P[..., 1] ** 2, name="|z|^2")
    P = rng.normal(size=(20, 3))
    np.testing.assert_allclose(sub_laplacian(f, P), 4.0, rtol=1e-4)
    np.testing.assert_allclose(gamma(f, P), 4 * (P[:, 0] ** 2 + P[:, 1] ** 2), rtol=1e-6, atol=1e-8)


POINTS = np.array([[0.5, 1.0, -0.3], [1.2, -0.7, 2.0], [-0.4, 1.5, 0.8]])


def test_horizontal_derivative_is_second_order():
    f = ScalarField(lambda P: P[..., 0] ** 3 + P[..., 0] * P[..., 2] + P[..., 1] ** 4, name="cubic")
    x1, x2, x3 = POINTS.T
    exact = {1: 3 * x1 ** 2 + x3 - x1 * x2 / 2, 2: x1 ** 2 / 2 + 4 * x2 ** 3}
    for direction in (1, 2):
        err = [np.abs(horizontal_derivative(f, POINTS, direction, h) - exact[direction])
               for h in (1e-2, 5e-3)]
        ratio = err[0] / err[1]
        assert np.all((3.5 <= ratio) & (ratio <= 4.5)), ratio


def test_sub_laplacian_is_nested_derivatives():
    f = ScalarField(lambda P: P[..., 0] ** 2 * P[..., 1] + P[..., 2] ** 2 + P[..., 0] * P[..., 2], name="mixed")
    h = 1e-3
    nested = 0.0
    for direction in (1, 2):
        Xf = ScalarField(lambda Q, k=direction: horizontal_derivative(f, Q, k, h))
        nested = nested + horizontal_derivative(Xf, POINTS, direction, h)
    lap = sub_laplacian(f, POINTS, h)
    np.testing.assert_allclose(lap, nested, atol=1e-6)
    x1, x2, _ = POINTS.T
    np.testing.assert_allclose(lap, x2 + x2 ** 2 / 2 + x1 ** 2 / 2, atol=1e-6)
    # the mixed field is not the planar one: x3 enters through the flows
    np.testing.assert_allclose(sub_gradient(f, POINTS, h)[:, 0],
                               2 * x1 * x2 - x2 * POINTS[:, 2] + POINTS[:, 2] - x1 * x2 / 2, atol=1e-6)


def test_gamma2_of_central_coordinate(rng):
    P = np.concatenate([np.zeros((1, 3)), rng.normal(size=(10, 3))])
    np.testing.assert_allclose(gamma2(coordinate_field(3), P), 0.5, atol=1e-6)


def test_gamma2_of_twisted_field():
    for M in (1.0, 100.0, -100.0):
        f = ScalarField(lambda P, M=M: P[..., 0] + M * P[..., 1] * P[..., 2])
        e = GroupElement.identity()
        assert gamma(f, e) == pytest.approx(1.0, rel=1e-8)
        assert gamma2(f, e) == pytest.approx(-2.0 * M, rel=1e-6)


def test_invalid_step():
    with pytest.raises(ValueError):
        sub_gradient(coordinate_field(1), GroupElement(1, 1, 1), h=0.0)
    with pytest.raises(ValueError):
        gamma2(coordinate_field(1), GroupElement(1, 1, 1), h=-1.0)


def test_singular_guard():
    f = ScalarField(lambda P: np.hypot(P[..., 0], P[..., 1]), Smoothness.OFF_AXIS, name="|z|")
    with pytest.raises(SingularPointError):
        sub_gradient(f, GroupElement(0.0, 0.0, 1.0))
    sub_gradient(f, GroupElement(1.0, 0.0, 1.0))


def test_cd_probe_violated_for_all_rho():
    fields = cd_trial_family()
    points = cd_sample_points(1.0, 5)
    for rho in (-1e6, 0.0, 1e6):
        rep = cd_condition_probe(rho, fields, points)
        assert rep.violated
        assert rep.minimum < 0


def test_cd_probe_positive_rho_family():
    "x3 + n x1 alone rules out rho > 0 but not rho <= 0."
    f = [cd_trial_family()[2]]
    P = np.array([[0.0, 1.0, 0.0]])
    assert not cd_condition_probe(-1.0, f, P).violated
    assert cd_condition_probe(1e6, f, P).violated


def test_cd_probe_needs_fields():
    with pytest.raises(ValueError):
        cd_condition_probe(0.0, [], cd_sample_points())
