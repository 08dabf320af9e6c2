import numpy as np
import pytest

from fixtures import *
from heislab.exceptions import SingularPointError
from heislab.group import GroupElement, dilation, inverse, multiply, sub_gradient
from heislab.metric import (CCBall, GeodesicParams, ball_volume, cc_distance, cc_distance_pair, check_eikonal,
                            distance_array, distance_field, distance_gradient, estimate_K0, geodesic_point,
                            geodesic_points, radial_density_constant, random_cloud, unit_ball_volume)


def test_planar_distance():
    assert cc_distance(GroupElement(3.0, 4.0, 0.0)) == pytest.approx(5.0, abs=1e-8)


def test_axis_distance():
    assert cc_distance(GroupElement(0.0, 0.0, 1.0)) == pytest.approx(2 * np.sqrt(np.pi), rel=1e-9)
    assert cc_distance(GroupElement(0.0, 0.0, -1.0)) == pytest.approx(3.5449077018, rel=1e-9)


def test_identity():
    assert cc_distance(GroupElement.identity()) == 0.0


def test_geodesic_endpoints_are_at_arclength(rng):
    n = 1000
    s = rng.uniform(0.01, 10.0, n)
    theta = rng.uniform(-2 * np.pi + 1e-3, 2 * np.pi - 1e-3, n)
    phi = rng.uniform(0, 2 * np.pi, n)
    np.testing.assert_allclose(distance_array(geodesic_points(theta / s, phi, s)), s, rtol=1e-8)


def test_geodesic_params():
    g = GeodesicParams(1.0, 0.3, 2.0)
    assert g.minimizing
    assert not GeodesicParams(4.0, 0.0, 2.0).minimizing
    assert cc_distance(geodesic_point(g)) == pytest.approx(2.0, rel=1e-9)
    with pytest.raises(ValueError):
        GeodesicParams(1.0, 0.0, -1.0)


def test_homogeneity(rng):
    P = rng.normal(size=(1000, 3))
    for lam in (0.01, 0.5, 7.0):
        np.testing.assert_allclose(distance_array(dilation(P, lam)), lam * distance_array(P), rtol=1e-9)


def test_inversion_symmetry(rng):
    P = rng.normal(size=(1000, 3))
    np.testing.assert_allclose(distance_array(inverse(P)), distance_array(P), rtol=1e-12)


def test_left_invariance(rng):
    a, b, c = rng.normal(size=(3, 100, 3))
    np.testing.assert_allclose(cc_distance_pair(multiply(c, a), multiply(c, b)), cc_distance_pair(a, b),
                               rtol=1e-9, atol=1e-12)


def test_triangle_inequality(rng):
    a, b, c = rng.normal(size=(3, 10000, 3)) * [1.0, 1.0, 3.0]
    assert np.all(cc_distance_pair(a, c) <= cc_distance_pair(a, b) + cc_distance_pair(b, c) + 1e-9)


def test_distance_dominates_planar_radius(rng):
    P = rng.normal(size=(1000, 3))
    assert np.all(distance_array(P) >= np.hypot(P[:, 0], P[:, 1]) - 1e-12)


def test_eikonal(rng):
    cloud = random_cloud(1000, rng, d_max=5.0, d_min=0.1)
    rep = check_eikonal(cloud, h=1e-5)
    assert rep.n_points == 1000
    assert rep.passed(1e-3)


def test_analytic_gradient_matches_fd(rng):
    cloud = random_cloud(200, rng, d_max=3.0, d_min=0.2)
    g = distance_gradient(cloud)
    np.testing.assert_allclose(np.hypot(g[:, 0], g[:, 1]), 1.0, rtol=1e-12)
    np.testing.assert_allclose(sub_gradient(distance_field(), cloud), g, atol=1e-3)


def test_gradient_on_axis():
    with pytest.raises(SingularPointError):
        distance_gradient(GroupElement(0.0, 0.0, 1.0))
    with pytest.raises(SingularPointError):
        check_eikonal(np.array([[0.0, 0.0, 1.0]]))


def test_K0_is_stable():
    small = estimate_K0(random_cloud(1000, 3, d_max=5.0, d_min=0.1))
    large = estimate_K0(random_cloud(2000, 4, d_max=5.0, d_min=0.1))
    assert small.k0 > 0
    assert np.isfinite(small.k0)
    assert abs(large.k0 - small.k0) <= 0.1 * small.k0
    assert small.running_max[-1] == small.k0


def test_K0_planar():
    "Off the plane d grows like |z| + 6 x3^2 / |z|^3, so d * Laplacian(d) = 4 on it."
    P = np.array([[1.0, 0.0, 0.0], [0.0, 2.0, 0.0]])
    np.testing.assert_allclose(estimate_K0(P).values, 4.0, rtol=1e-3)


def test_ball():
    ball = CCBall(2.0)
    assert ball.contains(np.array([1.0, 1.0, 0.0]))
    assert not ball.contains(np.array([0.0, 0.0, 1.0]))
    half = ball.bounding_box()
    # the box contains the ball: its farthest point on the axis is at R^2/4pi
    assert cc_distance(GroupElement(0.0, 0.0, half[2])) == pytest.approx(2.0, rel=1e-9)


def test_unit_ball_volume():
    exact = unit_ball_volume()
    assert radial_density_constant() == pytest.approx(4 * exact)
    est = ball_volume(1.0, 200000, 11)
    assert est.agrees_with(exact, k=4.0)


def test_ball_volume_exponent():
    R = np.array([0.5, 1.0, 2.0, 4.0])
    vols = [ball_volume(r, 200000, 5).value for r in R]
    slope = np.polyfit(np.log(R), np.log(vols), 1)[0]
    assert slope == pytest.approx(4.0, abs=0.05)


def test_ball_volume_invalid():
    with pytest.raises(ValueError):
        ball_volume(0.0, 10, 0)
