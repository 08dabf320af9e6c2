import numpy as np
import pytest

from fixtures import *
from heislab.coercive import (calibrate_additive_constant, grad_dot_check, pointwise_constants,
                              ubound_integral_check, ubound_pointwise_check)
from heislab.coercive.ubound import UBoundIntegralReport
from heislab.exceptions import ModelError, UnsupportedModelError
from heislab.functions import Constant, Coordinate, DistancePower, parse_function
from heislab.metric import random_cloud
from heislab.model import example1, example2, ip_quadratic


def test_pointwise_constants(ex1, ex2, gaussian):
    assert pointwise_constants(ex1) == pytest.approx((0.5, 1.5, 2.0))
    assert pointwise_constants(example1(1.5, 0.1)) == pytest.approx((1.6, 2.6, 2.0))
    cprime, a, k = pointwise_constants(example2(1.2, 0.01, q=1.5))
    assert k == pytest.approx(3.0)
    assert cprime == pytest.approx(max(2 ** 0.5 * 0.2 ** 1.5, 2.0 * 0.01 ** 0.5 * 3.0 ** 1.5))
    assert a == pytest.approx(cprime + 1)
    with pytest.raises(UnsupportedModelError):
        pointwise_constants(gaussian)


def test_calibration_is_nonnegative(ex1):
    assert calibrate_additive_constant(ex1, n_grid=11, polish=2) >= 0.0


@pytest.mark.parametrize("factory", [example1, example2])
def test_pointwise_ubound_holds(factory):
    spec = factory(1.5, 0.01)
    rep = ubound_pointwise_check(spec, n=20000, seed=3)
    assert rep.passed, rep
    assert rep.n_points + rep.skipped == 20000
    assert rep.constants_used["a"] == pytest.approx(pointwise_constants(spec)[1])
    assert rep.witness is not None


def test_pointwise_ubound_explicit_cloud(ex1, rng):
    x = np.concatenate([random_cloud(200, rng, d_max=5.0), [[0.0, 0.0, 1.0]]])
    om = rng.uniform(0.0, 5.0, size=(201, 2))
    rep = ubound_pointwise_check(ex1, x_cloud=x, omega_cloud=om, c=1e6)
    assert rep.passed
    assert rep.skipped == 1
    assert rep.n_points == 200
    # a negative additive constant breaks it
    assert not ubound_pointwise_check(ex1, x_cloud=x, omega_cloud=om, c=-1e3).passed


def test_pointwise_ubound_regime():
    with pytest.raises(ModelError):
        ubound_pointwise_check(example1(0.5, 0.01), n=10)


def test_integral_floor_of_constant(gaussian):
    rep = ubound_integral_check(gaussian, [(0.0, 0.0), (1.0, 2.0)], [Constant(1.0)], A_grid=[0.0, 1.0, 5.0])
    # W = d + d(omega_-) + d(omega_+); |grad 1| = 0
    np.testing.assert_allclose(rep.floors[0, 0], gaussian_moment(1), rtol=1e-8)
    np.testing.assert_allclose(rep.floors[0, 1], gaussian_moment(1) + 3.0, rtol=1e-8)
    np.testing.assert_allclose(rep.residue, [0.0, 3.0], rtol=1e-8)
    assert rep.passed
    np.testing.assert_allclose(rep.floor_at(0.5), 0.5 * (rep.floors[..., 0] + rep.floors[..., 1]))
    with pytest.raises(ValueError):
        rep.floor_at(6.0)


@pytest.mark.parametrize("mode", ["distance", "nonuniform"])
def test_integral_floors(ex1, mode):
    family = [Constant(1.0), DistancePower(0), DistancePower(0, 2.0), parse_function("exp(0.5*d0)")]
    omegas = [(0.0, 0.0), (1.0, 1.0), (4.0, 4.0)]
    rep = ubound_integral_check(ex1, omegas, family, mode=mode)
    assert rep.floors.shape == (4, 3, 21)
    assert np.all(np.diff(rep.floors, axis=-1) <= 1e-12)
    assert np.all(rep.floors >= 0)
    A, B = rep.pair
    assert A + B == pytest.approx(np.min(rep.A_grid + rep.uniform_floor))
    assert len(rep.rows()) == 4 * 3 * 21
    assert rep.omega_floor().shape == (3,)
    if mode == "distance":
        assert rep.passed


def test_integral_mcmc_is_below_quadrature(gaussian):
    family = [DistancePower(0)]
    quad = ubound_integral_check(gaussian, [(0.5, 0.5)], family, A_grid=[0.0, 0.5])
    mcmc = ubound_integral_check(gaussian, [(0.5, 0.5)], family, A_grid=[0.0, 0.5], method="mcmc", n=3000)
    assert np.all(mcmc.floors <= quad.floors * 1.05 + 1e-9)


def test_integral_arguments(ex1):
    with pytest.raises(UnsupportedModelError):
        ubound_integral_check(ex1, [(0.0, 0.0)], [parse_function("prod(1+d0,1)")])
    with pytest.raises(UnsupportedModelError):
        ubound_integral_check(ex1, [(0.0, 0.0)], [Coordinate(0, 1)])
    with pytest.raises(ValueError):
        ubound_integral_check(ex1, [], [DistancePower(0)])
    with pytest.raises(ValueError):
        ubound_integral_check(ex1, [(0.0, 0.0)], [DistancePower(0)], mode="other")
    with pytest.raises(ValueError):
        ubound_integral_check(ex1, [(0.0, 0.0)], [DistancePower(0)], method="other")


def test_grad_dot(ex1, rng):
    cloud = np.concatenate([random_cloud(300, rng, d_max=4.0, d_min=0.2), [[0.0, 0.0, 2.0]]])
    rep = grad_dot_check(ex1, 0, cloud)
    assert rep.passed
    assert rep.excluded >= 1
    assert rep.n_points + rep.excluded == 301
    assert rep.planar_norm == pytest.approx(1.0, abs=1e-6)


BOUNDARIES = [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (4.0, 4.0), (0.0, 8.0)]
FAMILY = [Constant(1.0), DistancePower(0), DistancePower(0, 2.0)]


def test_integral_uniform_pair_over_boundaries(ipq):
    rep = ubound_integral_check(ipq, BOUNDARIES, FAMILY)
    A, B = rep.pair
    assert rep.passed
    assert rep.holds(A, B)
    assert rep.floor_at(A).shape == (3, 5)
    # one pair covers all five boundaries, and nothing below it does
    assert not rep.holds(A, B - 0.1)
    assert not ubound_integral_check(ipq, BOUNDARIES, FAMILY, claimed=(A, B - 0.1)).passed
    assert ubound_integral_check(ipq, BOUNDARIES, FAMILY, claimed=(A, B + 0.1)).passed


def test_integral_uniform_needs_positive_rho():
    with pytest.raises(ModelError):
        ubound_integral_check(ip_quadratic(1.0, 0.02, rho=0.0), BOUNDARIES, FAMILY)
    with pytest.raises(ValueError):
        ubound_integral_check(ip_quadratic(1.0, 0.02), BOUNDARIES, FAMILY, claimed=(20.0, 1.0))


def test_integral_example2_floor_grows_with_boundary():
    rep = ubound_integral_check(example2(1.5, 0.05), BOUNDARIES, FAMILY, mode="nonuniform")
    np.testing.assert_allclose(rep.omega_sums(), [0.0, 2.0, 8.0, 32.0, 64.0])
    floors = rep.omega_floor()
    assert floors[-1] > floors[0]
    assert rep.growth_slope() > 0
    assert rep.passed
    # a floor that shrinks as the boundary moves out is not the non-uniform signature
    shrinking = UBoundIntegralReport(rep.mode, rep.A_grid, rep.omegas, rep.functions,
                                     rep.floors[:, ::-1], rep.p)
    assert shrinking.growth_slope() < 0
    assert not shrinking.passed
    single = UBoundIntegralReport(rep.mode, rep.A_grid, rep.omegas[:1], rep.functions,
                                  rep.floors[:, :1], rep.p)
    assert not single.passed
