import numpy as np
import pytest
import scipy.integrate

from fixtures import *
from heislab.exceptions import ModelError, NonFiniteError
from heislab.functions import CylinderFunction, DistancePower
from heislab.gibbs import transfer_matrix_expectation
from heislab.group import GroupElement
from heislab.metric import distance_array
from heislab.model import LatticeConfig, Window
from heislab.util import derive_rng
from heislab.sampler import (ChainRunner, ChainState, Schedule, batch_means, boundary_points,
                             estimate_expectation, exp_moment_estimate, integrated_autocorrelation_time,
                             run_chains, sample_points, sweep, symmetry_test, tune, update_sites)


class Blowup(CylinderFunction):
    sites = (0,)
    name = "blowup"

    def value(self, r):
        return np.where(r[..., 0] > 0, np.inf, 0.0)


def _state(window, n_chains=4, scale=0.5, seed=3):
    cfg = LatticeConfig.from_distances(window, [1.0] * window.size, (0.5, 1.0))
    return ChainState.from_config(cfg, n_chains, seed, scale=scale)


def test_chain_state_shapes(three_sites):
    s = _state(three_sites)
    assert s.n_chains == 4
    assert s.distances.shape == (4, 5)
    assert s.scales.shape == (3,)
    with pytest.raises(ModelError):
        ChainState(three_sites, np.zeros((2, 4, 3)), derive_rng(0), 0.5)
    with pytest.raises(ValueError):
        ChainState(three_sites, np.zeros((2, 5, 3)), derive_rng(0), -1.0)


def test_update_sites_rejects_neighbours(ex1, three_sites):
    s = _state(three_sites)
    with pytest.raises(ValueError):
        update_sites(s, ex1, [0, 1])
    with pytest.raises(ValueError):
        update_sites(s, ex1, [0, 0])
    with pytest.raises(ModelError):
        update_sites(s, ex1, [5])


@pytest.mark.parametrize("schedule", list(Schedule))
def test_sweep_keeps_boundary(ex1, three_sites, schedule):
    s = _state(three_sites)
    before = s.points[:, [0, -1]].copy()
    for _ in range(20):
        sweep(s, ex1, schedule)
    np.testing.assert_array_equal(s.points[:, [0, -1]], before)
    np.testing.assert_allclose(s.distances, distance_array(s.points))
    assert s.step_count == 20
    np.testing.assert_array_equal(s.proposed, 20 * 4)
    assert np.all(s.acceptance > 0)


def test_tune_moves_scale(three_sites):
    s = _state(three_sites)
    s.accepted[:] = s.proposed[:] = 10
    tune(s, 0.35)
    np.testing.assert_allclose(s.scales, 0.5 * np.exp(0.65))
    assert np.all(s.proposed == 0)


def test_acceptance_monitor_warns(gaussian, site):
    s = _state(site, n_chains=8, scale=100.0)
    runner = ChainRunner(gaussian, s)
    runner.run(30, lambda state: state.distances[:, 1])
    assert any("acceptance" in w for w in runner.warnings)


def test_run_records_and_thins(gaussian, site):
    runner = ChainRunner(gaussian, _state(site))
    out = runner.run(10, lambda state: state.distances[:, 1], thin=3)
    assert out.shape == (4, 3)
    with pytest.raises(ValueError):
        runner.run(2, lambda state: state.distances[:, 1], thin=3)


def test_boundary_points(config3):
    P = boundary_points((0.5, 1.0), config3.window)
    np.testing.assert_allclose(distance_array(P), [0.5, 1.0])
    np.testing.assert_allclose(boundary_points(config3, config3.window), P)
    np.testing.assert_allclose(boundary_points(config3.boundary, config3.window), P)
    g = GroupElement(0.0, 0.0, 1.0)
    np.testing.assert_allclose(boundary_points((g, [1.0, 0.0, 0.0]), config3.window)[0], [0, 0, 1])
    with pytest.raises(ModelError):
        boundary_points((-1.0, 1.0), config3.window)
    with pytest.raises(ModelError):
        boundary_points((1.0,), config3.window)
    with pytest.raises(ModelError):
        boundary_points({-1: g}, config3.window)


def test_seeded_runs_are_reproducible(ex1, three_sites, omega):
    f = DistancePower(1)
    kw = dict(burn_in=20, seed=9, f=f, n_chains=8, units=4)
    a = run_chains(ex1, three_sites, omega, 60, **kw)
    b = run_chains(ex1, three_sites, omega, 60, **kw)
    np.testing.assert_array_equal(a.trace, b.trace)
    assert a.trace.shape == (8, 40)
    c = run_chains(ex1, three_sites, omega, 60, **dict(kw, seed=10))
    assert not np.array_equal(a.trace, c.trace)


def test_thread_count_does_not_change_results(ex1, three_sites, omega):
    kw = dict(burn_in=10, seed=2, f=DistancePower(0), n_chains=4, units=2)
    one = run_chains(ex1, three_sites, omega, 30, threads=1, **kw)
    two = run_chains(ex1, three_sites, omega, 30, threads=2, **kw)
    np.testing.assert_array_equal(one.trace, two.trace)


def test_run_chains_arguments(ex1, site, omega):
    with pytest.raises(ValueError):
        run_chains(ex1, site, omega, 10, burn_in=10)
    with pytest.raises(TypeError):
        run_chains(ex1, site, omega, 10, burn_in=5, f=lambda r: r)


def test_non_finite_functional(gaussian, site, omega):
    with pytest.raises(NonFiniteError) as e:
        run_chains(gaussian, site, omega, 10, burn_in=5, f=Blowup(), n_chains=2, units=1)
    assert e.value.chain in (0, 1)


def test_sample_points(gaussian, site, omega):
    P = sample_points(gaussian, site, omega, 30, burn_in=10, n_chains=4, units=2)
    assert P.shape == (80, 3, 3)
    np.testing.assert_allclose(distance_array(P[:, [0, 2]]), np.broadcast_to([0.5, 1.0], (80, 2)))


def test_gaussian_moments(gaussian, site, omega):
    for k in (1, 2):
        est = estimate_expectation(gaussian, site, omega, DistancePower(0, float(k)), 3000, burn_in=500, seed=k)
        assert est.agrees_with(gaussian_moment(k), k=4.0), est
        assert est.stderr < 0.05 * est.value


def test_auto_burn_in(gaussian, site, omega):
    s = run_chains(gaussian, site, omega, 3000, f=DistancePower(0), n_chains=8, units=2)
    assert all(b >= 1000 for b in s.burn_in)
    assert s.trace.shape == (8, 3000 - max(s.burn_in))


def test_exp_moment(gaussian, site, omega):
    num = scipy.integrate.quad(lambda r: r ** 3 * np.exp(-r ** 2 + 0.5 * r), 0, np.inf)[0]
    den = scipy.integrate.quad(lambda r: r ** 3 * np.exp(-r ** 2), 0, np.inf)[0]
    rep = exp_moment_estimate(gaussian, site, omega, DistancePower(0), 0.5, 3000, burn_in=500)
    assert not rep.diverged and not rep.heavy_tail
    assert rep.estimate.agrees_with(num / den, k=4.0), rep.estimate
    assert rep.log_value == pytest.approx(np.log(rep.estimate.value))
    with pytest.raises(ValueError):
        exp_moment_estimate(gaussian, site, omega, DistancePower(0), 0.0, 100)


@pytest.mark.slow
def test_interacting_window_matches_transfer(ex1, three_sites, omega):
    f = DistancePower(1)
    exact = transfer_matrix_expectation(ex1, three_sites, omega, f)
    est = estimate_expectation(ex1, three_sites, omega, f, 20000, burn_in=2000, seed=4)
    assert est.agrees_with(exact, k=4.0), (est, exact)


def test_batch_means():
    assert batch_means(np.full((3, 10), 2.0)) == (2.0, 0.0)
    x = derive_rng(5).normal(size=(4, 5000))
    m, se = batch_means(x)
    assert abs(m) < 4 * se
    assert se == pytest.approx(1 / np.sqrt(x.size), rel=0.3)
    with pytest.raises(ValueError):
        batch_means(np.ones((2, 1)))


def test_autocorrelation_time():
    rng = derive_rng(6)
    assert integrated_autocorrelation_time(rng.normal(size=20000)) == pytest.approx(1.0, abs=0.15)
    a = 0.9
    x = np.empty((8, 20000))
    x[:, 0] = rng.normal(size=8)
    for t in range(1, x.shape[1]):
        x[:, t] = a * x[:, t - 1] + np.sqrt(1 - a * a) * rng.normal(size=8)
    assert integrated_autocorrelation_time(x) == pytest.approx((1 + a) / (1 - a), rel=0.2)
    assert integrated_autocorrelation_time(np.ones(100)) == 1.0


def test_symmetry_test():
    rng = derive_rng(7)
    x = rng.normal(size=5000)
    assert symmetry_test(x, rng.normal(size=5000))[2] > 1e-3
    assert symmetry_test(x, x + 1.0)[2] < 1e-6
