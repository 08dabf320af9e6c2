import numpy as np
import pytest

from fixtures import *
from heislab.coercive import BlockDynamics, block_dynamics_iterate, entropy_telescoping_check
from heislab.exceptions import GridResolutionError
from heislab.functions import DistancePower, parse_function
from heislab.model import Window, example1


def test_telescoping_two_sites(ex1, omega):
    rep = entropy_telescoping_check(ex1, Window(0, 1), omega, parse_function("1+d0"), tol=1e-5)
    assert rep.passed, rep
    assert rep.lhs > 0
    assert rep.rhs == pytest.approx(sum(rep.terms) - rep.correction)


@pytest.mark.slow
def test_telescoping_three_sites(ex2, omega):
    rep = entropy_telescoping_check(ex2, Window(0, 2), omega, parse_function("prod(1+d0,1,2)"), q=1.5, tol=1e-5)
    assert rep.passed, rep


def test_telescoping_arguments(ex1, omega):
    with pytest.raises(ValueError):
        entropy_telescoping_check(ex1, Window(0, 1), omega, parse_function("-1+d0"))
    with pytest.raises(ValueError):
        entropy_telescoping_check(ex1, Window(0, 3), omega, parse_function("1+d0"))
    with pytest.raises(ValueError):
        entropy_telescoping_check(ex1, Window(0, 1), omega, parse_function("1+d0"), q=3.0)


def test_free_spins_converge_in_one_step(gaussian, three_sites, omega):
    run = block_dynamics_iterate(gaussian, three_sites, omega, DistancePower(1), n_max=3)
    assert run.grid_residuals[1] < 1e-12
    assert run.residuals[-1] < 1e-4
    assert run.grid_mean == pytest.approx(gaussian_moment(1), rel=1e-4)


def test_free_spins_on_five_sites(gaussian, omega):
    dyn = BlockDynamics(gaussian, Window(0, 4), omega, nodes=16)
    # with no coupling the stationary mean is the one-site kernel mean
    mean = float(np.sum(dyn.kernels[0][0, 0] * dyn.nodes))
    run = dyn.iterate(DistancePower(1), n_max=3, reference=mean)
    assert run.residuals[2] < 1e-10
    assert run.grid_residuals[2] < 1e-10
    assert run.grid_mean == pytest.approx(mean, rel=1e-12)
    assert mean == pytest.approx(gaussian_moment(1), rel=1e-3)


@pytest.mark.slow
def test_block_dynamics_five_sites(omega):
    run = block_dynamics_iterate(example1(1.5, 0.02), Window(0, 4), omega, DistancePower(1),
                                 n_max=50, nodes=16, tolerance=1e-3, resolution_tol=1e-4)
    assert run.converged
    assert run.n_iterations <= 50
    assert run.residuals[-1] < 1e-3
    assert run.grid_residuals[-1] <= run.grid_residuals[0]


def test_block_dynamics_converges(ex1, three_sites, omega):
    run = block_dynamics_iterate(ex1, three_sites, omega, DistancePower(1), n_max=30, keep_iterates=True)
    assert run.n_iterations == 30
    assert len(run.iterates) == 31
    assert np.all(np.diff(run.grid_residuals) <= 1e-12)
    assert run.residuals[-1] < 1e-3
    assert np.isfinite(run.tail_slope())
    assert run.evaluate([0.5, 1.0, 1.5]) == pytest.approx(run.reference, abs=1e-3)


def test_block_dynamics_stops_at_tolerance(ex1, three_sites, omega):
    run = block_dynamics_iterate(ex1, three_sites, omega, DistancePower(1), n_max=50, tolerance=1e-3)
    assert run.converged
    assert run.n_iterations < 50
    assert run.residuals[-1] < 1e-3


def test_operator_properties(ex1, three_sites, omega):
    dyn = BlockDynamics(ex1, three_sites, omega)
    ones = np.ones((dyn.n,) * 3)
    np.testing.assert_allclose(dyn.apply(ones), 1.0, rtol=1e-12)
    F = DistancePower(0, 2.0).on_window(three_sites)(dyn.grid())
    PF = dyn.apply(F)
    assert np.all(PF > 0)
    # the grid measure is invariant
    nu = dyn.grid_measure()
    assert nu.expect(PF) == pytest.approx(nu.expect(F), rel=1e-10)
    # a site update no longer depends on that site
    G = dyn.apply_site(F, 1)
    np.testing.assert_allclose(G[:, 0, :], G[:, -1, :])


def test_block_dynamics_arguments(ex1, omega):
    with pytest.raises(ValueError):
        BlockDynamics(ex1, Window(0, 7), omega)
    with pytest.raises(ValueError):
        block_dynamics_iterate(ex1, Window(0, 1), omega, parse_function("-1+d0"), n_max=2)
    with pytest.raises(GridResolutionError):
        block_dynamics_iterate(example1(1.5, 0.01), Window(0, 0), omega, DistancePower(0), nodes=2)
