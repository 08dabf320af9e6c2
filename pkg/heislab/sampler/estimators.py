"""
Seeded, parallel MCMC estimators for finite-window Gibbs measures.

A run of `n_chains` chains is cut into a fixed number of units. Unit k of a
run seeded with s draws from SeedSequence([s, k]) and results are merged in
unit order, so the thread count never changes a number.
"""
from dataclasses import dataclass, field

import numpy as np

import logging

from heislab import defaults
from heislab.estimate import Estimate, Method
from heislab.exceptions import ModelError, NonFiniteError
from heislab.functions import CylinderFunction
from heislab.group import GroupElement
from heislab.metric import geodesic_points
from heislab.model import LatticeConfig, Window
from heislab.util import derive_rng, parallel_map, split_counts
from .chain import ChainRunner, ChainState, Schedule
from .diagnostics import batch_means

logger = logging.getLogger(__name__)

TOP_FRACTION = 1e-3
TOP_SHARE = 0.5


def boundary_points(omega, window):
    """Boundary spins as an array (2, 3).

    omega is a LatticeConfig, a site -> GroupElement mapping, a pair of
    GroupElements or a pair of distances (placed in the plane)."""
    if isinstance(omega, LatticeConfig):
        P = omega.points()
        return np.array([P[0], P[-1]])
    if hasattr(omega, "items"):
        try:
            omega = [omega[j] for j in window.boundary_sites]
        except KeyError as e:
            raise ModelError("missing boundary value for site %s" % e.args[0])
    omega = list(omega)
    if len(omega) != 2:
        raise ModelError("a boundary needs two values, got %d" % len(omega))
    out = np.empty((2, 3))
    for k, w in enumerate(omega):
        if isinstance(w, GroupElement):
            out[k] = w.as_array()
        elif np.ndim(w) == 1:
            out[k] = np.asarray(w, dtype=float)
        else:
            if w < 0:
                raise ModelError("boundary distance must be nonnegative, got %r" % w)
            out[k] = geodesic_points(0.0, 0.0, float(w))
    return out


@dataclass
class _Unit:
    spec: object
    window: Window
    start: np.ndarray
    n: int
    burn_in: object
    seed: int
    unit: int
    n_chains: int
    schedule: Schedule
    scale: float
    f: object = None
    thin: int = 1


@dataclass
class ChainSamples:
    "Merged output of all units of a run."
    trace: np.ndarray
    burn_in: list
    acceptance: np.ndarray
    scales: np.ndarray
    warnings: list = field(default_factory=list)


def _recorder(task, offset):
    if task.f is None:
        return lambda state: state.points.copy()
    f = task.f
    if f.radial:
        cols = task.window.columns(f.sites)
        evaluate = lambda state: f.value(state.distances[:, cols])
    else:
        cols = task.window.columns(f.sites)
        evaluate = lambda state: f.at_points(state.points[:, cols])

    def record(state):
        v = np.asarray(evaluate(state), dtype=float)
        v = np.broadcast_to(v, (state.n_chains,))
        bad = ~np.isfinite(v)
        if np.any(bad):
            chain = int(np.argmax(bad))
            raise NonFiniteError(offset + chain, state.step_count, float(v[chain]))
        return v.copy()

    return record


def _run_unit(args):
    task, offset = args
    rng = derive_rng(task.seed, task.unit)
    P = np.repeat(task.start[None], task.n_chains, axis=0)
    state = ChainState(task.window, P, rng, task.scale)
    runner = ChainRunner(task.spec, state, task.schedule)
    if task.burn_in is None:
        burn = runner.auto_burn_in()
    else:
        burn = runner.burn_in(task.burn_in)
    if task.n <= burn:
        raise ValueError("n=%d sweeps does not exceed the burn-in of %d" % (task.n, burn))
    trace = runner.run(task.n - burn, _recorder(task, offset), task.thin)
    return trace, burn, state.acceptance, state.scales, runner.warnings


def run_chains(spec, window, omega, n, burn_in=None, seed=defaults.seed, f=None,
               n_chains=defaults.chains, units=defaults.chain_units, threads=1,
               schedule=Schedule.CHECKERBOARD, initial=None, scale=defaults.proposal_scale,
               thin=1):
    """Run n_chains chains of n sweeps each (burn-in included).

    With f given the trace holds f per chain and kept sweep, shape
    (n_chains, n_keep); otherwise it holds the configurations,
    (n_chains, n_keep, width, 3). burn_in=None picks ten integrated
    autocorrelation times of a tuned pilot run.
    """
    if burn_in is not None and not n > burn_in:
        raise ValueError("n=%d must exceed burn_in=%d" % (n, burn_in))
    if f is not None and not isinstance(f, CylinderFunction):
        raise TypeError("f must be a CylinderFunction, got %r" % type(f))
    start = np.zeros((window.width, 3))
    start[[0, -1]] = boundary_points(omega, window)
    if initial is not None:
        start[1:-1] = initial.points()[1:-1] if isinstance(initial, LatticeConfig) else initial
    counts = [c for c in split_counts(n_chains, units) if c > 0]
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])
    tasks = [(_Unit(spec, window, start, int(n), burn_in, int(seed), k, c, Schedule(schedule),
                    scale, f, int(thin)), int(o))
             for k, (c, o) in enumerate(zip(counts, offsets))]
    results = parallel_map(_run_unit, tasks, threads)
    warnings = [w for r in results for w in r[4]]
    # automatic burn-in may differ between units; keep the common tail
    keep = min(r[0].shape[1] for r in results)
    return ChainSamples(
        trace=np.concatenate([r[0][:, r[0].shape[1] - keep:] for r in results], axis=0),
        burn_in=[r[1] for r in results],
        acceptance=np.mean([r[2] for r in results], axis=0),
        scales=np.array([r[3] for r in results]),
        warnings=warnings,
    )


def estimate_expectation(spec, window, omega, f, n, burn_in=None, seed=defaults.seed,
                         **kwargs) -> Estimate:
    "E^{Lambda, omega} f by MCMC, with a batch-means standard error."
    samples = run_chains(spec, window, omega, n, burn_in, seed, f=f, **kwargs)
    value, stderr = batch_means(samples.trace)
    est = Estimate(value, stderr, int(samples.trace.size), seed, Method.MCMC, window.size)
    logger.debug("E[%s] = %s", f, est)
    return est


def sample_points(spec, window, omega, n, burn_in=None, seed=defaults.seed, **kwargs):
    "Configurations (N, width, 3) from all chains, boundary columns included."
    samples = run_chains(spec, window, omega, n, burn_in, seed, **kwargs)
    return samples.trace.reshape((-1, window.width, 3))


@dataclass
class ExpMomentReport:
    estimate: Estimate
    log_value: float
    top_share: float
    heavy_tail: bool
    diverged: bool
    warnings: list = field(default_factory=list)


def exp_moment_estimate(spec, window, omega, g, eps, n, seed=defaults.seed, burn_in=None,
                        **kwargs) -> ExpMomentReport:
    """E^{Lambda, omega} exp(eps g), accumulated in log space.

    heavy_tail is set when the top 0.1% of samples carry more than half of
    the weight; an overflowing mean is reported as divergence.
    """
    if not eps > 0:
        raise ValueError("eps must be positive, got %r" % eps)
    samples = run_chains(spec, window, omega, n, burn_in, seed, f=g, **kwargs)
    x = eps * samples.trace
    top = x.max()
    w = np.exp(x - top)
    mean_w, se_w = batch_means(w)
    log_value = float(top + np.log(mean_w))
    with np.errstate(over="ignore"):
        value = float(np.exp(log_value))
    diverged = not np.isfinite(value)
    stderr = np.inf if diverged else value * se_w / mean_w
    flat = np.sort(w.ravel())[::-1]
    k = max(1, int(np.ceil(TOP_FRACTION * flat.size)))
    share = float(flat[:k].sum() / flat.sum())
    heavy = share > TOP_SHARE
    warnings = list(samples.warnings)
    if heavy:
        msg = "heavy tail: top %d of %d samples carry %.1f%% of E exp(%g %s)" % (
            k, flat.size, 100 * share, eps, g)
        logger.warning(msg)
        warnings.append(msg)
    if diverged:
        msg = "E exp(%g %s) overflows (log value %.4g)" % (eps, g, log_value)
        logger.warning(msg)
        warnings.append(msg)
    est = Estimate(value, float(stderr), int(x.size), seed, Method.MCMC, window.size)
    return ExpMomentReport(est, log_value, share, heavy, diverged, warnings)
