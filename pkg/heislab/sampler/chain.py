"""
Metropolis sampling of E^{Lambda, omega} on H^Lambda.

A ChainState carries a batch of independent chains sharing one quenched
boundary. Proposals are symmetric random walks in coordinates, with scale
sigma in x1, x2 and sigma^2 in x3 so that they follow the dilations.
"""
import enum
from dataclasses import dataclass, field

import numpy as np

import logging

from heislab import defaults
from heislab.exceptions import ModelError
from heislab.metric import distance_array
from heislab.model import LatticeConfig, Window, window_energy
from heislab.observe import Observable
from heislab.util import derive_rng
from .diagnostics import integrated_autocorrelation_time
from .plugins.sampler_plugin import SamplerPlugin

logger = logging.getLogger(__name__)


class Schedule(enum.Enum):
    SEQUENTIAL = "sequential"
    CHECKERBOARD = "checkerboard"


@dataclass
class ChainState:
    window: Window
    points: np.ndarray
    rng: np.random.Generator
    scales: np.ndarray
    step_count: int = 0
    distances: np.ndarray = field(default=None, repr=False)
    accepted: np.ndarray = field(default=None, repr=False)
    proposed: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.points = np.array(self.points, dtype=float)
        if self.points.ndim != 3 or self.points.shape[1:] != (self.window.width, 3):
            raise ModelError("chain points must have shape (chains, %d, 3), got %s"
                             % (self.window.width, self.points.shape))
        if self.distances is None:
            self.distances = distance_array(self.points)
        self.scales = np.broadcast_to(np.asarray(self.scales, dtype=float), (self.window.size,)).copy()
        if np.any(self.scales < 0):
            raise ValueError("proposal scales must be nonnegative")
        if self.accepted is None:
            self.reset_acceptance()

    @classmethod
    def from_config(cls, cfg: LatticeConfig, n_chains=1, seed=defaults.seed, unit=None,
                    scale=defaults.proposal_scale, rng=None):
        "n_chains copies of cfg, driven by the generator of (seed, unit)."
        P = np.repeat(cfg.points()[None], int(n_chains), axis=0)
        rng = rng if rng is not None else derive_rng(seed, unit)
        return cls(cfg.window, P, rng, scale)

    @property
    def n_chains(self):
        return self.points.shape[0]

    @property
    def acceptance(self):
        "Per-site acceptance ratio since the last reset."
        return self.accepted / np.maximum(self.proposed, 1)

    @property
    def rng_state(self):
        return self.rng.bit_generator.state

    def reset_acceptance(self):
        self.accepted = np.zeros(self.window.size)
        self.proposed = np.zeros(self.window.size)

    def config(self, chain=0):
        return LatticeConfig.from_points(self.window, self.points[chain])


def update_sites(state: ChainState, spec, sites, scales=None):
    """One Metropolis update of each site in `sites`, for every chain.

    The sites must be pairwise non-adjacent; each then sees only frozen
    neighbours, so the updates are independent and done in one pass.
    """
    w = state.window
    sites = list(sites)
    for i in sites:
        if i not in w:
            raise ModelError("site %d not in window %s" % (i, w))
    cols = np.array(w.columns(sites), dtype=int)
    gaps = np.abs(np.subtract.outer(cols, cols))
    if len(set(sites)) != len(sites) or np.any(gaps == 1):
        raise ValueError("sites %s are not pairwise non-adjacent" % sites)
    idx = cols - 1
    sigma = state.scales[idx] if scales is None else np.broadcast_to(np.asarray(scales, dtype=float), idx.shape)
    n, k = state.n_chains, len(cols)
    noise = state.rng.standard_normal((n, k, 3))
    old = state.points[:, cols]
    new = old + noise * np.stack([sigma, sigma, sigma ** 2], axis=-1)
    R_new = state.distances.copy()
    R_new[:, cols] = distance_array(new)
    dH = np.empty((n, k))
    for m, c in enumerate(cols):
        dH[:, m] = window_energy(spec, w, R_new, [c]) - window_energy(spec, w, state.distances, [c])
    with np.errstate(divide="ignore"):
        log_u = np.log(state.rng.random((n, k)))
    accept = log_u < -dH
    state.points[:, cols] = np.where(accept[..., None], new, old)
    state.distances[:, cols] = np.where(accept, R_new[:, cols], state.distances[:, cols])
    state.accepted[idx] += accept.sum(axis=0)
    state.proposed[idx] += n
    return state


def metropolis_site_update(state, spec, i, proposal_scale=None):
    return update_sites(state, spec, [i], None if proposal_scale is None else [proposal_scale])


def sweep(state, spec, schedule=Schedule.CHECKERBOARD):
    """One update per site: left to right, or even sites then odd sites."""
    schedule = Schedule(schedule)
    w = state.window
    if schedule is Schedule.SEQUENTIAL:
        for i in w.sites:
            update_sites(state, spec, [i])
    else:
        for parity in (0, 1):
            color = w.color(parity)
            if color:
                update_sites(state, spec, color)
    state.step_count += 1
    return state


def tune(state, target=defaults.target_acceptance):
    state.scales = state.scales * np.exp(state.acceptance - target)
    state.reset_acceptance()


class ChainRunner(Observable):
    "Drives a ChainState through burn-in and sampling."

    def __init__(self, spec, state, schedule=Schedule.CHECKERBOARD,
                 tune_interval=defaults.tune_interval, target=defaults.target_acceptance):
        Observable.__init__(self)
        self._spec = spec
        self.state = state
        self._schedule = Schedule(schedule)
        self._tune_interval = int(tune_interval)
        self._target = target
        self.warnings = []
        self.register_plugins(SamplerPlugin)

    def message_context(self):
        return {"runner": self, "state": self.state, "spec": self._spec}

    def _burn(self, sweeps, trace=None, tuning=True):
        for i in range(sweeps):
            sweep(self.state, self._spec, self._schedule)
            if trace is not None:
                trace.append(self.state.distances[:, 1:-1].copy())
            if tuning and (i + 1) % self._tune_interval == 0:
                self.update_observers("tuned", i=i)
                tune(self.state, self._target)

    def burn_in(self, sweeps):
        "Tuned burn-in of a fixed length; the proposal is frozen afterwards."
        self._burn(int(sweeps))
        self.state.reset_acceptance()
        self.update_observers("burned in", sweeps=int(sweeps))
        return int(sweeps)

    def auto_burn_in(self, pilot=None, factor=10.0):
        """Burn-in of `factor` integrated autocorrelation times of the site
        distances, measured on the second half of a tuned pilot run."""
        pilot = pilot or 20 * self._tune_interval
        trace = []
        self._burn(pilot, trace)
        x = np.stack(trace, axis=1)[:, pilot // 2:]
        tau = max(integrated_autocorrelation_time(x[..., c]) for c in range(x.shape[-1]))
        extra = max(0, int(np.ceil(factor * tau)) - pilot)
        logger.debug("pilot tau_int = %.2f, extending burn-in by %d sweeps", tau, extra)
        self._burn(extra, tuning=False)
        self.state.reset_acceptance()
        self.update_observers("burned in", sweeps=pilot + extra, tau=tau)
        return pilot + extra

    def run(self, n_sweeps, record, thin=1):
        """Sweep n_sweeps times, calling record(state) -> (n_chains, ...) after
        every thin-th sweep. Returns the records stacked on axis 1."""
        out = []
        self.update_observers("begin", n=n_sweeps)
        for i in range(n_sweeps):
            sweep(self.state, self._spec, self._schedule)
            if (i + 1) % thin == 0:
                out.append(record(self.state))
            self.update_observers("post sweep", i=i, n=n_sweeps)
        self.update_observers("finished")
        if not out:
            raise ValueError("no samples recorded from %d sweeps with thin=%d" % (n_sweeps, thin))
        return np.stack(out, axis=1)
