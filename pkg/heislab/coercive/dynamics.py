"""
The sweeping-out operator P = E^{Gamma_1} E^{Gamma_0} on a finite window.

Gamma_0 holds the even sites of the window and Gamma_1 the odd ones. Sites
of one colour see only frozen neighbours of the other colour, so a colour
update is a sequence of one-site conditional expectations.
"""
import string
from dataclasses import dataclass, field

import numpy as np
import scipy.special

import logging

from heislab import defaults
from heislab.exceptions import ConvergedException, GridResolutionError
from heislab.functions import require_radial
from heislab.gibbs import WindowQuadrature, site_tail_radius, exact_expectation, boundary_distances
from heislab.observe import Observable
from heislab.quadrature import QuadratureParams, interpolate, normalized_weights, radial_rule
from .functionals import check_q
from .plugins.dynamics_plugin import DynamicsPlugin

logger = logging.getLogger(__name__)

MAX_BLOCK_SITES = 7


@dataclass
class TelescopeReport:
    lhs: float
    terms: tuple
    correction: float
    tolerance: float

    @property
    def rhs(self):
        return float(sum(self.terms) - self.correction)

    @property
    def difference(self):
        return abs(self.lhs - self.rhs)

    @property
    def passed(self):
        return self.difference <= self.tolerance


def entropy_telescoping_check(spec, window, omega, f, q=None, tol=1e-6, params=None) -> TelescopeReport:
    """Ent_nu(g) with g = f^q against

        nu Ent_{Gamma_0}(g) + nu Ent_{Gamma_1}(E^{Gamma_0} g) + nu(Pg log Pg) - nu g log nu g

    where nu = E^{Lambda, omega}, by nested quadrature."""
    require_radial(f)
    q = spec.q if q is None else q
    check_q(q)
    if window.size > 3:
        raise ValueError("nested quadrature is limited to windows of at most 3 sites")
    nu = WindowQuadrature(spec, window, omega, params)
    f_on = f.on_window(window)
    if np.any(f_on(nu.grid) <= 0):
        raise ValueError("%s must be positive" % f.name)

    def g(R):
        return f_on(R) ** q

    def g_log_g(R):
        return scipy.special.xlogy(g(R), g(R))

    def cond(h, sites):
        return nu.conditional(h, sites) if sites else h

    even, odd = window.color(0), window.color(1)
    E0g = cond(g, even)

    def E0g_log(R):
        return scipy.special.xlogy(E0g(R), E0g(R))

    Pg = cond(E0g, odd)(nu.grid)
    Pg_log = nu.expect(scipy.special.xlogy(Pg, Pg))
    t1 = nu.expect_function(cond(g_log_g, even)) - nu.expect_function(E0g_log)
    t2 = nu.expect_function(cond(E0g_log, odd)) - Pg_log
    t3 = Pg_log
    mean = nu.expect_function(g)
    lhs = nu.expect_function(g_log_g) - scipy.special.xlogy(mean, mean)
    report = TelescopeReport(float(lhs), (float(t1), float(t2), float(t3)),
                             float(scipy.special.xlogy(mean, mean)), tol)
    logger.debug("telescoping on %s: |%.12g - %.12g| = %.3g", window, report.lhs, report.rhs, report.difference)
    return report


@dataclass
class BlockDynamicsRun:
    window: object
    spec: object
    f: object
    nodes: np.ndarray = field(repr=False)
    iterates: list = field(repr=False)
    grid_residuals: list
    residuals: list
    grid_mean: float
    reference: float
    converged: bool = False

    @property
    def n_iterations(self):
        return len(self.grid_residuals) - 1

    @property
    def monotone(self):
        "Residuals nonincreasing after the first iterate."
        r = np.asarray(self.residuals[1:])
        return bool(np.all(np.diff(r) <= 1e-15))

    def tail_slope(self, k=5):
        "Slope of log residual over the last k iterates."
        r = np.maximum(np.asarray(self.residuals[-k:]), 1e-300)
        return float(np.polyfit(np.arange(len(r)), np.log(r), 1)[0])

    def evaluate(self, distances, n=-1):
        "Iterate n at off-grid site distances (size,), by barycentric interpolation."
        values = self.iterates[n]
        for x in distances:
            values = interpolate(self.nodes, values, x, axis=0)
        return float(values)


class BlockDynamics(Observable):
    """Tensor-grid representation of P on a window of at most seven sites.

    Functions live on the grid (n,)*size of one-site Gauss-Legendre nodes;
    the one-site kernels integrate with the same nodes, so the grid measure
    is exactly invariant under P.
    """

    def __init__(self, spec, window, omega, nodes=defaults.block_nodes, params=None):
        Observable.__init__(self)
        if window.size > MAX_BLOCK_SITES:
            raise ValueError("block dynamics is limited to %d sites" % MAX_BLOCK_SITES)
        self.spec = spec
        self.window = window
        self.params = params or QuadratureParams()
        self.boundary = boundary_distances(omega, window)
        self.r_max = self.params.r_max or site_tail_radius(spec, self.boundary, self.params)
        self.n = int(nodes)
        self.nodes, self.node_weights = radial_rule(self.n, self.r_max)
        self.kernels = {i: self._kernel(i, self.nodes, self.node_weights) for i in window.sites}
        self.register_plugins(DynamicsPlugin)

    def _neighbour_values(self, j, nodes):
        w = self.window
        if j == w.lo - 1:
            return np.array([self.boundary[0]])
        if j == w.hi + 1:
            return np.array([self.boundary[1]])
        return nodes

    def _kernel(self, i, nodes, weights):
        """K[a, b, m]: weight of node m for site i given left neighbour a and
        right neighbour b (axes of length one for boundary neighbours)."""
        spec = self.spec
        left = self._neighbour_values(i - 1, self.nodes)[:, None, None]
        right = self._neighbour_values(i + 1, self.nodes)[None, :, None]
        r = nodes[None, None, :]
        E = spec.phase(r) + spec.coupling_for(i - 1, i) * spec.pair(r, left) \
            + spec.coupling_for(i, i + 1) * spec.pair(r, right)
        return normalized_weights(-E + np.log(weights), axis=-1)

    def check_resolution(self, tol=1e-5):
        """Richardson check: one-site conditional means of d with n and 2n
        nodes must agree to tol * r_max."""
        r2, w2 = radial_rule(2 * self.n, self.r_max)
        worst = 0.0
        for i in self.window.sites:
            m1 = np.sum(self.kernels[i] * self.nodes, axis=-1)
            m2 = np.sum(self._kernel(i, r2, w2) * r2, axis=-1)
            worst = max(worst, float(np.max(np.abs(m1 - m2))))
        if worst > tol * self.r_max:
            raise GridResolutionError("one-site kernels with %d and %d nodes differ by %.3g"
                                      % (self.n, 2 * self.n, worst))
        return worst

    def apply_site(self, F, i):
        "E^{i, .} on a grid function."
        w = self.window
        k = w.size
        letters = string.ascii_lowercase[:k]
        j = i - w.lo
        kern = (letters[j - 1] if j > 0 else "") + (letters[j + 1] if j < k - 1 else "") + "z"
        K = self.kernels[i]
        shape = [d for d, present in zip(K.shape[:2], (j > 0, j < k - 1)) if present]
        K = K.reshape(shape + [self.n])
        src = letters[:j] + "z" + letters[j + 1:]
        out = letters[:j] + letters[j + 1:]
        G = np.einsum("%s,%s->%s" % (kern, src, out), K, F)
        return np.broadcast_to(np.expand_dims(G, j), F.shape).copy()

    def apply_color(self, F, parity):
        for i in self.window.color(parity):
            F = self.apply_site(F, i)
        return F

    def apply(self, F):
        "P F = E^{Gamma_1} E^{Gamma_0} F."
        return self.apply_color(self.apply_color(F, 0), 1)

    def grid(self):
        mesh = np.meshgrid(*([self.nodes] * self.window.size), indexing="ij")
        R = np.empty(mesh[0].shape + (self.window.width,))
        R[..., 0] = self.boundary[0]
        R[..., -1] = self.boundary[1]
        for c, m in enumerate(mesh, start=1):
            R[..., c] = m
        return R

    def grid_measure(self):
        return WindowQuadrature(self.spec, self.window, self.boundary,
                                QuadratureParams(nodes=self.n, r_max=self.r_max))

    def message_context(self):
        return {"dynamics": self}

    def iterate(self, f, n_max=defaults.block_iterations, tolerance=None, keep_iterates=False,
                reference=None):
        require_radial(f)
        F = f.on_window(self.window)(self.grid())
        if np.any(F < 0):
            raise ValueError("%s must be nonnegative on the grid" % f.name)
        grid_mean = self.grid_measure().expect(F)
        if reference is None:
            reference = exact_expectation(self.spec, self.window, self.boundary, f, self.params)
        iterates = [F]
        grid_res = [float(np.max(np.abs(F - grid_mean)))]
        res = [float(np.max(np.abs(F - reference)))]
        converged = False
        self.update_observers("begin", n_max=n_max)
        try:
            for i in range(1, n_max + 1):
                F = self.apply(F)
                grid_res.append(float(np.max(np.abs(F - grid_mean))))
                res.append(float(np.max(np.abs(F - reference))))
                if keep_iterates:
                    iterates.append(F)
                self.update_observers("post iteration", i=i, residual=res[-1], tolerance=tolerance)
        except ConvergedException as e:
            logger.debug(str(e))
            converged = True
        if not keep_iterates:
            iterates.append(F)
        self.update_observers("finished")
        return BlockDynamicsRun(self.window, self.spec, f, self.nodes, iterates, grid_res, res,
                                float(grid_mean), float(reference), converged)


def block_dynamics_iterate(spec, window, omega, f, n_max=defaults.block_iterations,
                           nodes=defaults.block_nodes, tolerance=None, keep_iterates=False,
                           params=None, resolution_tol=1e-5) -> BlockDynamicsRun:
    """Iterates P^n f with residuals against the grid's own stationary mean
    and against an independently computed E^{Lambda, omega} f."""
    dyn = BlockDynamics(spec, window, omega, nodes, params)
    dyn.check_resolution(resolution_tol)
    run = dyn.iterate(f, n_max, tolerance, keep_iterates)
    logger.info("block dynamics on %s: residual %.3g after %d iterations",
                window, run.residuals[-1], run.n_iterations)
    return run
