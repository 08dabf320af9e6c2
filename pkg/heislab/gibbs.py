"""
Local specifications E^{Lambda, omega} of radial models by quadrature.

For a radial model the law of d(x_i) under Lebesgue measure has density
proportional to r^3, so every expectation of a radial cylinder function
is an integral over distances with weights r^3 exp(-H). Multi-site
expectations use tensor products of one-site Gauss-Legendre rules.
"""
import itertools
from dataclasses import dataclass, field

import numpy as np

import logging

from . import defaults
from .exceptions import ModelError, QuadratureError
from .functions import require_radial
from .group import GroupElement
from .metric import distance_array, radial_density_constant
from .model import Window, LatticeConfig, window_energy
from .quadrature import QuadratureParams, gauss_legendre, radial_rule, tail_radius, normalized_weights

logger = logging.getLogger(__name__)

CHUNK = 2 ** 21


def boundary_distances(omega, window=None):
    """Distances (left, right) of a boundary given as a pair of numbers, a
    pair of GroupElements, a site -> GroupElement mapping or a LatticeConfig."""
    if isinstance(omega, LatticeConfig):
        window = omega.window
        omega = omega.boundary
    if hasattr(omega, "items"):
        if window is None:
            lo, hi = sorted(omega)
        else:
            lo, hi = window.boundary_sites
        try:
            omega = (omega[lo], omega[hi])
        except KeyError as e:
            raise ModelError("missing boundary value for site %s" % e.args[0])
    vals = []
    for w in omega:
        if isinstance(w, GroupElement):
            vals.append(float(distance_array(w.as_array())))
        else:
            vals.append(float(w))
    if len(vals) != 2 or min(vals) < 0:
        raise ModelError("a boundary needs two nonnegative distances, got %s" % (vals,))
    return tuple(vals)


def _site_energy(spec, neighbours):
    "Energy of a lone site as a function of its distance, for several neighbour pairs."
    neighbours = np.atleast_2d(np.asarray(neighbours, dtype=float))

    def energy(r):
        r = np.asarray(r, dtype=float)[:, None]
        a, b = neighbours[:, 0], neighbours[:, 1]
        return spec.phase(r) + spec.coupling * (spec.pair(r, a) + spec.pair(r, b))

    return energy


def site_tail_radius(spec, neighbour_values, params=None):
    """Tail radius of a one-site law whose neighbours take any of the given
    distances, iterated so that neighbours may sit at the radius itself."""
    params = params or QuadratureParams()
    vals = sorted(set(float(v) for v in neighbour_values) | {0.0})
    r = 0.0
    for _ in range(3):
        pool = vals + ([r] if r > 0 else [])
        pairs = list(itertools.product(pool, repeat=2))
        r_new = tail_radius(_site_energy(spec, pairs), params.tail_tolerance, params.safety)
        if r_new <= r:
            break
        r = r_new
    return r


def radial_weight(spec, neighbours=(0.0, 0.0)):
    "r -> exp(-H(r)) r^3 for one site with neighbours at the given distances."
    energy = _site_energy(spec, [neighbours])

    def weight(r):
        r = np.asarray(r, dtype=float)
        return np.exp(-energy(r.ravel())[:, 0]).reshape(r.shape) * r ** 3

    return weight


def _one_site(f_window, spec, window, R0, col, n, r_max):
    r, w = radial_rule(n, r_max)
    R = np.repeat(R0[None, :], n, axis=0)
    R[:, col] = r
    lw = -window_energy(spec, window, R, [col]) + np.log(w)
    W = normalized_weights(lw)
    return float(np.dot(W, f_window(R)))


def one_site_conditional_expectation(f, cfg, spec, i, quad=None):
    """E^{i, omega} f for a radial cylinder function f, all other spins frozen.

    The node count doubles until two successive rules agree to quad.rtol.
    """
    require_radial(f)
    quad = quad or QuadratureParams()
    w = cfg.window
    if i not in w:
        raise ModelError("site %d not in window %s" % (i, w))
    R0 = cfg.distances()
    col = w.column(i)
    r_max = quad.r_max or site_tail_radius(spec, [R0[col - 1], R0[col + 1]], quad)
    g = f.on_window(w)
    n = quad.nodes
    prev = _one_site(g, spec, w, R0, col, n, r_max)
    while n < quad.max_nodes:
        n *= 2
        cur = _one_site(g, spec, w, R0, col, n, r_max)
        if abs(cur - prev) <= quad.rtol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise QuadratureError("one-site rule did not reach rtol=%g with %d nodes" % (quad.rtol, n))


class WindowQuadrature:
    """Tensor-product rule for E^{Lambda, omega} on a window.

    Functions are evaluated on the grid of shape (n,)*size + (width,), the
    last axis in the boundary-inclusive layout of `Window`.
    """

    def __init__(self, spec, window, boundary, params=None):
        self.spec = spec
        self.window = window
        self.boundary = boundary_distances(boundary, window)
        self.params = params or QuadratureParams()
        self.r_max = self.params.r_max or site_tail_radius(spec, self.boundary, self.params)
        self.nodes, self.node_weights = radial_rule(self.params.nodes, self.r_max)
        k = window.size
        if self.params.nodes ** k > 5e7:
            raise QuadratureError("tensor rule with %d^%d nodes is too large" % (self.params.nodes, k))
        grids = np.meshgrid(*([self.nodes] * k), indexing="ij")
        R = np.empty(grids[0].shape + (window.width,)) if k else np.empty((window.width,))
        R[..., 0] = self.boundary[0]
        R[..., -1] = self.boundary[1]
        for c, g in enumerate(grids, start=1):
            R[..., c] = g
        self.grid = R
        logw = sum(np.log(np.meshgrid(*([self.node_weights] * k), indexing="ij")))
        lw = -window_energy(spec, window, R) + logw
        self.weights = normalized_weights(lw.ravel()).reshape(lw.shape)

    def expect(self, values):
        values = np.broadcast_to(values, self.weights.shape)
        return float(np.sum(self.weights * values))

    def expect_function(self, g):
        return self.expect(g(self.grid))

    def conditional(self, g, sites, nodes=None):
        "E^{sites, .} g with an inner rule independent of the outer one."
        return ConditionalExpectation(self.spec, self.window, g, sites,
                                      nodes or self.params.inner_nodes,
                                      neighbour_bound=self.r_max, boundary=self.boundary,
                                      params=self.params)


class ConditionalExpectation:
    """E^{A, .} g as a function of the columns outside A.

    Callable on distance arrays (..., width); evaluation is shared across rows
    with equal values outside A.
    """

    def __init__(self, spec, window, g, sites, nodes, neighbour_bound=0.0,
                 boundary=(0.0, 0.0), params=None):
        self.spec = spec
        self.window = window
        self.g = g
        self.sites = list(sites)
        if not self.sites or any(i not in window for i in self.sites):
            raise ModelError("conditioning sites %s must be a nonempty subset of %s" % (sites, window))
        self.cols = window.columns(self.sites)
        self.rest = [c for c in range(window.width) if c not in self.cols]
        params = params or QuadratureParams()
        self.r_max = site_tail_radius(spec, list(boundary) + [neighbour_bound], params)
        r, w = radial_rule(nodes, self.r_max)
        k = len(self.cols)
        mesh = np.meshgrid(*([r] * k), indexing="ij")
        self.inner = np.stack([m.ravel() for m in mesh], axis=-1)
        self.log_base = sum(np.log(m.ravel()) for m in np.meshgrid(*([w] * k), indexing="ij"))

    def _evaluate(self, rows):
        m = len(self.inner)
        out = np.empty(len(rows))
        step = max(1, CHUNK // (m * self.window.width))
        for a in range(0, len(rows), step):
            block = rows[a:a + step]
            R = np.empty((len(block), m, self.window.width))
            R[:, :, self.rest] = block[:, None, :]
            R[:, :, self.cols] = self.inner[None, :, :]
            lw = -window_energy(self.spec, self.window, R, self.cols) + self.log_base
            W = normalized_weights(lw)
            out[a:a + step] = np.sum(W * self.g(R), axis=-1)
        return out

    def __call__(self, R):
        R = np.asarray(R, dtype=float)
        flat = R.reshape(-1, R.shape[-1])[:, self.rest]
        uniq, inv = np.unique(flat, axis=0, return_inverse=True)
        return self._evaluate(uniq)[inv.ravel()].reshape(R.shape[:-1])


@dataclass
class DLRReport:
    window: Window
    subset: list
    lhs: float
    rhs: float
    tolerance: float

    @property
    def difference(self):
        return abs(self.lhs - self.rhs)

    @property
    def passed(self):
        return self.difference <= self.tolerance


def dlr_check(spec, window, omega, f, subset=None, tolerance=1e-6, params=None):
    """Compare E^{Lambda, omega}(E^{M, .} f) with E^{Lambda, omega} f."""
    require_radial(f)
    if window.size > 3:
        raise ValueError("nested quadrature is limited to windows of at most 3 sites")
    subset = list(window.sites)[:1] if subset is None else list(subset)
    outer = WindowQuadrature(spec, window, omega, params)
    g = f.on_window(window)
    rhs = outer.expect_function(g)
    lhs = outer.expect_function(outer.conditional(g, subset))
    report = DLRReport(window, subset, lhs, rhs, tolerance)
    logger.debug("DLR %s M=%s: |%.12g - %.12g| = %.3g", window, subset, lhs, rhs, report.difference)
    return report


@dataclass
class HStarReport:
    L: float
    partition_min: float
    energy_max: float
    omega_grid: np.ndarray = field(repr=False)
    partitions: np.ndarray = field(repr=False)

    @property
    def upper(self):
        "B*(L): the integral over B_L x B_L is at least 1/B*(L)."
        return 1.0 / self.partition_min

    @property
    def lower(self):
        "B_*(L): exp(-H) is at least 1/B_*(L) on B_L x B_L."
        return float(np.exp(self.energy_max))


def hstar_diagnostic(spec, L, n_grid=9, nodes=None):
    """Bounds of hypothesis (H*) for the sites {i-1, i+1} around a site i.

    Given boundary distances on {i-2, i, i+2} in [0, L], the two sites are
    independent, so the integral over B_L x B_L is a product of one-site
    integrals sigma * int_0^L r^3 exp(-H) dr.
    """
    if not L > 0:
        raise ValueError("L must be positive, got %r" % L)
    nodes = nodes or defaults.quadrature_nodes
    r, w = gauss_legendre(nodes, 0.0, L)
    sigma = radial_density_constant()
    omega = np.linspace(0.0, L, n_grid)
    # one-site integral over [0, L] for every neighbour pair (a, b)
    a = omega[:, None, None]
    b = omega[None, :, None]
    E = spec.phase(r) + spec.coupling * (spec.pair(r, a) + spec.pair(r, b))
    Z1 = sigma * np.sum(w * r ** 3 * np.exp(-E), axis=-1)
    # sites i-1 (neighbours i-2, i) and i+1 (neighbours i, i+2)
    Z = Z1[:, :, None] * Z1[None, :, :]
    # maximal energy over spins and boundary in B_L, checked on a grid
    x, a, c, y, e = np.meshgrid(*([np.linspace(0.0, L, n_grid)] * 5), indexing="ij", sparse=True)
    H = spec.phase(x) + spec.phase(y) + spec.coupling * (
        spec.pair(x, a) + spec.pair(x, c) + spec.pair(y, c) + spec.pair(y, e))
    if not np.all(np.isfinite(Z)) or Z.min() <= 0:
        raise QuadratureError("(H*) partition functions underflowed at L=%g" % L)
    return HStarReport(float(L), float(Z.min()), float(H.max()), omega, Z)


def _transfer_pass(spec, window, boundary, r, w, f_col=None, f_vals=None):
    "(sum of weights, weighted sum of f) for a chain of one-site rules."
    lo, hi = window.boundary_sites
    site_w = w * np.exp(-spec.phase(r))
    v = np.exp(-spec.coupling_for(lo, lo + 1) * spec.pair(boundary[0], r)) * site_w
    u = v * f_vals if f_col == 1 else v.copy()
    for col in range(2, window.width - 1):
        i = window.site(col)
        T = np.exp(-spec.coupling_for(i - 1, i) * spec.pair(r[:, None], r[None, :]))
        v = (v @ T) * site_w
        u = (u @ T) * site_w
        if col == f_col:
            u = u * f_vals
        m = v.max()
        v, u = v / m, u / m
    end = np.exp(-spec.coupling_for(hi - 1, hi) * spec.pair(r, boundary[1]))
    return float(np.dot(v, end)), float(np.dot(u, end))


def transfer_matrix_expectation(spec, window, omega, f, params=None):
    """E^{Lambda, omega} f for f of at most one site, by transfer matrices on
    one-site rules doubled until they agree to params.rtol.

    Independent of the tensor rules, and linear in the window size."""
    require_radial(f)
    if len(f.sites) > 1:
        raise ModelError("transfer matrices handle functions of one site, got %s" % f.name)
    params = params or QuadratureParams()
    boundary = boundary_distances(omega, window)
    r_max = params.r_max or site_tail_radius(spec, boundary, params)
    f_col = window.column(f.sites[0]) if f.sites else None
    if f_col is not None and f_col not in window.site_columns:
        raise ModelError("%s is not a function of a site in %s" % (f.name, window))
    n = params.inner_nodes
    prev = None
    while n <= params.max_nodes:
        r, w = radial_rule(n, r_max)
        f_vals = f.value(r[:, None]) if f_col is not None else None
        Z, Zf = _transfer_pass(spec, window, boundary, r, w, f_col, f_vals)
        cur = Zf / Z if f_col is not None else float(f.value(np.zeros((1, 0)))[0])
        if prev is not None and abs(cur - prev) <= params.rtol * max(1.0, abs(cur)):
            return cur
        prev = cur
        n *= 2
    raise QuadratureError("transfer-matrix rule did not reach rtol=%g" % params.rtol)


def exact_expectation(spec, window, omega, f, params=None):
    """E^{Lambda, omega} f by deterministic quadrature: transfer matrices for
    functions of at most one site, tensor rules on windows of at most 3 sites."""
    require_radial(f)
    if len(f.sites) <= 1:
        return transfer_matrix_expectation(spec, window, omega, f, params)
    if window.size <= 3:
        return WindowQuadrature(spec, window, omega, params).expect_function(f.on_window(window))
    raise ModelError("no quadrature for %s on %s" % (f.name, window))
