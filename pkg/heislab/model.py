"""
Hamiltonians of Heisenberg-valued spins on finite windows of Z.

All shipped models are radial: they see a spin x only through d(x). A
configuration on a window [lo, hi] is therefore often handled as an array
of distances laid out as

    [left boundary, lo, lo + 1, ..., hi, right boundary]

and the energy routines here work on arrays of that layout with any number
of leading axes.

Each nearest-neighbour bond touching the window is counted once with the
symmetrised potential (V(x, y) + V(y, x)) / 2.
"""
import enum
import math
import types
from dataclasses import dataclass, field
from typing import Mapping, Tuple

import numpy as np

import logging

from . import defaults
from .exceptions import ModelError, SingularPointError
from .group import GroupElement, HorizontalVector, ScalarField, sub_gradient
from .metric import distance_array, distance_gradient, geodesic_points

logger = logging.getLogger(__name__)

NEIGHBOURS = 2


class Interaction(enum.Enum):
    NONE = "none"
    IP_QUADRATIC = "ip_quadratic"
    IP_POWER = "ip_power"
    EX1_DIFF = "ex1_diff"
    EX2_SUM = "ex2_sum"


FAMILIES = ("example1", "example2", "ip_quadratic", "ip_power", "mu_p", "custom")


@dataclass(frozen=True)
class ModelSpec:
    """A radial nearest-neighbour Hamiltonian.

    phase(x) = phase_coefficient * d(x)^phase_exponent, and each bond {i, j}
    contributes J_ij * V(d(x_i), d(x_j)) with J_ij = coupling unless
    overridden in bond_couplings.
    """
    family: str
    phase_exponent: float
    phase_coefficient: float = 1.0
    interaction: Interaction = Interaction.NONE
    coupling: float = 0.0
    rho: float = 1.0
    interaction_exponent: float = 2.0
    q: float = 2.0
    j_max: float = 1.0
    bond_couplings: Tuple[Tuple[int, int, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "interaction", Interaction(self.interaction))
        object.__setattr__(self, "bond_couplings",
                           tuple((int(i), int(j), float(J)) for i, j, J in self.bond_couplings))
        self.validate()

    @property
    def p(self):
        "Holder dual of q."
        return self.q / (self.q - 1.0)

    @property
    def s(self):
        return self.phase_exponent

    @property
    def verified_regime(self):
        if self.family == "example1":
            return 1.0 <= self.s < 2.0
        if self.family == "example2":
            return 1.0 <= self.s < self.p
        return True

    def validate(self):
        if self.family not in FAMILIES:
            raise ModelError("unknown model family %r" % self.family)
        for name in ("phase_exponent", "phase_coefficient", "coupling", "rho",
                     "interaction_exponent", "q", "j_max"):
            if not np.isfinite(getattr(self, name)):
                raise ModelError("%s must be finite" % name)
        if not 1.0 < self.q <= 2.0:
            raise ModelError("q must lie in (1, 2], got %g" % self.q)
        if not self.phase_coefficient > 0 or not self.phase_exponent > 0:
            raise ModelError("the phase must be a positive multiple of a positive power of d")
        for J in [self.coupling] + [J for _, _, J in self.bond_couplings]:
            if J < 0 and self.interaction is not Interaction.IP_QUADRATIC:
                raise ModelError("coupling must be nonnegative, got %g" % J)
            if abs(J) >= self.j_max:
                raise ModelError("|coupling| %g must be below j_max=%g" % (J, self.j_max))
        for i, j, _ in self.bond_couplings:
            if abs(i - j) != 1:
                raise ModelError("bond (%d, %d) does not join nearest neighbours" % (i, j))
        if self.family == "example1":
            if not self.s < 2.0:
                raise ModelError("example1 requires s < 2, got %g" % self.s)
            if self.s < 1.0:
                logger.warning("example1 with s=%g < 1 is outside the verified regime 1 <= s < 2", self.s)
        if self.family == "example2" and not 1.0 <= self.s < self.p:
            raise ModelError("example2 requires 1 <= s < p=%g, got s=%g" % (self.p, self.s))
        if self.interaction is Interaction.IP_POWER and self.rho < 0:
            raise ModelError("ip_power requires rho >= 0")
        if self.interaction is Interaction.IP_QUADRATIC:
            self._check_quadratic_integrable()
        if self.interaction is not Interaction.NONE and self.interaction is not Interaction.EX1_DIFF \
                and self.interaction_exponent < 1.0:
            raise ModelError("interaction exponent must be at least 1")

    def _check_quadratic_integrable(self):
        eps = min([self.coupling] + [J for _, _, J in self.bond_couplings])
        if eps >= 0:
            return
        if self.phase_exponent < 2.0:
            raise ModelError("ip_quadratic with a negative coupling needs phase exponent p >= 2, got %g"
                             % self.phase_exponent)
        if self.phase_exponent > 2.0:
            return
        # a bond eps*[(1+rho^2)(x^2+y^2)/2 + 2 rho x y] is at least eps*(1+|rho|)^2 (x^2+y^2)/2
        # for eps < 0, and every spin sits in NEIGHBOURS bonds
        bound = -2.0 * self.phase_coefficient / (NEIGHBOURS * (1.0 + abs(self.rho)) ** 2)
        if not eps > bound:
            raise ModelError("ip_quadratic with rho=%g needs epsilon > -2 alpha/(N (1+|rho|)^2) = %g "
                             "for a finite partition function, got %g" % (self.rho, bound, eps))

    # energy kernels on distances

    def phase(self, r):
        return self.phase_coefficient * np.asarray(r, dtype=float) ** self.phase_exponent

    def phase_prime(self, r):
        r = np.asarray(r, dtype=float)
        e = self.phase_exponent
        with np.errstate(divide="ignore"):
            return self.phase_coefficient * e * np.power(r, e - 1.0)

    def pair(self, x, y):
        "Symmetrised potential between spins at distances x and y."
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        kind = self.interaction
        if kind is Interaction.NONE:
            return np.zeros(np.broadcast(x, y).shape)
        if kind is Interaction.EX1_DIFF:
            return (x - y) ** 2
        if kind is Interaction.EX2_SUM:
            return (x + y) ** self.interaction_exponent
        rho = self.rho
        if kind is Interaction.IP_QUADRATIC:
            return 0.5 * ((x + rho * y) ** 2 + (y + rho * x) ** 2)
        s = self.interaction_exponent
        return 0.5 * ((x + rho * y) ** s + (y + rho * x) ** s)

    def pair_dx(self, x, y):
        "Partial derivative of pair(x, y) in x."
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        kind = self.interaction
        if kind is Interaction.NONE:
            return np.zeros(np.broadcast(x, y).shape)
        if kind is Interaction.EX1_DIFF:
            return 2.0 * (x - y)
        if kind is Interaction.EX2_SUM:
            e = self.interaction_exponent
            return e * (x + y) ** (e - 1.0)
        rho = self.rho
        if kind is Interaction.IP_QUADRATIC:
            return (x + rho * y) + rho * (y + rho * x)
        s = self.interaction_exponent
        return 0.5 * s * ((x + rho * y) ** (s - 1.0) + rho * (y + rho * x) ** (s - 1.0))

    def coupling_for(self, i, j):
        a, b = min(i, j), max(i, j)
        for u, v, J in self.bond_couplings:
            if (min(u, v), max(u, v)) == (a, b):
                return J
        return self.coupling

    def to_dict(self):
        return {
            "class": self.__class__.__name__,
            "family": self.family,
            "phase_exponent": self.phase_exponent,
            "phase_coefficient": self.phase_coefficient,
            "interaction": self.interaction.value,
            "coupling": self.coupling,
            "rho": self.rho,
            "interaction_exponent": self.interaction_exponent,
            "q": self.q,
            "j_max": self.j_max,
            "bond_couplings": [list(b) for b in self.bond_couplings],
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        assert d.pop("class", cls.__name__) == cls.__name__
        d["bond_couplings"] = tuple(tuple(b) for b in d.get("bond_couplings", ()))
        return cls(**d)

    def to_s(self):
        parts = ["%s: phase %g*d^%g" % (self.family, self.phase_coefficient, self.phase_exponent)]
        if self.interaction is not Interaction.NONE:
            parts.append("interaction %s (J=%g, rho=%g, exponent=%g)" % (
                self.interaction.value, self.coupling, self.rho, self.interaction_exponent))
        parts.append("q=%g p=%g" % (self.q, self.p))
        return ", ".join(parts)


def example1(s, J, q=2.0, j_max=1.0):
    "phi = d^s, V = (d(x) - d(y))^2."
    return ModelSpec("example1", s, 1.0, Interaction.EX1_DIFF, J, q=q, j_max=j_max)


def example2(s, J, q=2.0, j_max=1.0):
    "phi = d^s, V = (d(x) + d(y))^p with p dual to q."
    p = q / (q - 1.0)
    return ModelSpec("example2", s, 1.0, Interaction.EX2_SUM, J, interaction_exponent=p, q=q, j_max=j_max)


def ip_quadratic(alpha, epsilon, rho=1.0, p=2.0, j_max=1.0):
    "phi = alpha d^p, V = (d(x) + rho d(y))^2 with coupling epsilon."
    q = p / (p - 1.0)
    return ModelSpec("ip_quadratic", p, alpha, Interaction.IP_QUADRATIC, epsilon, rho=rho, q=q, j_max=j_max)


def ip_power(alpha, epsilon, rho, s, p=2.0, j_max=1.0):
    "phi = alpha d^p, V = (d(x) + rho d(y))^s."
    q = p / (p - 1.0)
    return ModelSpec("ip_power", p, alpha, Interaction.IP_POWER, epsilon, rho=rho,
                     interaction_exponent=s, q=q, j_max=j_max)


def mu_p(beta, p=2.0):
    "Single-spin measure exp(-beta d^p), no interaction."
    q = p / (p - 1.0) if p > 1 else 2.0
    return ModelSpec("mu_p", p, beta, Interaction.NONE, 0.0, q=min(q, 2.0))


@dataclass(frozen=True)
class Window:
    "Integer interval [lo, hi] of Z."
    lo: int
    hi: int

    def __post_init__(self):
        if self.hi < self.lo:
            raise ModelError("empty window [%d, %d]" % (self.lo, self.hi))

    @property
    def sites(self):
        return range(self.lo, self.hi + 1)

    @property
    def size(self):
        return self.hi - self.lo + 1

    @property
    def width(self):
        "Columns in the distance layout, boundary included."
        return self.size + 2

    @property
    def boundary_sites(self):
        return (self.lo - 1, self.hi + 1)

    def __contains__(self, site):
        return self.lo <= site <= self.hi

    def column(self, site):
        if not self.lo - 1 <= site <= self.hi + 1:
            raise ModelError("site %d is not in the closure of %s" % (site, self))
        return site - self.lo + 1

    def columns(self, sites):
        return [self.column(i) for i in sites]

    def site(self, column):
        return column + self.lo - 1

    @property
    def site_columns(self):
        return list(range(1, self.size + 1))

    def color(self, parity):
        "Sites of the given parity; parity 0 is the even sublattice."
        return [i for i in self.sites if i % 2 == parity]

    @property
    def bonds(self):
        "All nearest-neighbour bonds touching the window."
        return [(i, i + 1) for i in range(self.lo - 1, self.hi + 1)]

    def shifted(self, k):
        return Window(self.lo + k, self.hi + k)

    def __str__(self):
        return "[%d, %d]" % (self.lo, self.hi)


@dataclass(frozen=True)
class LatticeConfig:
    "Spins on a window and frozen boundary values on its two outer neighbours."
    window: Window
    spins: Mapping[int, GroupElement]
    boundary: Mapping[int, GroupElement] = field(default_factory=dict)

    def __post_init__(self):
        spins = dict(self.spins)
        boundary = dict(self.boundary)
        missing = [i for i in self.window.sites if i not in spins]
        if missing:
            raise ModelError("sites %s of window %s have no spin" % (missing, self.window))
        extra = [i for i in spins if i not in self.window]
        if extra:
            raise ModelError("spins given outside window %s: %s" % (self.window, extra))
        lacking = [j for j in self.window.boundary_sites if j not in boundary]
        if lacking:
            raise ModelError("missing boundary value for site(s) %s" % lacking)
        for j in boundary:
            if j not in self.window.boundary_sites:
                raise ModelError("site %d is not adjacent to window %s" % (j, self.window))
        object.__setattr__(self, "spins", types.MappingProxyType(spins))
        object.__setattr__(self, "boundary", types.MappingProxyType(boundary))

    @classmethod
    def from_points(cls, window, points):
        "Build from an array (window.width, 3) in the boundary-inclusive layout."
        P = np.asarray(points, dtype=float)
        spins = {i: GroupElement.from_array(P[window.column(i)]) for i in window.sites}
        boundary = {j: GroupElement.from_array(P[window.column(j)]) for j in window.boundary_sites}
        return cls(window, spins, boundary)

    @classmethod
    def from_distances(cls, window, distances, boundary=(0.0, 0.0)):
        "Planar spins (r, 0, 0) realising the given distances."
        r = np.concatenate([[boundary[0]], np.asarray(distances, dtype=float), [boundary[1]]])
        P = geodesic_points(0.0, 0.0, r)
        return cls.from_points(window, P)

    def points(self):
        w = self.window
        order = [w.lo - 1] + list(w.sites) + [w.hi + 1]
        return np.array([self[i].as_array() for i in order])

    def distances(self):
        return distance_array(self.points())

    def __getitem__(self, site):
        if site in self.spins:
            return self.spins[site]
        return self.boundary[site]

    def with_spin(self, site, g):
        if site not in self.window:
            raise ModelError("site %d not in window %s" % (site, self.window))
        spins = dict(self.spins)
        spins[site] = g
        return LatticeConfig(self.window, spins, self.boundary)

    def shifted(self, k):
        "The same configuration translated by k sites."
        return LatticeConfig(self.window.shifted(k),
                             {i + k: g for i, g in self.spins.items()},
                             {j + k: g for j, g in self.boundary.items()})

    def restrict(self, window):
        """Configuration on a sub-window; sites of the old window that border
        the new one become boundary values."""
        if not (self.window.lo <= window.lo and window.hi <= self.window.hi):
            raise ModelError("%s is not inside %s" % (window, self.window))
        spins = {i: self[i] for i in window.sites}
        boundary = {j: self[j] for j in window.boundary_sites}
        return LatticeConfig(window, spins, boundary)


@dataclass
class HamiltonianValue:
    total: float
    per_site_phase: list
    per_bond_interaction: list
    bonds: list

    def check_additivity(self):
        return self.total == math.fsum(self.per_site_phase + self.per_bond_interaction)


def _bond_arrays(spec, window, cols=None):
    "Left columns and couplings of bonds touching `cols` (default all sites)."
    if cols is None:
        cols = window.site_columns
    cols = set(cols)
    left = [c for c in range(window.width - 1) if c in cols or c + 1 in cols]
    J = np.array([spec.coupling_for(window.site(c), window.site(c + 1)) for c in left])
    return np.array(left, dtype=int), J


def window_energy(spec, window, R, cols=None):
    """Energy of the spins in columns `cols` (all sites by default) given the
    rest of the distance array R (..., window.width): their phases plus every
    bond with at least one end among them."""
    R = np.asarray(R, dtype=float)
    if cols is None:
        cols = window.site_columns
    cols = list(cols)
    energy = spec.phase(R[..., cols]).sum(axis=-1)
    if spec.interaction is not Interaction.NONE:
        left, J = _bond_arrays(spec, window, cols)
        if len(left):
            energy = energy + (J * spec.pair(R[..., left], R[..., left + 1])).sum(axis=-1)
    return energy


def site_energy_prime(spec, window, R, col):
    "Derivative in r of the energy at column `col` with everything else frozen."
    R = np.asarray(R, dtype=float)
    x = R[..., col]
    out = spec.phase_prime(x)
    if spec.interaction is not Interaction.NONE:
        site = window.site(col)
        for nb in (col - 1, col + 1):
            J = spec.coupling_for(site, window.site(nb))
            out = out + J * spec.pair_dx(x, R[..., nb])
    return out


def hamiltonian(cfg: LatticeConfig, spec: ModelSpec) -> HamiltonianValue:
    w = cfg.window
    d = cfg.distances()
    phases = [float(v) for v in spec.phase(d[1:-1])]
    bonds = w.bonds
    inter = [float(spec.coupling_for(i, j) * spec.pair(d[w.column(i)], d[w.column(j)]))
             for i, j in bonds]
    total = math.fsum(phases + inter)
    return HamiltonianValue(total, phases, inter, bonds)


def _site_field(cfg, spec, i):
    "H^{i, omega} as a function of x_i, the other spins frozen."
    w = cfg.window
    R0 = cfg.distances()
    col = w.column(i)

    def energy(P):
        R = np.broadcast_to(R0, P.shape[:-1] + R0.shape).copy()
        R[..., col] = distance_array(P)
        return window_energy(spec, w, R, [col])

    return ScalarField(energy, name="H_%d" % i)


def grad_hamiltonian_site(cfg: LatticeConfig, spec: ModelSpec, i: int, h=None,
                          method="analytic") -> HorizontalVector:
    """Sub-gradient in x_i of the energy of site i.

    The analytic path is F'(d) times the sub-gradient of d; method="fd"
    differentiates the energy along the horizontal flows instead.
    """
    w = cfg.window
    if i not in w:
        raise ModelError("site %d not in window %s" % (i, w))
    R = cfg.distances()
    col = w.column(i)
    Fp = float(site_energy_prime(spec, w, R, col))
    x = cfg[i]
    if x.is_on_axis(tol=defaults.axis_guard):
        if Fp == 0.0:
            return HorizontalVector(0.0, 0.0)
        raise SingularPointError("site %d is on the x3-axis where F'(d)=%g != 0" % (i, Fp))
    if method == "fd":
        return sub_gradient(_site_field(cfg, spec, i), x, h)
    if method != "analytic":
        raise ValueError("method must be 'analytic' or 'fd'")
    g = distance_gradient(x)
    return HorizontalVector(Fp * g.v1, Fp * g.v2)
