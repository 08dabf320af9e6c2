"""
Carnot-Caratheodory distance from the identity, geodesics and CC balls.

A unit-speed geodesic leaving the identity has constant-curvature control
e^{i(ku + phi)}. Writing theta = k s and t = theta / 2, its endpoint is

    z  = s e^{i(phi + t)} sin(t) / t
    x3 = s^2 (theta - sin theta) / (2 theta^2)

and it is minimizing while |theta| <= 2 pi. Inverting this gives the
distance: 8|x3| / |z|^2 = (2t - sin 2t) / sin^2 t determines t in (0, pi),
after which d = t |z| / sin t.
"""
from dataclasses import dataclass

import numpy as np
import scipy.integrate

import logging

from . import defaults
from .estimate import Estimate, Method
from .exceptions import RootFindingError, SingularPointError
from .group import (GroupElement, HorizontalVector, ScalarField, Smoothness,
                    _as_points, multiply, inverse, sub_gradient, sub_laplacian,
                    horizontal_radius)
from .util import derive_rng

logger = logging.getLogger(__name__)

NEAR_AXIS = 1e-12
SERIES_CUTOFF = 0.1


@dataclass(frozen=True)
class GeodesicParams:
    k: float
    phi: float
    s: float

    def __post_init__(self):
        if not all(np.isfinite([self.k, self.phi, self.s])):
            raise ValueError("geodesic parameters must be finite")
        if self.s < 0:
            raise ValueError("arclength must be nonnegative, got %r" % self.s)

    @property
    def minimizing(self):
        return abs(self.k * self.s) <= 2 * np.pi


def _u_minus_sin(u):
    "u - sin(u), accurate for small u."
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < SERIES_CUTOFF
    u2 = u * u
    series = u * u2 * (1 / 6. - u2 * (1 / 120. - u2 * (1 / 5040. - u2 / 362880.)))
    return np.where(small, series, u - np.sin(u))


def geodesic_points(k, phi, s):
    "Vectorised endpoints of the geodesics (k, phi, s); returns (..., 3)."
    k, phi, s = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (k, phi, s)))
    theta = k * s
    # sin(t)/t with t = theta/2
    ratio = np.sinc(theta / (2 * np.pi))
    angle = phi + theta / 2
    out = np.empty(theta.shape + (3,))
    out[..., 0] = s * ratio * np.cos(angle)
    out[..., 1] = s * ratio * np.sin(angle)
    small = np.abs(theta) < 1e-3
    safe = np.where(small, 1.0, theta)
    th2 = theta * theta
    out[..., 2] = np.where(
        small,
        s * s * theta * (1 / 12. - th2 * (1 / 240. - th2 / 10080.)),
        s * s * _u_minus_sin(safe) / (2 * safe * safe),
    )
    return out


def geodesic_point(g: GeodesicParams) -> GroupElement:
    return GroupElement.from_array(geodesic_points(g.k, g.phi, g.s))


def _psi(t):
    return _u_minus_sin(2 * t) / np.sin(t) ** 2


def _psi_prime(t):
    return 4.0 - 2.0 * np.cos(t) * _u_minus_sin(2 * t) / np.sin(t) ** 3


def _solve_shape(m):
    """Solve (2t - sin 2t)/sin^2 t = m for t in (0, pi); m > 0."""
    lo = np.zeros_like(m)
    hi = np.full_like(m, np.pi)
    for _ in range(defaults.bisection_steps):
        mid = 0.5 * (lo + hi)
        above = _psi(mid) > m
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    t = 0.5 * (lo + hi)
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(defaults.newton_steps):
            step = (_psi(t) - m) / _psi_prime(t)
            cand = t - step
            ok = np.isfinite(cand) & (cand > lo) & (cand < hi)
            t = np.where(ok, cand, t)
    resid = np.abs(_psi(t) - m) / np.maximum(1.0, m)
    bad = ~np.isfinite(t) | (resid > 1e-6)
    if np.any(bad):
        raise RootFindingError(
            "distance shape equation did not converge for %d point(s), e.g. m=%r"
            % (int(np.sum(bad)), m[bad][0])
        )
    return t


def _shape_parameter(P):
    "Half turning angle t of the minimizing geodesic, in [0, pi]."
    shape = P.shape[:-1]
    P = P.reshape(-1, 3)
    r = horizontal_radius(P)
    c = np.abs(P[..., 2])
    t = np.zeros(r.shape)
    axis = r * r < NEAR_AXIS * c
    t[axis] = np.pi
    generic = ~axis & (c > 0)
    if np.any(generic):
        t[generic] = _solve_shape(8.0 * c[generic] / r[generic] ** 2)
    return t.reshape(shape)


def distance_array(points):
    "CC distance from the identity for an array of points (..., 3)."
    P = _as_points(points)
    if not np.all(np.isfinite(P)):
        raise ValueError("points must be finite")
    shape = P.shape[:-1]
    P = P.reshape(-1, 3)
    r = horizontal_radius(P)
    c = np.abs(P[..., 2])
    d = np.array(r, dtype=float)
    axis = r * r < NEAR_AXIS * c
    d[axis] = 2.0 * np.sqrt(np.pi * c[axis]) - r[axis]
    generic = ~axis & (c > 0)
    if np.any(generic):
        rg, cg = r[generic], c[generic]
        t = _solve_shape(8.0 * cg / rg ** 2)
        theta = 2 * t
        with np.errstate(divide="ignore", invalid="ignore"):
            planar = t * rg / np.sin(np.where(t > 0, t, 1.0))
            planar = np.where(t > 0, planar, rg)
            vertical = np.sqrt(2 * cg) * theta / np.sqrt(_u_minus_sin(np.where(t > 0, theta, 1.0)))
        d[generic] = np.where(t < np.pi / 2, planar, vertical)
    return d.reshape(shape)


def cc_distance(a):
    if isinstance(a, GroupElement):
        return float(distance_array(a.as_array()))
    return distance_array(a)


def cc_distance_pair(a, b):
    "d(a, b) = d(a^-1 b) by left invariance."
    value = distance_array(multiply(inverse(a), b))
    if isinstance(a, GroupElement) and isinstance(b, GroupElement):
        return float(value)
    return value


def distance_gradient(points):
    """Sub-gradient of d, the terminal control of the minimizing geodesic.

    Unit length off the x3-axis; raises on the axis.
    """
    single = isinstance(points, GroupElement)
    P = _as_points(points)
    r = horizontal_radius(P)
    if np.any(r < defaults.axis_guard):
        raise SingularPointError("d is not differentiable on the x3-axis")
    angle = np.arctan2(P[..., 1], P[..., 0]) + np.sign(P[..., 2]) * _shape_parameter(P)
    g = np.stack([np.cos(angle), np.sin(angle)], axis=-1)
    if single:
        return HorizontalVector(float(g[0]), float(g[1]))
    return g


def distance_field():
    return ScalarField(distance_array, Smoothness.OFF_AXIS, name="d")


@dataclass(frozen=True)
class CCBall:
    radius: float

    def __post_init__(self):
        if not self.radius >= 0:
            raise ValueError("radius must be nonnegative")

    def contains(self, points):
        return distance_array(points) <= self.radius

    def bounding_box(self):
        "Half-widths of the box [-R,R]^2 x [-R^2/4pi, R^2/4pi] containing the ball."
        R = self.radius
        return np.array([R, R, R * R / (4 * np.pi)])


def random_cloud(n, rng, d_max=1.0, d_min=0.0, theta_margin=0.1):
    """Off-axis points with distances uniform on [d_min, d_max].

    Drawn as geodesic endpoints with turning angle uniform on
    |theta| <= 2 pi - theta_margin.
    """
    if isinstance(rng, (int, np.integer)):
        rng = derive_rng(rng)
    s = rng.uniform(d_min, d_max, n)
    theta = rng.uniform(-2 * np.pi + theta_margin, 2 * np.pi - theta_margin, n)
    phi = rng.uniform(0, 2 * np.pi, n)
    k = np.where(s > 0, theta / np.where(s > 0, s, 1.0), 0.0)
    return geodesic_points(k, phi, s)


@dataclass
class EikonalReport:
    max_deviation: float
    n_points: int
    worst_point: GroupElement
    deviations: np.ndarray

    def passed(self, tol=1e-3):
        return self.max_deviation <= tol


def check_eikonal(samples, h=None) -> EikonalReport:
    P = _as_points(samples).reshape(-1, 3)
    g = sub_gradient(distance_field(), P, h)
    dev = np.abs(np.hypot(g[..., 0], g[..., 1]) - 1.0)
    j = int(np.argmax(dev))
    logger.debug("eikonal: max deviation %g over %d points", dev[j], len(P))
    return EikonalReport(float(dev[j]), len(P), GroupElement.from_array(P[j]), dev)


@dataclass
class K0Report:
    k0: float
    values: np.ndarray
    running_max: np.ndarray
    witness: GroupElement
    n_points: int


def estimate_K0(samples, h=None) -> K0Report:
    "Largest d * (sub-Laplacian of d) over off-axis samples."
    P = _as_points(samples).reshape(-1, 3)
    values = distance_array(P) * sub_laplacian(distance_field(), P, h)
    if not np.all(np.isfinite(values)):
        raise ArithmeticError("non-finite d * Laplacian(d) in K0 scan")
    running = np.maximum.accumulate(values)
    j = int(np.argmax(values))
    return K0Report(float(running[-1]), values, running, GroupElement.from_array(P[j]), len(P))


def ball_volume(R, n_samples, seed, chunk=100000) -> Estimate:
    "Rejection-sampled Lebesgue volume of the CC ball of radius R."
    if not R > 0:
        raise ValueError("radius must be positive, got %r" % R)
    rng = derive_rng(seed)
    half = CCBall(R).bounding_box()
    box = float(np.prod(2 * half))
    hits = 0
    remaining = int(n_samples)
    while remaining > 0:
        m = min(chunk, remaining)
        P = rng.uniform(-half, half, size=(m, 3))
        hits += int(np.count_nonzero(distance_array(P) <= R))
        remaining -= m
    p = hits / n_samples
    stderr = box * np.sqrt(p * (1 - p) / n_samples)
    return Estimate(box * p, float(stderr), int(n_samples), seed, Method.MONTE_CARLO)


def unit_ball_volume():
    """Exact Lebesgue volume of the unit CC ball.

    The unit sphere is the surface of revolution traced by
    (sin t / t, +-(2t - sin 2t) / 8t^2), t in [0, pi].
    """
    def integrand(t):
        rho = np.sinc(t / np.pi)
        h = _u_minus_sin(2 * t) / (8 * t * t)
        drho = (t * np.cos(t) - np.sin(t)) / (t * t) if t > 1e-3 else -t / 3 + t ** 3 / 30
        return rho * h * abs(drho)

    value, err = scipy.integrate.quad(integrand, 1e-12, np.pi, epsabs=1e-14, limit=200)
    return 4 * np.pi * value


def radial_density_constant():
    "sigma with Leb{d in dr} = sigma r^3 dr."
    return 4.0 * unit_ball_volume()
