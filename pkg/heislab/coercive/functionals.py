"""
q-entropy, q-Dirichlet form and q-variance against a measure.

A measure exposes `evaluate(f)` (values of f on its support),
`gradient_norms(f, h)` (|grad_i f| per site of f, on the support, as an
array with a trailing site axis) and `expect(values)`.
"""
from dataclasses import dataclass

import numpy as np
import scipy.special

import logging

from heislab.functions import CylinderFunction, require_radial
from heislab.gibbs import WindowQuadrature
from heislab.group import ScalarField, Smoothness, sub_gradient
from heislab.metric import distance_array

logger = logging.getLogger(__name__)


def check_q(q):
    if not 1.0 < q <= 2.0:
        raise ValueError("q must lie in (1, 2], got %r" % q)


class QuadratureMeasure:
    """E^{Lambda, omega} through its tensor rule; radial functions only.

    |grad_i f| = |df/dd(x_i)| since |grad d| = 1 off the axis.
    """

    def __init__(self, quadrature: WindowQuadrature):
        self.quadrature = quadrature
        self.window = quadrature.window

    @classmethod
    def build(cls, spec, window, omega, params=None):
        return cls(WindowQuadrature(spec, window, omega, params))

    def evaluate(self, f):
        require_radial(f)
        return f.on_window(self.window)(self.quadrature.grid)

    def gradient_norms(self, f, h=None):
        require_radial(f)
        return np.abs(f.derivative_on_window(self.window)(self.quadrature.grid))

    def expect(self, values):
        return self.quadrature.expect(values)


class SampleMeasure:
    "Empirical measure of configurations (N, width, 3), boundary columns included."

    def __init__(self, window, points):
        self.window = window
        self.points = np.asarray(points, dtype=float)
        if self.points.ndim != 3 or self.points.shape[1:] != (window.width, 3):
            raise ValueError("samples must have shape (N, %d, 3)" % window.width)
        self.distances = distance_array(self.points)

    @classmethod
    def from_chains(cls, spec, window, omega, n, burn_in=None, seed=0, **kwargs):
        from heislab.sampler import sample_points
        return cls(window, sample_points(spec, window, omega, n, burn_in, seed, **kwargs))

    def __len__(self):
        return len(self.points)

    def evaluate(self, f):
        cols = self.window.columns(f.sites)
        if f.radial:
            return np.broadcast_to(f.value(self.distances[:, cols]), (len(self),))
        return f.at_points(self.points[:, cols])

    def _site_field(self, f, k):
        X = self.points[:, self.window.columns(f.sites)]

        def func(Q):
            Y = X.copy()
            Y[:, k] = Q
            return f.at_points(Y)

        smooth = Smoothness.OFF_AXIS if f.radial else Smoothness.SMOOTH
        return ScalarField(func, smooth, name="%s@%d" % (f.name, f.sites[k]))

    def gradient_norms(self, f, h=None):
        "Horizontal finite differences in each site of f."
        if not f.sites:
            return np.zeros((len(self), 0))
        cols = self.window.columns(f.sites)
        out = np.empty((len(self), len(cols)))
        for k, c in enumerate(cols):
            g = sub_gradient(self._site_field(f, k), self.points[:, c], h)
            out[:, k] = np.hypot(g[..., 0], g[..., 1])
        return out

    def expect(self, values):
        return float(np.mean(values))


class TwoPointMeasure:
    """Weights (p0, 1 - p0) on two atoms; functions are value pairs and
    the gradient is the difference |f(1) - f(0)|."""

    def __init__(self, p0=0.5):
        if not 0.0 < p0 < 1.0:
            raise ValueError("atom weight must lie in (0, 1), got %r" % p0)
        self.weights = np.array([p0, 1.0 - p0])

    def evaluate(self, f):
        f = np.asarray(f, dtype=float)
        if f.shape != (2,):
            raise ValueError("a function on two atoms is a pair of values")
        return f

    def gradient_norms(self, f, h=None):
        f = self.evaluate(f)
        return np.full((2, 1), abs(f[1] - f[0]))

    def expect(self, values):
        return float(np.dot(self.weights, values))


def entropy_q(measure, f, q):
    "mu(|f|^q log(|f|^q / mu|f|^q))."
    check_q(q)
    v = np.abs(measure.evaluate(f)) ** q
    m = measure.expect(v)
    if not m > 0:
        raise ValueError("%s has zero q-mass under the measure" % getattr(f, "name", "f"))
    ent = measure.expect(scipy.special.xlogy(v, v / m))
    return max(ent, 0.0)


def dirichlet_q(measure, f, q, h=None):
    "mu(sum_i |grad_i f|^q)."
    check_q(q)
    if isinstance(f, CylinderFunction) and f.is_constant():
        return 0.0
    g = measure.gradient_norms(f, h)
    return measure.expect(np.sum(g ** q, axis=-1))


def variance_q(measure, f, q):
    "mu|f - mu f|^q."
    check_q(q)
    v = measure.evaluate(f)
    return measure.expect(np.abs(v - measure.expect(v)) ** q)


@dataclass
class Functionals:
    q: float
    entropy: float
    dirichlet: float
    variance_q: float

    def is_trivial(self, tol=1e-12):
        return max(self.entropy, self.dirichlet, self.variance_q) <= tol


def functionals(measure, f, q, h=None) -> Functionals:
    return Functionals(q, entropy_q(measure, f, q), dirichlet_q(measure, f, q, h), variance_q(measure, f, q))
