"""
Radial Gauss-Legendre rules on [0, r_max] for densities r^3 exp(-E(r)).
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.interpolate

import logging

from . import defaults
from .exceptions import QuadratureError
from .util import memoize

logger = logging.getLogger(__name__)

R_LIMIT = 1e8


@dataclass(frozen=True)
class QuadratureParams:
    nodes: int = defaults.quadrature_nodes
    inner_nodes: int = defaults.inner_nodes
    rtol: float = defaults.quadrature_rtol
    tail_tolerance: float = defaults.tail_tolerance
    safety: float = defaults.tail_safety
    max_nodes: int = 1024
    r_max: Optional[float] = None


@memoize
def _leggauss(n):
    return np.polynomial.legendre.leggauss(n)


def gauss_legendre(n, a, b):
    "Nodes and weights of the n-point rule on [a, b]."
    x, w = _leggauss(int(n))
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def radial_rule(n, r_max):
    """Nodes r_k and weights w_k r_k^3 on [0, r_max]."""
    r, w = gauss_legendre(n, 0.0, r_max)
    return r, w * r ** 3


def tail_radius(energy, tol=None, safety=None, r_hi=8.0, n=2048):
    """Radius beyond which r^3 exp(-energy(r)) stays below tol times its peak.

    `energy` maps an array of radii (m,) to energies (m,) or (m, contexts);
    the returned radius covers every context.
    """
    tol = defaults.tail_tolerance if tol is None else tol
    safety = defaults.tail_safety if safety is None else safety
    cut = np.log(tol)
    while r_hi <= R_LIMIT:
        r = np.linspace(0.0, r_hi, n + 1)[1:]
        E = np.asarray(energy(r), dtype=float)
        lw = 3 * np.log(r).reshape((-1,) + (1,) * (E.ndim - 1)) - E
        lw = lw.reshape(len(r), -1)
        rel = lw - lw.max(axis=0)
        if np.all(rel[-1] < cut):
            above = np.nonzero(np.any(rel >= cut, axis=1))[0]
            r_cut = r[min(above[-1] + 1, len(r) - 1)]
            return safety * r_cut
        r_hi *= 2.0
    raise QuadratureError("integrand r^3 exp(-H) does not decay below %g by r=%g" % (tol, R_LIMIT))


def normalized_weights(log_weights, axis=-1):
    "exp(log_weights) normalised to sum one along axis, computed stably."
    lw = np.asarray(log_weights, dtype=float)
    lw = lw - lw.max(axis=axis, keepdims=True)
    w = np.exp(lw)
    return w / w.sum(axis=axis, keepdims=True)


def interpolate(nodes, values, x, axis=0):
    "Barycentric interpolation of node values along `axis` at points x."
    return scipy.interpolate.BarycentricInterpolator(nodes, values, axis=axis)(x)
