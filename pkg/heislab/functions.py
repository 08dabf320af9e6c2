"""
Cylinder test functions on the lattice.

A radial cylinder function depends on finitely many sites, and on each only
through d(x_i). `value` and `derivative` take an array of distances with a
trailing axis of length len(sites). Instances are plain picklable objects so
they can be shipped to worker processes.
"""
import re

import numpy as np

from .exceptions import UnsupportedModelError
from .metric import distance_array


class CylinderFunction:
    "Abstract class used only to track subclasses"
    radial = True
    sites = ()
    name = "f"

    def value(self, r):
        raise NotImplementedError

    def derivative(self, r):
        "Partial derivatives in each site's distance, shape (..., len(sites))."
        raise NotImplementedError

    def at_points(self, P):
        "Evaluate on group points of shape (..., len(sites), 3)."
        return self.value(distance_array(P))

    def on_window(self, window):
        "Callable on boundary-inclusive distance arrays (..., window.width)."
        cols = window.columns(self.sites)

        def g(R):
            R = np.asarray(R, dtype=float)
            return np.broadcast_to(self.value(R[..., cols]), R.shape[:-1])

        return g

    def derivative_on_window(self, window):
        cols = window.columns(self.sites)

        def g(R):
            R = np.asarray(R, dtype=float)
            return self.derivative(R[..., cols])

        return g

    def scaled(self, lam):
        return Scaled(self, lam)

    def is_constant(self):
        return False

    def __repr__(self):
        return self.name


class Constant(CylinderFunction):

    def __init__(self, c=1.0):
        self.c = float(c)
        self.sites = ()
        self.name = "const(%g)" % self.c

    def value(self, r):
        return np.full(np.shape(r)[:-1], self.c)

    def derivative(self, r):
        return np.zeros(np.shape(r))

    def at_points(self, P):
        return np.full(np.shape(P)[:-2], self.c)

    def is_constant(self):
        return True


class DistancePower(CylinderFunction):
    "shift + scale * d(x_site)^power"

    def __init__(self, site=0, power=1.0, scale=1.0, shift=0.0):
        if power < 1:
            raise ValueError("power must be at least 1 for a Lipschitz test function")
        self.site = int(site)
        self.sites = (self.site,)
        self.power = float(power)
        self.scale = float(scale)
        self.shift = float(shift)
        self.name = "%g+%g*d%d^%g" % (self.shift, self.scale, self.site, self.power)
        if self.shift == 0 and self.scale == 1:
            self.name = "d%d^%g" % (self.site, self.power) if self.power != 1 else "d%d" % self.site

    def value(self, r):
        return self.shift + self.scale * r[..., 0] ** self.power

    def derivative(self, r):
        return (self.scale * self.power * r[..., 0] ** (self.power - 1.0))[..., None]


class ExpDistance(CylinderFunction):
    "exp(theta * min(d(x_site)^power, cap))"

    def __init__(self, site=0, theta=0.5, power=1.0, cap=50.0):
        self.site = int(site)
        self.sites = (self.site,)
        self.theta = float(theta)
        self.power = float(power)
        self.cap = float(cap)
        self.name = "exp(%g*d%d^%g)" % (self.theta, self.site, self.power)

    def value(self, r):
        return np.exp(self.theta * np.minimum(r[..., 0] ** self.power, self.cap))

    def derivative(self, r):
        x = r[..., 0]
        inside = x ** self.power < self.cap
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = self.theta * self.power * np.where(x > 0, x, 0.0) ** (self.power - 1.0)
        return np.where(inside, slope * self.value(r), 0.0)[..., None]


class DistanceProduct(CylinderFunction):
    "Product over sites of (shift + d(x_i))."

    def __init__(self, sites, shift=1.0):
        self.sites = tuple(int(i) for i in sites)
        self.shift = float(shift)
        self.name = "prod(%g+d%s)" % (self.shift, ",".join(map(str, self.sites)))

    def value(self, r):
        return np.prod(self.shift + r, axis=-1)

    def derivative(self, r):
        factors = self.shift + r
        out = np.empty_like(factors)
        for k in range(factors.shape[-1]):
            out[..., k] = np.prod(np.delete(factors, k, axis=-1), axis=-1)
        return out


class DistanceSum(CylinderFunction):
    "shift + sum over sites of d(x_i)^power."

    def __init__(self, sites, power=1.0, shift=0.0):
        self.sites = tuple(int(i) for i in sites)
        self.power = float(power)
        self.shift = float(shift)
        self.name = "%g+sum(d%s^%g)" % (self.shift, ",".join(map(str, self.sites)), self.power)

    def value(self, r):
        return self.shift + np.sum(r ** self.power, axis=-1)

    def derivative(self, r):
        return self.power * r ** (self.power - 1.0)


class Scaled(CylinderFunction):

    def __init__(self, base, lam):
        self.base = base
        self.lam = float(lam)
        self.sites = base.sites
        self.radial = base.radial
        self.name = "%g*%s" % (self.lam, base.name)

    def value(self, r):
        return self.lam * self.base.value(r)

    def derivative(self, r):
        return self.lam * self.base.derivative(r)

    def at_points(self, P):
        return self.lam * self.base.at_points(P)

    def is_constant(self):
        return self.base.is_constant()


class Coordinate(CylinderFunction):
    "The coordinate x_axis of one spin; not radial."
    radial = False

    def __init__(self, site=0, axis=1):
        self.site = int(site)
        self.sites = (self.site,)
        self.axis = int(axis)
        self.name = "x%d[%d]" % (self.axis, self.site)

    def at_points(self, P):
        return np.asarray(P)[..., 0, self.axis - 1]

    def value(self, r):
        raise UnsupportedModelError("%s is not a function of distances" % self.name)

    def derivative(self, r):
        raise UnsupportedModelError("%s is not a function of distances" % self.name)


def require_radial(f):
    if not f.radial:
        raise UnsupportedModelError("%s is not a radial cylinder function" % f.name)
    return f


def standard_family(site=0, p=2.0, theta=None, cap=None):
    """d, d^2, the truncated exp(theta d^(p/2)) and the x1 coordinate."""
    from . import defaults
    theta = defaults.exp_theta if theta is None else theta
    cap = defaults.exp_cap if cap is None else cap
    return [
        DistancePower(site, 1.0),
        DistancePower(site, 2.0),
        ExpDistance(site, theta, max(1.0, p / 2.0), cap),
        Coordinate(site, 1),
    ]


_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_SITE = r"-?\d+"
_PATTERNS = [
    (re.compile(r"^const\((%s)\)$" % _NUM), lambda m: Constant(float(m[1]))),
    (re.compile(r"^(?:(%s)\+)?(?:(%s)\*)?d(%s)(?:\^(%s))?$" % (_NUM, _NUM, _SITE, _NUM)),
     lambda m: DistancePower(int(m[3]), float(m[4] or 1), float(m[2] or 1), float(m[1] or 0))),
    (re.compile(r"^exp\((%s)\*d(%s)(?:\^(%s))?\)$" % (_NUM, _SITE, _NUM)),
     lambda m: ExpDistance(int(m[2]), float(m[1]), float(m[3] or 1))),
    (re.compile(r"^prod\((%s)\+d(%s(?:,%s)*)\)$" % (_NUM, _SITE, _SITE)),
     lambda m: DistanceProduct(m[2].split(","), float(m[1]))),
    (re.compile(r"^(?:(%s)\+)?sum\(d(%s(?:,%s)*)(?:\^(%s))?\)$" % (_NUM, _SITE, _SITE, _NUM)),
     lambda m: DistanceSum(m[2].split(","), float(m[3] or 1), float(m[1] or 0))),
    (re.compile(r"^x([123])\[(%s)\]$" % _SITE), lambda m: Coordinate(int(m[2]), int(m[1]))),
]


def parse_function(text):
    """Parse a test function written as its name: 'd0', '1+d0', '2*d1^2',
    'exp(0.5*d0)', 'prod(1+d0,1)', 'sum(d0,1^2)', 'x1[0]' or 'const(1)'."""
    s = text.replace(" ", "")
    for pattern, build in _PATTERNS:
        m = pattern.match(s)
        if m:
            return build(m)
    raise ValueError("cannot parse test function %r" % text)
