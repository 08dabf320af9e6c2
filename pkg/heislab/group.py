"""
Heisenberg group arithmetic and horizontal calculus.

Points are stored in exponential coordinates (x1, x2, x3). Every operator
accepts either a single :class:`GroupElement` (and then returns plain floats
or a :class:`HorizontalVector`) or an array of shape (..., 3), in which case
it is evaluated elementwise and returns arrays.

Derivatives are central differences along the one-parameter subgroups
s -> a.(s,0,0), s -> a.(0,s,0) and s -> a.(0,0,s), which are exactly the
flows of X1, X2 and Z = [X1, X2].
"""
import enum
import functools
from dataclasses import dataclass
from typing import Callable

import numpy as np

import logging

from . import defaults
from .exceptions import SingularPointError

logger = logging.getLogger(__name__)


def _as_points(a):
    if isinstance(a, GroupElement):
        return a.as_array()
    ret = np.asarray(a, dtype=float)
    if ret.shape[-1:] != (3,):
        raise ValueError("points must have a trailing axis of length 3, got %s" % (ret.shape,))
    return ret


def multiply(a, b):
    "Group law on arrays of shape (..., 3)."
    a = _as_points(a)
    b = _as_points(b)
    out = np.empty(np.broadcast(a, b).shape)
    out[..., 0] = a[..., 0] + b[..., 0]
    out[..., 1] = a[..., 1] + b[..., 1]
    out[..., 2] = a[..., 2] + b[..., 2] + 0.5 * (a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0])
    return out


def inverse(a):
    return -_as_points(a)


def dilation(a, lam):
    a = _as_points(a)
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise ValueError("dilation factor must be positive")
    lam = lam[..., None]
    return a * np.concatenate(np.broadcast_arrays(lam, lam, lam ** 2), axis=-1)


def gauge(a):
    "Koranyi gauge (|z|^4 + 16 x3^2)^(1/4), homogeneous of degree one."
    a = _as_points(a)
    r2 = a[..., 0] ** 2 + a[..., 1] ** 2
    return (r2 ** 2 + 16.0 * a[..., 2] ** 2) ** 0.25


def horizontal_radius(a):
    a = _as_points(a)
    return np.hypot(a[..., 0], a[..., 1])


@dataclass(frozen=True)
class GroupElement:
    x1: float = 0.0
    x2: float = 0.0
    x3: float = 0.0

    def __post_init__(self):
        for name in ("x1", "x2", "x3"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise ValueError("%s must be finite, got %r" % (name, v))
            object.__setattr__(self, name, v)

    @classmethod
    def identity(cls):
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def from_array(cls, a):
        a = np.asarray(a, dtype=float).reshape(3)
        return cls(*a)

    @classmethod
    def parse(cls, s):
        "Parse 'x1,x2,x3'."
        parts = [p.strip() for p in s.split(",")]
        if len(parts) != 3:
            raise ValueError("expected three comma separated coordinates, got %r" % s)
        return cls(*map(float, parts))

    def as_array(self):
        return np.array([self.x1, self.x2, self.x3])

    def __mul__(self, other):
        return group_mul(self, other)

    def inverse(self):
        return group_inv(self)

    def dilate(self, lam):
        return dilate(self, lam)

    def is_on_axis(self, tol=0.0):
        return np.hypot(self.x1, self.x2) <= tol

    def __str__(self):
        return "(%g, %g, %g)" % (self.x1, self.x2, self.x3)


def group_mul(a: GroupElement, b: GroupElement) -> GroupElement:
    return GroupElement.from_array(multiply(a, b))


def group_inv(a: GroupElement) -> GroupElement:
    return GroupElement.from_array(inverse(a))


def dilate(a: GroupElement, lam: float) -> GroupElement:
    if not lam > 0:
        raise ValueError("dilation factor must be positive, got %r" % lam)
    return GroupElement.from_array(dilation(a, lam))


@dataclass(frozen=True)
class HorizontalVector:
    v1: float
    v2: float

    def __post_init__(self):
        if not (np.isfinite(self.v1) and np.isfinite(self.v2)):
            raise ValueError("horizontal vector components must be finite")

    def norm(self, q=2):
        if q == 2:
            return float(np.hypot(self.v1, self.v2))
        return float((abs(self.v1) ** q + abs(self.v2) ** q) ** (1.0 / q))

    def dot(self, other):
        return self.v1 * other.v1 + self.v2 * other.v2

    def as_array(self):
        return np.array([self.v1, self.v2])


class Smoothness(enum.Enum):
    SMOOTH = "smooth"
    OFF_AXIS = "smooth-off-axis"


@dataclass(frozen=True)
class ScalarField:
    """A function on the group.

    `func` maps an array of points (..., 3) to values (...). Use
    :meth:`pointwise` to wrap a callback taking a single GroupElement.
    """
    func: Callable
    smoothness: Smoothness = Smoothness.SMOOTH
    name: str = ""

    def __call__(self, points):
        return np.asarray(self.func(_as_points(points)), dtype=float)

    def eval(self, a: GroupElement) -> float:
        return float(self(a))

    @classmethod
    def pointwise(cls, fn, smoothness=Smoothness.SMOOTH, name=""):
        return cls(functools.partial(_apply_pointwise, fn), smoothness, name or getattr(fn, "__name__", ""))


def _apply_pointwise(fn, points):
    flat = points.reshape(-1, 3)
    out = np.array([fn(GroupElement(*p)) for p in flat], dtype=float)
    return out.reshape(points.shape[:-1])


def _flow(points, direction, s):
    e = np.zeros(np.broadcast(points[..., 0], s).shape + (3,))
    e[..., direction - 1] = s
    return multiply(points, e)


def _scale(points):
    return np.maximum(1.0, gauge(points))


def default_step(a, h=None):
    "Step used when none is given: h * max(1, gauge(a))."
    if h is not None and not h > 0:
        raise ValueError("step must be positive, got %r" % h)
    base = defaults.fd_step if h is None else h
    return base * _scale(_as_points(a))


def _step(points, h):
    if h is None:
        return default_step(points)
    if not h > 0:
        raise ValueError("step must be positive, got %r" % h)
    return np.full(points.shape[:-1], float(h))


def _guard(f, points):
    if f.smoothness is Smoothness.OFF_AXIS:
        near = horizontal_radius(points) < defaults.axis_guard
        if np.any(near):
            raise SingularPointError(
                "%d point(s) within %g of the x3-axis, where %s is singular"
                % (int(np.sum(near)), defaults.axis_guard, f.name or "the field")
            )


def _d(f, points, direction, step):
    return (f(_flow(points, direction, step)) - f(_flow(points, direction, -step))) / (2.0 * step)


def _dd(f, points, direction, step):
    return (
        f(_flow(points, direction, step)) - 2.0 * f(points) + f(_flow(points, direction, -step))
    ) / step ** 2


def _out(a, value):
    if isinstance(a, GroupElement):
        return float(value)
    return value


def horizontal_derivative(f: ScalarField, a, direction: int, h=None):
    if direction not in (1, 2):
        raise ValueError("direction must be 1 or 2")
    P = _as_points(a)
    _guard(f, P)
    return _out(a, _d(f, P, direction, _step(P, h)))


def sub_gradient(f: ScalarField, a, h=None):
    P = _as_points(a)
    _guard(f, P)
    step = _step(P, h)
    g = np.stack([_d(f, P, 1, step), _d(f, P, 2, step)], axis=-1)
    if isinstance(a, GroupElement):
        return HorizontalVector(float(g[0]), float(g[1]))
    return g


def sub_laplacian(f: ScalarField, a, h=None):
    P = _as_points(a)
    _guard(f, P)
    step = _step(P, h)
    return _out(a, _dd(f, P, 1, step) + _dd(f, P, 2, step))


def gamma(f: ScalarField, a, h=None):
    P = _as_points(a)
    _guard(f, P)
    step = _step(P, h)
    return _out(a, _d(f, P, 1, step) ** 2 + _d(f, P, 2, step) ** 2)


def gamma2(f: ScalarField, a, h=None):
    """Bakry-Emery Gamma_2 of f at a.

    Mixed derivatives use nested central differences with step sqrt(h)
    (horizontal) and its square (central), both scaled by the gauge.
    """
    P = _as_points(a)
    _guard(f, P)
    base = defaults.fd_step if h is None else h
    if not base > 0:
        raise ValueError("step must be positive, got %r" % h)
    s = _scale(P)
    H = np.sqrt(base) * s
    Hz = np.sqrt(base) * s ** 2

    def X(g):
        return lambda Q: _d(g, Q, 1, H)

    def Y(g):
        return lambda Q: _d(g, Q, 2, H)

    def Z(g):
        return lambda Q: _d(g, Q, 3, Hz)

    xf = X(f)(P)
    yf = Y(f)(P)
    xxf = _dd(f, P, 1, H)
    yyf = _dd(f, P, 2, H)
    xyf = X(Y(f))(P)
    yxf = Y(X(f))(P)
    zf = Z(f)(P)
    xzf = X(Z(f))(P)
    yzf = Y(Z(f))(P)
    value = (
        xxf ** 2 + yyf ** 2 + 0.5 * (xyf + yxf) ** 2 + 0.5 * zf ** 2
        + 2.0 * (xzf * yf - yzf * xf)
    )
    return _out(a, value)


@dataclass
class CDProbeReport:
    rho: float
    minimum: float
    witness_point: GroupElement
    witness_field: str
    values: np.ndarray

    @property
    def violated(self):
        return self.minimum < 0


def cd_condition_probe(rho, trial_fields, sample_points, h=None) -> CDProbeReport:
    """Smallest observed Gamma_2 - rho * Gamma over fields and points."""
    trial_fields = list(trial_fields)
    if not trial_fields:
        raise ValueError("need at least one trial field")
    P = _as_points(sample_points).reshape(-1, 3)
    values = np.array([gamma2(f, P, h) - rho * gamma(f, P, h) for f in trial_fields])
    k, j = np.unravel_index(np.argmin(values), values.shape)
    report = CDProbeReport(
        rho=float(rho),
        minimum=float(values[k, j]),
        witness_point=GroupElement.from_array(P[j]),
        witness_field=trial_fields[k].name or "field %d" % k,
        values=values,
    )
    logger.debug("rho=%g: min %g at %s for %s", rho, report.minimum,
                 report.witness_point, report.witness_field)
    return report


def _coordinate(i, P):
    return P[..., i]


def _central_plus_linear(n, P):
    return P[..., 2] + n * P[..., 0]


def _twisted(M, P):
    return P[..., 0] + M * P[..., 1] * P[..., 2]


def coordinate_field(i):
    return ScalarField(functools.partial(_coordinate, i - 1), name="x%d" % i)


def cd_trial_family():
    """Fields for probing Gamma_2 >= rho * Gamma.

    At the identity x1 + M x2 x3 has Gamma = 1 and Gamma_2 = -2M.
    """
    fields = [coordinate_field(1), coordinate_field(3)]
    for n in (1.0, 10.0, 100.0):
        fields.append(ScalarField(functools.partial(_central_plus_linear, n), name="x3+%g*x1" % n))
    for M in (1.0, 1e2, 1e4, 1e6, 1e8):
        for sign in (1.0, -1.0):
            fields.append(ScalarField(functools.partial(_twisted, sign * M), name="x1+%g*x2*x3" % (sign * M)))
    return fields


def cd_sample_points(box=1.0, n=5):
    "Grid of n^3 points in [-box, box]^3; odd n includes the identity."
    t = np.linspace(-box, box, n)
    return np.stack(np.meshgrid(t, t, t, indexing="ij"), axis=-1).reshape(-1, 3)
