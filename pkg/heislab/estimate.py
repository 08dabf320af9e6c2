import enum
from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np


class Method(enum.Enum):
    MCMC = "mcmc"
    QUADRATURE = "quadrature"
    MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True)
class Estimate:
    "A Monte Carlo or quadrature result."
    value: float
    stderr: float
    n_samples: int
    seed: Optional[int]
    method: Method
    window_size: Optional[int] = None

    def __post_init__(self):
        if not self.stderr >= 0:
            raise ValueError("stderr must be nonnegative, got %r" % self.stderr)

    def agrees_with(self, value, k=3.0, atol=0.0):
        return abs(self.value - value) <= k * self.stderr + atol

    def to_dict(self):
        d = asdict(self)
        d["method"] = self.method.value
        return d

    def __str__(self):
        return "%.8g +/- %.3g (n=%d, %s)" % (self.value, self.stderr, self.n_samples, self.method.value)


def combine(estimates):
    "Pool independent estimates of the same quantity, weighting by sample count."
    estimates = list(estimates)
    n = np.array([e.n_samples for e in estimates], dtype=float)
    w = n / n.sum()
    value = float(np.dot(w, [e.value for e in estimates]))
    stderr = float(np.sqrt(np.dot(w ** 2, [e.stderr ** 2 for e in estimates])))
    first = estimates[0]
    return Estimate(value, stderr, int(n.sum()), first.seed, first.method, first.window_size)
