"""Truncated-Gaussian law of the latent load.

Given the load ``d0`` observed ``delta`` slots ago, the current load is
Normal(d0, theta * delta) restricted to ``[0, d_max]``; ``theta`` is a
variance (MW^2 per slot), so the spread grows like a Brownian motion.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_scalar
from .exceptions import ConvergenceError, InputError

_SQRT1_2 = math.sqrt(0.5)
MAX_REJECTIONS = 10**6


def std_normal_cdf(z):
    """Standard normal CDF, accurate to ~1e-16 absolute."""
    return 0.5 * math.erfc(-z * _SQRT1_2)


def std_normal_mass(a, b):
    """``Phi(b) - Phi(a)`` for ``a <= b`` without cancellation in either tail."""
    if a >= 0.0:
        return 0.5 * (math.erfc(a * _SQRT1_2) - math.erfc(b * _SQRT1_2))
    if b <= 0.0:
        return 0.5 * (math.erfc(-b * _SQRT1_2) - math.erfc(-a * _SQRT1_2))
    return 1.0 - 0.5 * (math.erfc(-a * _SQRT1_2) + math.erfc(b * _SQRT1_2))


@dataclass(frozen=True)
class LoadLaw:
    theta: float
    d_max: float

    def __post_init__(self):
        check_scalar(self.theta, "theta", lower=0, lower_inclusive=False)
        check_scalar(self.d_max, "d_max", lower=0, lower_inclusive=False)

    def scale(self, delta):
        """Standard deviation after ``delta`` slots."""
        return math.sqrt(self.theta * delta)

    def interval_masses(self, d0, delta, edges):
        """Probability of each ``[edges[k], edges[k+1])`` after ``delta`` slots.

        ``edges`` must start at 0 and end at ``d_max``. The result sums to 1
        up to rounding.
        """
        s = self.scale(delta)
        z = [(e - d0) / s for e in edges]
        total = std_normal_mass(z[0], z[-1])
        return [std_normal_mass(lo, hi) / total for lo, hi in zip(z, z[1:])]


def _check_load(law, value, name):
    if not 0 <= value <= law.d_max:
        raise InputError(f"{name}={value} outside [0, {law.d_max}]", name)


def conditional_cdf(law, d0, delta, d):
    """P(D_delta <= d | D_0 = d0) under the truncated law."""
    _check_load(law, d0, "d0")
    _check_load(law, d, "d")
    check_scalar(delta, "delta", lower=1)
    s = law.scale(delta)
    lo = -d0 / s
    total = std_normal_mass(lo, (law.d_max - d0) / s)
    p = std_normal_mass(lo, (d - d0) / s) / total
    return min(max(p, 0.0), 1.0)


def sample_step(law, d0, rng, delta=1):
    """Draw the load ``delta`` slots after ``d0`` by rejection."""
    _check_load(law, d0, "d0")
    s = law.scale(delta)
    for _ in range(MAX_REJECTIONS):
        d = rng.normal(d0, s)
        if 0.0 <= d <= law.d_max:
            return float(d)
    raise ConvergenceError(f"rejection sampler exceeded {MAX_REJECTIONS} draws")


def sample_steps(law, d0, rng, delta=1):
    """Vectorised :func:`sample_step` over an array of starting loads.

    Out-of-range draws are redrawn in place; the draw order depends only on
    ``rng`` and the input, so results are reproducible.
    """
    d0 = np.array(d0, dtype=float, ndmin=1)
    s = law.scale(delta)
    out = rng.normal(d0, s)
    bad = np.flatnonzero((out < 0.0) | (out > law.d_max))
    for _ in range(MAX_REJECTIONS):
        if bad.size == 0:
            return out
        out[bad] = rng.normal(d0[bad], s)
        still = (out[bad] < 0.0) | (out[bad] > law.d_max)
        bad = bad[still]
    raise ConvergenceError(f"rejection sampler exceeded {MAX_REJECTIONS} rounds")
