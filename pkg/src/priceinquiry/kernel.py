"""Price-level transition matrices.

``K_ij(delta)`` is the probability that the price level is ``j`` a gap of
``delta`` slots after it was observed to be ``i``. The starting load is
uniform over the region of level ``i``; the probability of landing in
level ``j`` given the start is exact (normal CDF differences), and the
average over the start is done by adaptive Simpson.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import check_scalar
from .exceptions import ConvergenceError, InputError
from .load_model import LoadLaw
from .quadrature import adaptive_simpson

ROW_SUM_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class TransitionKernel:
    """Row-stochastic matrices for ages ``1..horizon``.

    ``matrices[delta - 1]`` is the ``K x K`` matrix for gap ``delta``.
    """

    curve: object
    law: object
    horizon: int
    matrices: np.ndarray

    def __getitem__(self, delta):
        if not 1 <= delta <= self.horizon:
            raise IndexError(f"delta {delta} outside [1, {self.horizon}]")
        return self.matrices[delta - 1]

    @property
    def n_levels(self):
        return self.matrices.shape[1]


def _level_probabilities(curve, law, delta):
    edges = [float(e) for e in curve.edges]
    levels = [int(k) for k in curve.interval_level]
    n = curve.n_levels

    def inner(d0):
        out = np.zeros(n)
        for k, m in enumerate(law.interval_masses(d0, delta, edges)):
            out[levels[k]] += m
        return out

    return inner


def kernel_row(curve, law, i, delta, tol=1e-9):
    """Row ``K_i.(delta)`` to absolute tolerance ``tol`` per entry."""
    if not 0 <= i < curve.n_levels:
        raise InputError(f"level index {i} outside [0, {curve.n_levels})", "i")
    check_scalar(delta, "delta", lower=1, integer=True)
    inner = _level_probabilities(curve, law, delta)
    length = curve.region_lengths[i]
    row = np.zeros(curve.n_levels)
    for lo, hi in curve.pieces(i):
        row += adaptive_simpson(inner, lo, hi, tol=tol * (hi - lo))
    return row / length


def kernel_entry(curve, law, i, j, delta, tol=1e-9):
    """Single entry ``K_ij(delta)``."""
    if not 0 <= j < curve.n_levels:
        raise InputError(f"level index {j} outside [0, {curve.n_levels})", "j")
    return float(kernel_row(curve, law, i, delta, tol)[j])


def build_kernel(curve, law, horizon, tol=1e-9):
    """Compute the matrices for every gap ``1..horizon``.

    Rows are renormalised when their sum is within ``1e-8`` of one; a larger
    deviation means a quadrature or curve bug and raises.
    """
    horizon = check_scalar(horizon, "horizon", lower=1, integer=True)
    if abs(law.d_max - curve.d_max) > 1e-9 * curve.d_max:
        raise InputError(
            f"load law d_max {law.d_max} does not match curve d_max {curve.d_max}", "d_max")
    n = curve.n_levels
    mats = np.empty((horizon, n, n))
    for delta in range(1, horizon + 1):
        for i in range(n):
            mats[delta - 1, i] = kernel_row(curve, law, i, delta, tol)
    np.clip(mats, 0.0, 1.0, out=mats)
    sums = mats.sum(axis=2)
    worst = np.max(np.abs(sums - 1.0))
    if worst > ROW_SUM_TOL:
        raise ConvergenceError(f"kernel row sum off by {worst:.3g}")
    mats /= sums[:, :, None]
    mats.setflags(write=False)
    return TransitionKernel(curve=curve, law=law, horizon=horizon, matrices=mats)


def law_for(curve, theta):
    """The load law on ``curve``'s load range with growth rate ``theta``."""
    return LoadLaw(theta=theta, d_max=curve.d_max)
