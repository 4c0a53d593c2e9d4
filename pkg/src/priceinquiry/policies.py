"""Inquiry strategies as ``(K, T)`` action tables."""

from dataclasses import dataclass

import numpy as np

from .exceptions import InputError
from .mdp import HOLD, INQUIRE, penalty_matrix

KINDS = ("optimal", "myopic", "always", "never", "periodic")


@dataclass(frozen=True)
class PolicySpec:
    """``kind`` plus the period ``n`` for ``periodic`` (inquire once age >= n)."""

    kind: str
    n: int = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown policy kind {self.kind!r}; choose from {KINDS}",
                             "policy")
        if self.kind == "periodic" and (self.n is None or self.n < 1):
            raise InputError("periodic policy needs n >= 1", "n")

    @classmethod
    def parse(cls, text):
        """``"always"``, ``"periodic:3"`` and so on."""
        kind, _, arg = text.strip().partition(":")
        if arg:
            try:
                return cls(kind, int(arg))
            except ValueError:
                raise InputError(f"bad policy period in {text!r}", "policy") from None
        return cls(kind)

    @property
    def label(self):
        return f"periodic:{self.n}" if self.kind == "periodic" else self.kind


def expected_penalty(config, curve, kernel):
    """``sum_j K_ij(age) * penalty(i, j)`` for every state, ``(K, T)``."""
    pen = penalty_matrix(config, curve.prices)
    mats = kernel.matrices[:config.horizon]
    return np.einsum("dij,ij->id", mats, pen)


def myopic_action(config, curve, kernel, state):
    """Inquire iff the expected staleness penalty strictly exceeds the cost."""
    if state.age >= config.horizon:
        return INQUIRE
    pen = penalty_matrix(config, curve.prices)[state.level]
    row = kernel[state.age][state.level]
    return INQUIRE if config.comm_cost < float(row @ pen) else HOLD


def myopic_table(config, curve, kernel):
    table = (config.comm_cost < expected_penalty(config, curve, kernel)).astype(np.int8)
    table[:, -1] = INQUIRE
    return table


def periodic_table(n_levels, horizon, n):
    if not 1 <= n <= horizon:
        raise InputError(f"period n={n} outside [1, {horizon}]", "n")
    ages = np.arange(1, horizon + 1)
    return np.tile((ages >= n).astype(np.int8), (n_levels, 1))


def make_policy(spec, config, curve, kernel=None, solved=None):
    """Full action table for ``spec``; the last age always inquires."""
    K, T = curve.n_levels, config.horizon
    if spec.kind == "optimal":
        if solved is None:
            raise InputError("the optimal policy needs a solved value function", "solved")
        table = np.array(solved.policy, dtype=np.int8)
    elif spec.kind == "myopic":
        if kernel is None:
            raise InputError("the myopic policy needs a transition kernel", "kernel")
        table = myopic_table(config, curve, kernel)
    elif spec.kind == "always":
        table = periodic_table(K, T, 1)
    elif spec.kind == "never":
        table = periodic_table(K, T, T)
    else:
        table = periodic_table(K, T, spec.n)
    table.setflags(write=False)
    return table
