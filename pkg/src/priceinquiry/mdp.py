"""The price-inquiry decision process.

A decision state is ``(level, age)``: the price level seen at the last
inquiry and the number of slots since then, ``1 <= age <= T``. At age
``age`` the appliance either holds (consumes for the stale price, billed
at the true one, and moves to ``age + 1``) or pays ``comm_cost`` to learn
the true level ``j ~ K_i.(age)``, consumes optimally and moves to
``(j, 1)``. Holding is not allowed at age ``T``.

Value and policy tables are ``(K, T)`` arrays whose column ``age - 1``
holds the entries for that age.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_policy_table, check_scalar
from .exceptions import ConvergenceError, InputError

HOLD, INQUIRE = 0, 1


@dataclass(frozen=True)
class ModelConfig:
    beta: float = 0.99
    comm_cost: float = 10.0
    horizon: int = 10
    utility_scale: float = 100.0

    def __post_init__(self):
        check_scalar(self.beta, "beta", lower=0, upper=1,
                     lower_inclusive=False, upper_inclusive=False)
        check_scalar(self.comm_cost, "comm_cost", lower=0)
        check_scalar(self.horizon, "horizon", lower=1, integer=True)
        check_scalar(self.utility_scale, "utility_scale", lower=0, lower_inclusive=False)


@dataclass(frozen=True)
class MdpState:
    level: int
    age: int

    def __post_init__(self):
        if self.level < 0:
            raise InputError(f"level must be >= 0, got {self.level}", "level")
        if self.age < 1:
            raise InputError(f"age must be >= 1, got {self.age}", "age")


@dataclass(frozen=True, eq=False)
class ValueFunction:
    """Solution of the Bellman equation.

    ``values`` is the exact value of ``policy``; ``residual`` is the last
    sup-norm change of value iteration and ``residuals`` its full history.
    """

    values: np.ndarray
    policy: np.ndarray
    residual: float
    iterations: int
    residuals: np.ndarray = field(repr=False)
    q_hold: np.ndarray = field(repr=False)
    q_inquire: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class PolicyValue:
    values: np.ndarray
    start_value: float


def _check_price(price, name="price"):
    if not price > 0:
        raise InputError(f"{name} must be positive, got {price}", name)


def consumption(config, price):
    """Optimal consumption for log utility: ``U'(x) = a / x = price``."""
    _check_price(price)
    return config.utility_scale / price


def utility(config, x):
    return config.utility_scale * math.log(x)


def net_utility(config, assumed_price, true_price):
    """Payoff of consuming for ``assumed_price`` while billed ``true_price``."""
    _check_price(assumed_price, "assumed_price")
    _check_price(true_price, "true_price")
    x = consumption(config, assumed_price)
    return utility(config, x) - true_price * x


def payoff_matrix(config, prices):
    """``N[i, j] = net_utility(q_i, q_j)``: assumed level ``i``, true level ``j``."""
    q = np.asarray(prices, dtype=float)
    a = config.utility_scale
    x = a / q
    return (a * np.log(x))[:, None] - q[None, :] * x[:, None]


def penalty_matrix(config, prices):
    """Staleness penalty ``a * (y - 1 - log y)`` with ``y = q_j / q_i``.

    Equal to ``N[j, j] - N[i, j]``; never negative.
    """
    q = np.asarray(prices, dtype=float)
    y = q[None, :] / q[:, None]
    return config.utility_scale * (y - 1.0 - np.log(y))


def _check_kernel(config, curve, kernel):
    if kernel.horizon < config.horizon:
        raise InputError(
            f"kernel horizon {kernel.horizon} shorter than model horizon {config.horizon}",
            "horizon")
    if kernel.n_levels != curve.n_levels:
        raise InputError("kernel and curve disagree on the number of levels", "kernel")


def reward_tables(config, curve, kernel):
    """Expected one-slot rewards ``(hold, inquire)``, each ``(K, T)``."""
    _check_kernel(config, curve, kernel)
    T = config.horizon
    mats = kernel.matrices[:T]
    N = payoff_matrix(config, curve.prices)
    hold = np.einsum("dij,ij->id", mats, N)
    inquire = np.einsum("dij,j->id", mats, np.diag(N)) - config.comm_cost
    return hold, inquire


def _check_state(state, curve, kernel):
    if state.level >= curve.n_levels:
        raise InputError(f"level {state.level} outside [0, {curve.n_levels})", "level")
    if state.age > kernel.horizon:
        raise InputError(f"age {state.age} beyond kernel horizon {kernel.horizon}", "age")


def reward_hold(config, curve, kernel, state):
    _check_state(state, curve, kernel)
    row = kernel[state.age][state.level]
    q = curve.prices
    return float(sum(row[j] * net_utility(config, q[state.level], q[j])
                     for j in range(len(q))))


def reward_inquire(config, curve, kernel, state):
    _check_state(state, curve, kernel)
    row = kernel[state.age][state.level]
    q = curve.prices
    informed = sum(row[j] * net_utility(config, q[j], q[j]) for j in range(len(q)))
    return float(informed) - config.comm_cost


def _q_values(config, kernel, hold, inquire, V):
    T = config.horizon
    mats = kernel.matrices[:T]
    q_inq = inquire + config.beta * np.einsum("dij,j->id", mats, V[:, 0])
    q_hold = np.full_like(V, -np.inf)
    q_hold[:, :-1] = hold[:, :-1] + config.beta * V[:, 1:]
    return q_hold, q_inq


def solve(config, curve, kernel, tol=1e-9, max_iter=100_000):
    """Value iteration from zero, stopped at sup-norm change ``tol``.

    The greedy policy (ties go to holding) is then evaluated exactly, and
    those values are returned, so ``values`` is always the value of
    ``policy``.
    """
    hold, inquire = reward_tables(config, curve, kernel)
    V = np.zeros_like(hold)
    residuals = []
    for it in range(1, max_iter + 1):
        q_hold, q_inq = _q_values(config, kernel, hold, inquire, V)
        V_new = np.maximum(q_hold, q_inq)
        diff = float(np.max(np.abs(V_new - V)))
        residuals.append(diff)
        V = V_new
        if diff <= tol:
            break
    else:
        raise ConvergenceError(
            f"value iteration did not reach {tol} in {max_iter} iterations "
            f"(last change {residuals[-1]:.3g})")
    q_hold, q_inq = _q_values(config, kernel, hold, inquire, V)
    policy = (q_inq > q_hold).astype(np.int8)
    values = _evaluate(config, kernel, hold, inquire, policy)
    return ValueFunction(values=values, policy=policy, residual=residuals[-1],
                         iterations=it, residuals=np.asarray(residuals),
                         q_hold=q_hold, q_inquire=q_inq)


def transition_matrix(config, kernel, policy):
    """State-to-state transition matrix of a policy, states ordered ``i * T + age - 1``."""
    T = config.horizon
    K = kernel.n_levels
    P = np.zeros((K * T, K * T))
    for i in range(K):
        for d in range(T):
            s = i * T + d
            if policy[i, d] == INQUIRE:
                P[s, np.arange(K) * T] = kernel.matrices[d, i]
            else:
                P[s, s + 1] = 1.0
    return P


def _evaluate(config, kernel, hold, inquire, policy):
    K, T = policy.shape
    r = np.where(policy == INQUIRE, inquire, hold).reshape(-1)
    P = transition_matrix(config, kernel, policy)
    V = np.linalg.solve(np.eye(K * T) - config.beta * P, r)
    return V.reshape(K, T)


def start_value(curve, values):
    """Value at age 1 averaged over levels weighted by region length."""
    return float(curve.level_weights @ values[:, 0])


def evaluate_policy(config, curve, kernel, policy):
    """Exact discounted value of a stationary policy table."""
    policy = check_policy_table(policy, curve.n_levels, config.horizon)
    hold, inquire = reward_tables(config, curve, kernel)
    values = _evaluate(config, kernel, hold, inquire, policy)
    return PolicyValue(values=values, start_value=start_value(curve, values))
