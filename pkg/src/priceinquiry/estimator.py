"""scikit-learn style front end.

``fit`` takes an LMP curve (or table), builds the transition kernel and
solves the decision process; ``predict`` maps ``(level, age)`` rows to
actions (0 = hold, 1 = inquire).
"""

from dataclasses import replace

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_scalar, check_states
from .exceptions import InputError
from .kernel import build_kernel, law_for
from .lmp_curve import LmpCurve, LmpTable, build_curve
from .mdp import ModelConfig, evaluate_policy, reward_tables, solve
from .policies import PolicySpec, make_policy
from .simulator import SimConfig, simulate


class InquiryPolicy(BaseEstimator):
    """Price-inquiry policy for one bus.

    Parameters
    ----------
    policy : str
        ``"optimal"``, ``"myopic"``, ``"always"``, ``"never"`` or ``"periodic:n"``.
    theta : float
        Variance growth of the load per slot, MW^2.
    comm_cost : float
        Cost of one inquiry.
    beta : float
        Discount factor.
    horizon : int
        Maximum number of slots between inquiries.
    utility_scale : float
        ``a`` in ``U(x) = a log x``.
    tol, max_iter
        Value-iteration stopping rule.

    Attributes
    ----------
    curve_, kernel_, config_ : fitted model pieces
    solution_ : ValueFunction of the optimal policy
    policy_table_ : (K, T) action table of the chosen policy
    values_ : (K, T) exact values of the chosen policy
    start_value_ : float, value at age 1 averaged over the start distribution
    cost_ : float, start-value gap to the zero-cost optimum
    """

    def __init__(self, policy="optimal", theta=200.0, comm_cost=10.0, beta=0.99,
                 horizon=10, utility_scale=100.0, tol=1e-9, max_iter=100_000):
        self.policy = policy
        self.theta = theta
        self.comm_cost = comm_cost
        self.beta = beta
        self.horizon = horizon
        self.utility_scale = utility_scale
        self.tol = tol
        self.max_iter = max_iter

    def _curve(self, X):
        if isinstance(X, LmpCurve):
            return X
        if isinstance(X, LmpTable):
            return build_curve(X)
        raise InputError(f"fit expects an LmpCurve or LmpTable, got {type(X).__name__}",
                         "X")

    def fit(self, X, y=None):
        curve = self._curve(X)
        spec = PolicySpec.parse(self.policy)
        check_scalar(self.tol, "tol", lower=0, lower_inclusive=False)
        max_iter = check_scalar(self.max_iter, "max_iter", lower=1, integer=True)
        config = ModelConfig(beta=self.beta, comm_cost=self.comm_cost,
                             horizon=self.horizon, utility_scale=self.utility_scale)
        kernel = build_kernel(curve, law_for(curve, self.theta), config.horizon)
        solution = solve(config, curve, kernel, tol=self.tol, max_iter=max_iter)
        table = make_policy(spec, config, curve, kernel, solution)
        pv = evaluate_policy(config, curve, kernel, table)
        ideal = solve(replace(config, comm_cost=0.0), curve, kernel,
                      tol=self.tol, max_iter=max_iter)

        self.curve_ = curve
        self.config_ = config
        self.kernel_ = kernel
        self.solution_ = solution
        self.policy_table_ = table
        self.values_ = pv.values
        self.start_value_ = pv.start_value
        self.cost_ = float(curve.level_weights @ ideal.values[:, 0]) - pv.start_value
        return self

    def _states(self, X):
        check_is_fitted(self, "policy_table_")
        return check_states(X, self.curve_.n_levels, self.config_.horizon)

    def predict(self, X):
        X = self._states(X)
        return self.policy_table_[X[:, 0], X[:, 1] - 1].astype(np.int64)

    def predict_value(self, X):
        X = self._states(X)
        return self.values_[X[:, 0], X[:, 1] - 1]

    def decision_function(self, X):
        """One-step advantage of inquiring under this policy's own values.

        ``+inf`` at the maximum age, where holding is not allowed.
        """
        X = self._states(X)
        cfg = self.config_
        hold, inquire = reward_tables(cfg, self.curve_, self.kernel_)
        V = self.values_
        mats = self.kernel_.matrices[:cfg.horizon]
        q_inq = inquire + cfg.beta * np.einsum("dij,j->id", mats, V[:, 0])
        q_hold = np.full_like(V, -np.inf)
        q_hold[:, :-1] = hold[:, :-1] + cfg.beta * V[:, 1:]
        return (q_inq - q_hold)[X[:, 0], X[:, 1] - 1]

    def score(self, X=None, y=None):
        """Start-state value of the fitted policy (higher is better)."""
        check_is_fitted(self, "policy_table_")
        return self.start_value_

    def simulate(self, episodes=10_000, slots_per_episode=917, mode="random_walk",
                 random_state=0):
        """Monte Carlo :class:`EpisodeStats` of the fitted policy."""
        check_is_fitted(self, "policy_table_")
        sim = SimConfig(episodes=episodes, slots_per_episode=slots_per_episode,
                        base_seed=random_state, mode=mode)
        return simulate([self.policy_table_], self.config_, self.curve_, self.kernel_.law,
                        sim, kernel=self.kernel_)[0]
