"""Monte Carlo and exact evaluation of inquiry policies.

Two simulation modes:

``random_walk``
    The load follows one-slot truncated-Gaussian steps; the true price is
    read off the curve every slot. The clairvoyant ideal sees the true
    price every slot for free, on the same trajectory.
``kernel``
    No latent load. An inquiry at age ``d`` draws the new level from the
    kernel row; a hold earns the exact expected stale reward. Episodes are
    unbiased samples of the dynamic-programming values. The ideal is the
    zero-cost optimal policy driven by the same uniforms.

Exact evaluation measures cost as the gap between a policy's start value
and the start value of the optimal policy at zero communication cost.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._validation import check_scalar
from .exceptions import InputError
from .kernel import build_kernel, law_for
from .load_model import sample_steps
from .mdp import (INQUIRE, evaluate_policy, payoff_matrix, reward_tables, solve,
                  transition_matrix)
from .policies import PolicySpec, make_policy

MODES = ("random_walk", "kernel")
SHARD_SIZE = 1000
TAIL_BOUND = 1e-4

DEFAULT_THETAS = (25.0, 50.0, 100.0, 200.0, 400.0)
DEFAULT_COSTS = (1.0, 2.0, 5.0, 10.0, 20.0, 40.0)
RATIO_PAIRS = (("always", "ratio_opt_always"), ("never", "ratio_opt_never"),
               ("myopic", "ratio_opt_myopic"))


def min_slots(beta, tail=TAIL_BOUND):
    """Shortest episode with ``beta**slots <= tail``."""
    return math.ceil(math.log(tail) / math.log(beta))


@dataclass(frozen=True)
class SimConfig:
    episodes: int = 10_000
    slots_per_episode: int = 917
    base_seed: int = 0
    mode: str = "random_walk"
    start: str = "uniform"

    def __post_init__(self):
        check_scalar(self.episodes, "episodes", lower=1, integer=True)
        check_scalar(self.slots_per_episode, "slots_per_episode", lower=1, integer=True)
        check_scalar(self.base_seed, "seed", lower=0, integer=True)
        if self.mode not in MODES:
            raise InputError(f"mode must be one of {MODES}, got {self.mode!r}", "mode")
        if self.start != "uniform":
            raise InputError(f"unsupported start rule {self.start!r}", "start")

    def check(self, config):
        if self.slots_per_episode < config.horizon:
            raise InputError(
                f"slots_per_episode {self.slots_per_episode} shorter than horizon "
                f"{config.horizon}", "slots_per_episode")
        need = min_slots(config.beta)
        if self.slots_per_episode < need:
            raise InputError(
                f"slots_per_episode {self.slots_per_episode} leaves a discounted tail "
                f"above {TAIL_BOUND}; need at least {need} at beta={config.beta}",
                "slots_per_episode")


def _mean(x):
    return math.fsum(x) / len(x)


def _stderr(x):
    n = len(x)
    if n < 2:
        return float("nan")
    m = _mean(x)
    return math.sqrt(math.fsum((v - m) ** 2 for v in x) / (n - 1) / n)


@dataclass(frozen=True, eq=False)
class EpisodeStats:
    """Per-episode discounted totals for one policy.

    ``cost = ideal - reward``. Means and standard errors aggregate with
    exact summation, so they do not depend on shard order.
    """

    reward: np.ndarray
    ideal: np.ndarray
    inquiries: np.ndarray
    cost: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "cost", self.ideal - self.reward)

    @property
    def episodes(self):
        return len(self.reward)

    @property
    def discounted_reward(self):
        return _mean(self.reward)

    @property
    def discounted_ideal(self):
        return _mean(self.ideal)

    @property
    def mean_cost(self):
        return _mean(self.cost)

    @property
    def inquiry_count(self):
        return _mean(self.inquiries)

    @property
    def standard_error(self):
        """Standard error of the mean cost."""
        return _stderr(self.cost)

    @property
    def reward_standard_error(self):
        return _stderr(self.reward)

    @classmethod
    def concat(cls, parts):
        return cls(np.concatenate([p.reward for p in parts]),
                   np.concatenate([p.ideal for p in parts]),
                   np.concatenate([p.inquiries for p in parts]))


def _random_walk(tables, config, curve, law, n, slots, rng):
    N = payoff_matrix(config, curve.prices)
    informed = np.diag(N).copy()
    c, beta = config.comm_cost, config.beta
    load = rng.uniform(0.0, curve.d_max, n)
    start = curve.level_of_load(load)
    assumed = [start.copy() for _ in tables]
    age = [np.ones(n, dtype=np.intp) for _ in tables]
    reward = [np.zeros(n) for _ in tables]
    count = [np.zeros(n, dtype=np.int64) for _ in tables]
    ideal = np.zeros(n)
    w = 1.0
    for _ in range(slots):
        load = sample_steps(law, load, rng)
        true = curve.level_of_load(load)
        ideal += w * informed[true]
        for p, table in enumerate(tables):
            act = table[assumed[p], age[p] - 1] == INQUIRE
            r = np.where(act, informed[true] - c, N[assumed[p], true])
            reward[p] += w * r
            count[p] += act
            assumed[p] = np.where(act, true, assumed[p])
            age[p] = np.where(act, 1, age[p] + 1)
        w *= beta
    return [EpisodeStats(reward[p], ideal.copy(), count[p]) for p in range(len(tables))]


def _kernel_walk(table, config, curve, kernel, uniforms, start_u):
    hold, inquire = reward_tables(config, curve, kernel)
    cum = np.cumsum(kernel.matrices[:config.horizon], axis=2)
    cum[:, :, -1] = 1.0
    informed = np.diag(payoff_matrix(config, curve.prices))
    weights = np.cumsum(curve.level_weights)
    weights[-1] = 1.0
    n = start_u.shape[0]
    level = np.searchsorted(weights, start_u, side="right")
    age = np.ones(n, dtype=np.intp)
    reward = np.zeros(n)
    count = np.zeros(n, dtype=np.int64)
    w = 1.0
    for u in uniforms:
        act = table[level, age - 1] == INQUIRE
        rows = cum[age - 1, level]
        drawn = np.minimum((u[:, None] >= rows).sum(axis=1), curve.n_levels - 1)
        r = np.where(act, informed[drawn] - config.comm_cost, hold[level, age - 1])
        reward += w * r
        count += act
        level = np.where(act, drawn, level)
        age = np.where(act, 1, age + 1)
        w *= config.beta
    return reward, count


def _kernel_mode(tables, ideal_table, config, curve, kernel, n, slots, rng):
    start_u = rng.random(n)
    uniforms = rng.random((slots, n))
    ideal, _ = _kernel_walk(ideal_table, replace(config, comm_cost=0.0), curve, kernel,
                            uniforms, start_u)
    out = []
    for table in tables:
        reward, count = _kernel_walk(table, config, curve, kernel, uniforms, start_u)
        out.append(EpisodeStats(reward, ideal.copy(), count))
    return out


def _shard_rngs(sim):
    n_shards = -(-sim.episodes // SHARD_SIZE)
    seeds = np.random.SeedSequence(sim.base_seed).spawn(n_shards)
    sizes = [SHARD_SIZE] * (n_shards - 1) + [sim.episodes - SHARD_SIZE * (n_shards - 1)]
    return [(np.random.default_rng(s), m) for s, m in zip(seeds, sizes)]


def _ideal_table(config, curve, kernel):
    return solve(replace(config, comm_cost=0.0), curve, kernel).policy


def simulate(tables, config, curve, law, sim, kernel=None, rng=None):
    """Run ``sim.episodes`` episodes for several policy tables on common random numbers.

    Returns one :class:`EpisodeStats` per table. Episodes are split into
    fixed-size shards with seeds spawned from ``sim.base_seed`` unless an
    explicit ``rng`` is given.
    """
    sim.check(config)
    tables = [np.asarray(t) for t in tables]
    if sim.mode == "kernel":
        if kernel is None:
            kernel = build_kernel(curve, law, config.horizon)
        ideal_table = _ideal_table(config, curve, kernel)
    shards = [(rng, sim.episodes)] if rng is not None else _shard_rngs(sim)
    parts = []
    for shard_rng, m in shards:
        if sim.mode == "random_walk":
            parts.append(_random_walk(tables, config, curve, law, m,
                                      sim.slots_per_episode, shard_rng))
        else:
            parts.append(_kernel_mode(tables, ideal_table, config, curve, kernel, m,
                                      sim.slots_per_episode, shard_rng))
    return [EpisodeStats.concat([p[k] for p in parts]) for k in range(len(tables))]


def run_episode(policy, config, curve, law, sim, rng, kernel=None):
    """One episode of ``policy`` (an action table)."""
    return simulate([policy], config, curve, law, replace(sim, episodes=1),
                    kernel=kernel, rng=rng)[0]


@dataclass(frozen=True)
class PolicyResult:
    label: str
    cost: float
    stderr: float
    reward: float
    inquiries: float


def _ratio(num, den):
    return num / den if den != 0 else float("nan")


def ratios(results):
    """Cost ratios with the optimal policy in the numerator; NaN when undefined."""
    out = {}
    if "optimal" not in results:
        return out
    for kind, name in RATIO_PAIRS:
        if kind in results:
            out[name] = _ratio(results["optimal"].cost, results[kind].cost)
    return out


def _tables(specs, config, curve, kernel):
    solved = solve(config, curve, kernel) if any(s.kind == "optimal" for s in specs) else None
    return [make_policy(s, config, curve, kernel, solved) for s in specs]


def exact_costs(specs, config, curve, kernel):
    """Deterministic costs from exact policy evaluation, keyed by policy label."""
    ideal = solve(replace(config, comm_cost=0.0), curve, kernel)
    ideal_start = float(curve.level_weights @ ideal.values[:, 0])
    out = {}
    for spec, table in zip(specs, _tables(specs, config, curve, kernel)):
        pv = evaluate_policy(config, curve, kernel, table)
        ages = _expected_inquiries(config, curve, kernel, table)
        out[spec.label] = PolicyResult(spec.label, ideal_start - pv.start_value, 0.0,
                                       pv.start_value, ages)
    return out


def _expected_inquiries(config, curve, kernel, table):
    """Discounted expected number of inquiries from the start distribution."""
    P = transition_matrix(config, kernel, table)
    r = (np.asarray(table) == INQUIRE).astype(float).reshape(-1)
    v = np.linalg.solve(np.eye(len(r)) - config.beta * P, r).reshape(table.shape)
    return float(curve.level_weights @ v[:, 0])


def run_experiment(specs, config, curve, law, sim=None, kernel=None, exact=False):
    """Mean cost per policy plus cost ratios against the optimal policy.

    With ``exact=True`` costs come from exact evaluation and ``sim`` is
    ignored. Returns ``(results, ratios)`` with results keyed by label.
    """
    specs = [s if isinstance(s, PolicySpec) else PolicySpec.parse(s) for s in specs]
    if len(specs) < 2:
        raise InputError("an experiment needs at least two policies", "policies")
    if kernel is None:
        kernel = build_kernel(curve, law, config.horizon)
    if exact:
        results = exact_costs(specs, config, curve, kernel)
    else:
        stats = simulate(_tables(specs, config, curve, kernel), config, curve, law, sim,
                         kernel=kernel)
        results = {s.label: PolicyResult(s.label, st.mean_cost, st.standard_error,
                                         st.discounted_reward, st.inquiry_count)
                   for s, st in zip(specs, stats)}
    return results, ratios(results)


SWEEP_POLICIES = ("optimal", "always", "never", "myopic")
SWEEP_COLUMNS = (
    "bus", "axis", "axis_value", "mode",
    "ratio_opt_always", "ratio_opt_never", "ratio_opt_myopic",
    "cost_opt", "cost_always", "cost_never", "cost_myopic",
    "stderr_opt", "stderr_always", "stderr_never", "stderr_myopic",
)
_SHORT = {"optimal": "opt", "always": "always", "never": "never", "myopic": "myopic"}


class KernelCache:
    """Kernels keyed by ``(bus, theta, horizon)``; reused across a cost sweep."""

    def __init__(self, tol=1e-9):
        self.tol = tol
        self._store = {}

    def get(self, curve, theta, horizon):
        key = (curve.bus_id, float(theta), int(horizon))
        if key not in self._store:
            self._store[key] = build_kernel(curve, law_for(curve, theta), horizon, self.tol)
        return self._store[key]


def sweep(axis, values, curves, config, theta, sim=None, modes=("exact",), cache=None):
    """One row per (bus, axis value, mode) with all cost ratios.

    ``axis`` is ``"theta"`` or ``"comm_cost"``; the other parameter stays at
    ``theta`` / ``config.comm_cost``.
    """
    if axis not in ("theta", "comm_cost"):
        raise InputError(f"axis must be 'theta' or 'comm_cost', got {axis!r}", "axis")
    values = [float(v) for v in values]
    if not values or any(v <= 0 for v in values) or values != sorted(values):
        raise InputError("sweep values must be positive and sorted ascending", "values")
    for m in modes:
        if m != "exact" and m not in MODES:
            raise InputError(f"unknown sweep mode {m!r}", "mode")
    if any(m != "exact" for m in modes) and sim is None:
        raise InputError("simulation modes need a SimConfig", "mode")
    cache = cache or KernelCache()
    specs = [PolicySpec(k) for k in SWEEP_POLICIES]
    rows = []
    for curve in curves:
        for v in values:
            th = v if axis == "theta" else theta
            cfg = replace(config, comm_cost=v) if axis == "comm_cost" else config
            kernel = cache.get(curve, th, cfg.horizon)
            law = kernel.law
            for mode in modes:
                if mode == "exact":
                    results, rat = run_experiment(specs, cfg, curve, law, kernel=kernel,
                                                  exact=True)
                else:
                    results, rat = run_experiment(specs, cfg, curve, law,
                                                  replace(sim, mode=mode), kernel=kernel)
                row = {"bus": curve.bus_id, "axis": axis, "axis_value": v, "mode": mode}
                row.update({name: rat[name] for _, name in RATIO_PAIRS})
                for kind in SWEEP_POLICIES:
                    row[f"cost_{_SHORT[kind]}"] = results[kind].cost
                    row[f"stderr_{_SHORT[kind]}"] = results[kind].stderr
                rows.append(row)
    return rows
