import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from priceinquiry import (ConvergenceError, InputError, LmpTable, MdpState, ModelConfig,
                          build_curve, build_kernel, consumption, evaluate_policy, law_for,
                          net_utility, reward_hold, reward_inquire, solve)
from priceinquiry.mdp import reward_tables
from priceinquiry.policies import PolicySpec, make_policy

from conftest import kernel_for
from oracles import enumerate_policies, log_payoff, mc_kernel_row

DEFAULT = ModelConfig()


def test_config_validation():
    for kwargs, field in [({"beta": 1.0}, "beta"), ({"beta": 0.0}, "beta"),
                          ({"comm_cost": -1.0}, "comm_cost"), ({"horizon": 0}, "horizon"),
                          ({"horizon": 2.5}, "horizon"), ({"utility_scale": 0.0}, "utility_scale")]:
        with pytest.raises(InputError) as exc:
            ModelConfig(**kwargs)
        assert exc.value.field == field


def test_consumption_closed_form():
    assert consumption(DEFAULT, 10.0) == 10.0
    assert consumption(DEFAULT, 100.0) == 1.0
    with pytest.raises(InputError):
        consumption(DEFAULT, 0.0)


@given(st.floats(0.01, 1e4))
def test_consumption_inverts_marginal_utility(p):
    x = consumption(DEFAULT, p)
    assert DEFAULT.utility_scale / x == pytest.approx(p, rel=1e-12)


def test_net_utility_informed():
    p = 15.0
    assert net_utility(DEFAULT, p, p) == pytest.approx(100 * math.log(100 / p) - 100, abs=1e-12)


def test_net_utility_stale_against_grid_maximisation():
    x = np.linspace(0.01, 50.0, 5_000_001)
    x_star = x[np.argmax(100 * np.log(x) - 14.0 * x)]
    oracle = 100 * math.log(x_star) - 15.0 * x_star
    got = net_utility(DEFAULT, 14.0, 15.0)
    assert got == pytest.approx(oracle, abs=1e-4)
    assert got == pytest.approx(89.468, abs=1e-3)


@given(st.floats(0.5, 100), st.floats(0.5, 100))
def test_informed_consumption_is_best(p_assumed, p_true):
    assert net_utility(DEFAULT, p_true, p_true) >= net_utility(DEFAULT, p_assumed, p_true) - 1e-9


def test_constant_curve_rewards():
    curve = build_curve(LmpTable("X", (0.0, 100.0), (20.0, 20.0)))
    k = build_kernel(curve, law_for(curve, 200.0), 4)
    s = MdpState(0, 3)
    cfg = ModelConfig(horizon=4)
    assert reward_hold(cfg, curve, k, s) == pytest.approx(net_utility(cfg, 20.0, 20.0))
    assert reward_inquire(cfg, curve, k, s) == pytest.approx(net_utility(cfg, 20.0, 20.0) - 10)


def test_degenerate_variance_rewards(pjm_curves):
    curve = pjm_curves["A"]
    k = build_kernel(curve, law_for(curve, 1e-8), 10)
    cfg = replace(DEFAULT, comm_cost=0.0)
    for i, q in enumerate(curve.prices):
        s = MdpState(i, 4)
        assert reward_hold(cfg, curve, k, s) == pytest.approx(net_utility(cfg, q, q), abs=1e-2)
        assert reward_inquire(cfg, curve, k, s) == pytest.approx(net_utility(cfg, q, q), abs=1e-2)


def test_reward_hold_against_monte_carlo(pjm_curves):
    curve = pjm_curves["A"]
    i = curve.prices.tolist().index(15.0)
    n = 10**6
    _, landed = mc_kernel_row(curve, 200.0, i, 5, n, np.random.default_rng(3))
    pay = np.array([log_payoff(100.0, 15.0, q) for q in curve.prices])[landed]
    got = reward_hold(DEFAULT, curve, kernel_for(curve, 200.0), MdpState(i, 5))
    assert abs(pay.mean() - got) <= 3 * pay.std(ddof=1) / math.sqrt(n)


def test_reward_inquire_against_monte_carlo(pjm_curves):
    curve = pjm_curves["D"]
    i = curve.prices.tolist().index(35.0)
    n = 10**6
    _, landed = mc_kernel_row(curve, 200.0, i, 10, n, np.random.default_rng(4))
    pay = np.array([log_payoff(100.0, q, q) for q in curve.prices])[landed] - 10.0
    got = reward_inquire(DEFAULT, curve, kernel_for(curve, 200.0), MdpState(i, 10))
    assert abs(pay.mean() - got) <= 3 * pay.std(ddof=1) / math.sqrt(n)


def test_reward_tables_match_scalar_versions(pjm_curves):
    curve = pjm_curves["B"]
    k = kernel_for(curve, 200.0)
    hold, inq = reward_tables(DEFAULT, curve, k)
    for i in range(curve.n_levels):
        for d in (1, 6, 10):
            s = MdpState(i, d)
            assert hold[i, d - 1] == pytest.approx(reward_hold(DEFAULT, curve, k, s), abs=1e-10)
            assert inq[i, d - 1] == pytest.approx(reward_inquire(DEFAULT, curve, k, s), abs=1e-10)


def test_state_checks(pjm_curves):
    curve = pjm_curves["E"]
    k = kernel_for(curve, 200.0)
    with pytest.raises(InputError):
        reward_hold(DEFAULT, curve, k, MdpState(3, 1))
    with pytest.raises(InputError):
        reward_hold(DEFAULT, curve, k, MdpState(0, 11))
    with pytest.raises(InputError):
        MdpState(0, 0)


@pytest.mark.parametrize("bus", "ABCDE")
def test_dominance(pjm_curves, bus):
    curve = pjm_curves[bus]
    hold, inq = reward_tables(DEFAULT, curve, kernel_for(curve, 200.0))
    assert np.all(inq + DEFAULT.comm_cost >= hold - 1e-12)


def test_dominance_equality_for_point_mass():
    curve = build_curve(LmpTable("X", (0.0, 100.0), (20.0, 20.0)))
    k = build_kernel(curve, law_for(curve, 50.0), 3)
    hold, inq = reward_tables(ModelConfig(horizon=3), curve, k)
    assert np.allclose(inq + 10.0, hold, atol=1e-12)


# toy curve, value iteration against brute-force enumeration of every policy

@pytest.mark.parametrize("theta", [50.0, 200.0])
@pytest.mark.parametrize("cost", [0.0, 1.0, 10.0])
def test_solve_matches_enumeration(toy_curve, theta, cost):
    cfg = ModelConfig(beta=0.9, comm_cost=cost, horizon=3)
    k = kernel_for(toy_curve, theta, 3)
    vf = solve(cfg, toy_curve, k)
    best, winners = enumerate_policies(0.9, cost, 100.0, toy_curve.prices.tolist(),
                                       k.matrices, 3)
    for (i, d), v in best.items():
        assert vf.values[i, d - 1] == pytest.approx(v, abs=1e-6)
    chosen = {(i, d): int(vf.policy[i, d - 1]) for i in range(2) for d in (1, 2, 3)}
    assert chosen in winners


def test_zero_cost_optimum_on_toy(toy_curve):
    # The uniform re-draw inside the observed region after each inquiry makes
    # leaving the cheap region likelier, so holding there wins even when
    # inquiries are free. Expected policy taken from the enumeration oracle.
    k = kernel_for(toy_curve, 200.0, 3)
    _, winners = enumerate_policies(0.9, 0.0, 100.0, [10.0, 20.0], k.matrices, 3)
    assert winners == [{(0, 1): 0, (0, 2): 0, (0, 3): 1, (1, 1): 1, (1, 2): 1, (1, 3): 1}]
    vf = solve(ModelConfig(beta=0.9, comm_cost=0.0, horizon=3), toy_curve, k)
    assert vf.policy.tolist() == [[0, 0, 1], [1, 1, 1]]


@pytest.mark.parametrize("bus", "ABCDE")
def test_huge_cost_holds_until_forced(pjm_curves, bus):
    curve = pjm_curves[bus]
    vf = solve(replace(DEFAULT, comm_cost=1e6), curve, kernel_for(curve, 200.0))
    assert np.all(vf.policy[:, :-1] == 0)
    assert np.all(vf.policy[:, -1] == 1)


@pytest.mark.parametrize("bus", "ABCDE")
def test_solution_properties(pjm_curves, bus):
    curve = pjm_curves[bus]
    k = kernel_for(curve, 200.0)
    vf = solve(DEFAULT, curve, k)
    assert vf.residual <= 1e-9
    assert np.all(vf.policy[:, -1] == 1)
    pv = evaluate_policy(DEFAULT, curve, k, vf.policy)
    assert np.allclose(pv.values, vf.values, atol=1e-6, rtol=0)
    for kind in ("always", "never", "myopic", "periodic:4"):
        table = make_policy(PolicySpec.parse(kind), DEFAULT, curve, k)
        other = evaluate_policy(DEFAULT, curve, k, table).values
        assert np.all(vf.values >= other - 1e-6)


def test_greedy_values_agree_with_value_iteration(pjm_curves):
    # values are the exact evaluation of the greedy policy; the iterate itself
    # is within beta / (1 - beta) * tol of them
    curve = pjm_curves["A"]
    k = kernel_for(curve, 200.0)
    vf = solve(DEFAULT, curve, k)
    vi = np.maximum(vf.q_hold, vf.q_inquire)
    assert np.max(np.abs(vi - vf.values)) <= 1e-9 * 0.99 / 0.01 + 1e-9


def test_contraction(pjm_curves):
    curve = pjm_curves["C"]
    vf = solve(DEFAULT, curve, kernel_for(curve, 200.0))
    r = vf.residuals[-101:]
    slack = 64 * np.finfo(float).eps * np.max(np.abs(vf.values))
    assert np.all(r[1:] <= DEFAULT.beta * r[:-1] + slack)


def test_value_non_increasing_in_cost(pjm_curves):
    curve = pjm_curves["D"]
    k = kernel_for(curve, 200.0)
    prev = None
    for c in (0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0):
        v = solve(replace(DEFAULT, comm_cost=c), curve, k).values
        if prev is not None:
            assert np.all(v <= prev + 1e-9)
        prev = v


def test_always_inquire_geometric_series(toy_curve):
    cfg = ModelConfig(beta=0.9, comm_cost=1.0, horizon=3)
    k = kernel_for(toy_curve, 200.0, 3)
    q = toy_curve.prices
    informed = np.array([log_payoff(100.0, p, p) for p in q])
    # V(., 1) = sum_t beta^t K1^t (K1 informed - c), summed term by term
    step = k[1] @ informed - cfg.comm_cost
    v1, term = np.zeros(2), step.copy()
    for _ in range(2000):
        v1 += term
        term = cfg.beta * (k[1] @ term)
    table = make_policy(PolicySpec("always"), cfg, toy_curve)
    pv = evaluate_policy(cfg, toy_curve, k, table)
    assert pv.values[:, 0] == pytest.approx(v1, abs=1e-9)
    for d in (2, 3):
        expect = k[d] @ informed - cfg.comm_cost + cfg.beta * (k[d] @ v1)
        assert pv.values[:, d - 1] == pytest.approx(expect, abs=1e-9)
    w = toy_curve.level_weights
    assert pv.start_value == pytest.approx(w @ v1, abs=1e-9)


def test_evaluate_rejects_unforced_policy(toy_curve):
    cfg = ModelConfig(beta=0.9, horizon=3)
    k = kernel_for(toy_curve, 200.0, 3)
    with pytest.raises(InputError):
        evaluate_policy(cfg, toy_curve, k, np.zeros((2, 3), dtype=int))


def test_non_convergence_raises(toy_curve):
    cfg = ModelConfig(beta=0.9, horizon=3)
    with pytest.raises(ConvergenceError):
        solve(cfg, toy_curve, kernel_for(toy_curve, 200.0, 3), tol=1e-9, max_iter=5)


def test_kernel_horizon_too_short(toy_curve):
    with pytest.raises(InputError):
        solve(ModelConfig(horizon=3), toy_curve, kernel_for(toy_curve, 200.0, 2))
