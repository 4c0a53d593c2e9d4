import math
from dataclasses import replace

import numpy as np
import pytest

from priceinquiry import InputError, MdpState, ModelConfig, make_policy, myopic_action
from priceinquiry.mdp import penalty_matrix, reward_hold, reward_inquire, solve
from priceinquiry.policies import PolicySpec, expected_penalty, myopic_table

from conftest import kernel_for

DEFAULT = ModelConfig()


def test_penalty_examples():
    pen = penalty_matrix(DEFAULT, [14.0, 15.0])
    assert pen[0, 0] == 0.0 and pen[1, 1] == 0.0
    assert pen[0, 1] == pytest.approx(100 * (15 / 14 - 1 - math.log(15 / 14)), abs=1e-12)
    assert pen[0, 1] == pytest.approx(0.2436, abs=1e-4)


def test_penalty_against_grid_maximisation():
    x = np.linspace(0.01, 50.0, 5_000_001)
    best = np.max(100 * np.log(x) - 15.0 * x)
    stale = 100 * math.log(100 / 14) - 15.0 * (100 / 14)
    assert penalty_matrix(DEFAULT, [14.0, 15.0])[0, 1] == pytest.approx(best - stale, abs=1e-6)


@pytest.mark.parametrize("bus", "ABCDE")
def test_penalty_sign_exhaustive(pjm_curves, bus):
    q = pjm_curves[bus].prices
    pen = penalty_matrix(DEFAULT, q)
    for i in range(len(q)):
        for j in range(len(q)):
            if i == j:
                assert pen[i, j] == 0.0
            else:
                assert pen[i, j] > 0.0


@pytest.mark.parametrize("bus", "ABCDE")
@pytest.mark.parametrize("cost", [0.0, 0.5, 5.0, 10.0])
def test_myopic_is_instantaneous_comparison(pjm_curves, bus, cost):
    curve = pjm_curves[bus]
    k = kernel_for(curve, 200.0)
    cfg = replace(DEFAULT, comm_cost=cost)
    table = myopic_table(cfg, curve, k)
    for i in range(curve.n_levels):
        for d in range(1, cfg.horizon + 1):
            s = MdpState(i, d)
            brute = reward_inquire(cfg, curve, k, s) > reward_hold(cfg, curve, k, s)
            expect = 1 if (brute or d == cfg.horizon) else 0
            assert myopic_action(cfg, curve, k, s) == expect
            assert table[i, d - 1] == expect


def test_myopic_zero_cost_inquires_unless_point_mass(pjm_curves):
    curve = pjm_curves["A"]
    k = kernel_for(curve, 200.0)
    table = myopic_table(replace(DEFAULT, comm_cost=0.0), curve, k)
    pen = expected_penalty(DEFAULT, curve, k)
    assert np.all(pen > 0)
    assert np.all(table == 1)


def test_periodic_definitions(pjm_curves):
    curve = pjm_curves["B"]
    always = make_policy(PolicySpec("always"), DEFAULT, curve)
    never = make_policy(PolicySpec("never"), DEFAULT, curve)
    assert np.array_equal(always, make_policy(PolicySpec("periodic", 1), DEFAULT, curve))
    assert np.array_equal(never, make_policy(PolicySpec("periodic", 10), DEFAULT, curve))
    assert np.all(always == 1)
    assert np.all(never[:, :-1] == 0)
    p3 = make_policy(PolicySpec.parse("periodic:3"), DEFAULT, curve)
    assert p3[0].tolist() == [0, 0, 1, 1, 1, 1, 1, 1, 1, 1]


@pytest.mark.parametrize("kind", ["optimal", "myopic", "always", "never", "periodic:5"])
def test_every_table_forces_last_age(pjm_curves, kind):
    curve = pjm_curves["D"]
    k = kernel_for(curve, 200.0)
    solved = solve(DEFAULT, curve, k)
    table = make_policy(PolicySpec.parse(kind), DEFAULT, curve, k, solved)
    assert table.shape == (curve.n_levels, DEFAULT.horizon)
    assert np.all(table[:, -1] == 1)
    assert not table.flags.writeable


def test_optimal_copies_solution(pjm_curves):
    curve = pjm_curves["A"]
    k = kernel_for(curve, 200.0)
    solved = solve(DEFAULT, curve, k)
    assert np.array_equal(make_policy(PolicySpec("optimal"), DEFAULT, curve, k, solved),
                          solved.policy)


def test_spec_errors(pjm_curves):
    with pytest.raises(InputError):
        PolicySpec("sometimes")
    with pytest.raises(InputError):
        PolicySpec.parse("periodic:x")
    with pytest.raises(InputError):
        PolicySpec("periodic")
    with pytest.raises(InputError):
        make_policy(PolicySpec("optimal"), DEFAULT, pjm_curves["A"])
    with pytest.raises(InputError):
        make_policy(PolicySpec("periodic", 11), DEFAULT, pjm_curves["A"])
