"""Near-optimal strategies: exact certification and simulation."""

import random
from fractions import Fraction

import pytest

from generators import random_arena
from paritymdp.decomposition import max_gecs
from paritymdp.games import NotGEC
from paritymdp.mdp import min_mean_payoff
from paritymdp.strategy import (NotSGEC, ScheduleParams, certify_finite_strategy,
                                epsilon_strategy_gec, epsilon_strategy_sgec,
                                finite_epsilon_strategy, global_epsilon_strategy, simulate)
from paritymdp.surecost import cost_sure_finite


def test_schedule_params():
    p = ScheduleParams()
    assert [p.mean_steps(i) for i in (1, 2, 3)] == [4, 16, 64]
    assert p.reach_steps(2, 3) == 4 * 3 * 4
    assert ScheduleParams.for_epsilon(Fraction(1, 1024)).gamma == 10
    with pytest.raises(ValueError):
        ScheduleParams(mean="3^i")
    with pytest.raises(ValueError):
        ScheduleParams(mean=lambda i: 5)


def test_finite_strategies_certify_and_approach_the_value():
    rng = random.Random(51)
    seen = 0
    for _ in range(60):
        M = random_arena(rng, motif=0.3)
        res = cost_sure_finite(M)
        if not res.realizable:
            continue
        seen += 1
        gaps = []
        for k in (2, 16, 128):
            f = finite_epsilon_strategy(M, k=k)
            winning, value = certify_finite_strategy(M, f)
            assert winning
            assert value >= res.value
            gaps.append(value - res.value)
        assert gaps[2] <= gaps[0]
        assert gaps[2] <= Fraction(M.max_cost() + 1, 8)
    assert seen > 20


def test_fig1_finite_strategy_value(fig1):
    f = finite_epsilon_strategy(fig1)
    assert certify_finite_strategy(fig1, f) == (True, 10)


def test_sgec_strategy_errors(fig1):
    with pytest.raises(NotSGEC):
        epsilon_strategy_sgec(fig1, {0, 2, 3}, 4)
    with pytest.raises(ValueError):
        epsilon_strategy_sgec(fig1, {1}, 0)
    f = epsilon_strategy_sgec(fig1, {1}, 3)
    assert certify_finite_strategy(fig1, f, start=1) == (True, 10)


def test_gec_strategy_errors(fig1):
    with pytest.raises(NotGEC):
        epsilon_strategy_gec(fig1, {0})


def test_simulation_is_deterministic(fig1):
    h = epsilon_strategy_gec(fig1, max_gecs(fig1)[0])
    a = simulate(fig1, h, 5000, seed=3)
    b = simulate(fig1, h, 5000, seed=3)
    c = simulate(fig1, h, 5000, seed=4)
    assert a == b
    assert a != c


def test_simulate_memoryless_matches_exact_gain(ergodic):
    values, strat = min_mean_payoff(ergodic)
    stats = simulate(ergodic, strat, 200_000, seed=1)
    assert abs(float(stats.mean_cost) - float(values[ergodic.initial])) < 0.05


def test_global_strategy_on_fig1(fig1):
    f = global_epsilon_strategy(fig1, eps=Fraction(1, 10), n0=100)
    stats = simulate(fig1, f, 100_000, seed=2)
    assert 1 <= stats.mean_cost <= 2


def test_simulate_rejects_bad_horizon(fig1):
    with pytest.raises(ValueError):
        simulate(fig1, {0: 0, 1: 0}, 0)
