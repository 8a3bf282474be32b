"""Sure-cost pipelines against the brute-force reduced MDP."""

import random
from fractions import Fraction

import oracles
from generators import random_arena
from paritymdp.model import ParityMDP
from paritymdp.surecost import (UNREALIZABLE, as_number, cost_sure_finite, cost_sure_infinite,
                                max_sgecs, prune_to_sure_winning, reduced_arena)


def test_fig1_values(fig1):
    inf = cost_sure_infinite(fig1)
    fin = cost_sure_finite(fig1)
    assert inf.value == 1 and fin.value == 10
    assert [c.states for c in inf.components] == [frozenset({0, 2, 3}), frozenset({1})]
    assert [c.states for c in fin.components] == [frozenset({1})]
    assert [c.value for c in inf.components] == [1, 10]


def test_fig1_reduced_arena_charges_w_plus_one_outside(fig1):
    res = cost_sure_finite(fig1)
    W = fig1.max_cost()
    inside = {s for c in res.local_components for s in c.states}
    for s in res.reduced.states:
        if s not in inside:
            assert res.reduced.cost[s] == W + 1
    assert set(res.reduced.rank) == {0}


def test_unrealizable():
    M = ParityMDP((1,), ({0: 0},), ({},), (0,), (1,), 0)
    res = cost_sure_infinite(M)
    assert res.value is UNREALIZABLE and not res.realizable
    assert cost_sure_finite(M).value is UNREALIZABLE
    assert as_number(res.value) == float("inf")
    assert str(UNREALIZABLE) == "unrealizable"


def test_values_match_oracle_sample():
    rng = random.Random(41)
    for _ in range(60):
        M = random_arena(rng, motif=0.3)
        for memory, solve in (("infinite", cost_sure_infinite), ("finite", cost_sure_finite)):
            want, comps = oracles.sure_cost(M, memory)
            res = solve(M)
            assert res.value == want
            if res.realizable:
                assert {c.states for c in res.components} == set(comps)


def test_finite_never_below_infinite():
    rng = random.Random(42)
    for _ in range(100):
        M = random_arena(rng, motif=0.3)
        a, b = cost_sure_infinite(M), cost_sure_finite(M)
        assert a.realizable == b.realizable
        if a.realizable:
            assert a.value <= b.value <= M.max_cost() + 1


def test_sgecs_are_gecs_inside_maximal_gecs():
    rng = random.Random(43)
    for _ in range(100):
        M = random_arena(rng, motif=0.3)
        P, _ = prune_to_sure_winning(M)
        if P is None:
            continue
        gecs = oracles.max_gecs(P)
        for comp in max_sgecs(P):
            assert any(comp.states <= G for G in gecs)


def test_reduced_arena_zero_components():
    M = ParityMDP((1, 1), ({0: 1}, {0: 0}), ({}, {}), (Fraction(3), 1), (1, 1), 0)
    R = reduced_arena(M, [], 5)
    assert R.cost == (6, 6)
