"""Chains and mean-payoff MDPs against policy enumeration."""

import random
from fractions import Fraction

import sympy

import oracles
from generators import random_chain, random_mdp
from paritymdp.mdp import (bottom_classes, chain_gain, evaluate_chain, is_optimal, max_reach,
                           min_mean_payoff, policy_chain, stationary)
from paritymdp.model import ParityMDP


def sympy_gain(rows, cost):
    """Gain from the multichain optimality equations
    g = Pg, g + h = c + Ph, h + w = Pw, which fix g uniquely."""
    n = len(rows)
    P = sympy.zeros(n, n)
    for s, row in enumerate(rows):
        for t, p in row.items():
            P[s, t] += sympy.Rational(p.numerator, p.denominator)
    I = sympy.eye(n)
    Z = sympy.zeros(n, n)
    A = sympy.Matrix.vstack(
        sympy.Matrix.hstack(I - P, Z, Z),
        sympy.Matrix.hstack(I, I - P, Z),
        sympy.Matrix.hstack(Z, I, I - P),
    )
    b = sympy.Matrix([0] * n + list(cost) + [0] * n)
    sol, params = A.gauss_jordan_solve(b)
    g = sol[:n, 0].subs({p: 0 for p in params})
    return [Fraction(int(v.p), int(v.q)) for v in g]


def test_chain_gain_matches_two_oracles():
    rng = random.Random(8)
    for k in range(120):
        rows, cost = random_chain(rng)
        got = chain_gain(rows, cost)
        assert got == oracles.chain_gains(rows, cost)
        if k < 40:
            assert got == sympy_gain(rows, cost)


def test_bias_solves_the_poisson_equation():
    rng = random.Random(9)
    for _ in range(60):
        rows, cost = random_chain(rng)
        gain, bias = evaluate_chain(rows, cost)
        for s, row in enumerate(rows):
            assert gain[s] == sum(p * gain[t] for t, p in row.items())
            assert gain[s] + bias[s] == cost[s] + sum(p * bias[t] for t, p in row.items())


def test_stationary_distribution():
    rows = [{1: Fraction(1)}, {0: Fraction(1, 2), 1: Fraction(1, 2)}]
    assert bottom_classes(rows) == [{0, 1}]
    assert stationary(rows, {0, 1}) == {0: Fraction(1, 3), 1: Fraction(2, 3)}


def test_min_mean_payoff_matches_policy_enumeration():
    rng = random.Random(10)
    for _ in range(120):
        M = random_mdp(rng)
        values, strat = min_mean_payoff(M)
        assert list(values.gain) == oracles.min_gain_by_policies(M)
        assert is_optimal(M, values.gain, values.bias)
        assert chain_gain(policy_chain(M, strat), M.cost) == list(values.gain)


def test_is_optimal_rejects_a_suboptimal_policy():
    M = ParityMDP((1, 1, 1), ({0: 1, 1: 2}, {0: 1}, {0: 2}), ({}, {}, {}), (0, 5, 1), (0,) * 3, 0)
    gain, bias = evaluate_chain(policy_chain(M, {0: 0, 1: 0, 2: 0}), M.cost)
    assert not is_optimal(M, gain, bias)
    values, strat = min_mean_payoff(M)
    assert values[0] == 1 and strat[0] == 1


def reach_by_policies(M, T):
    """Best reachability probability over memoryless policies: targets
    become absorbing with cost 1, so the gain is the probability."""
    absorbing = ParityMDP(M.owner, tuple({0: s} if s in T else M.moves[s] for s in M.states),
                          tuple({} if M.owner[s] == 1 else ({0: Fraction(1)} if s in T else M.prob[s])
                                for s in M.states),
                          tuple(1 if s in T else 0 for s in M.states), (0,) * M.n, M.initial)
    g = oracles.min_gain_by_policies(absorbing.with_costs([-c for c in absorbing.cost]))
    return [-x for x in g]


def test_max_reach_matches_policy_enumeration():
    rng = random.Random(12)
    for _ in range(100):
        M = random_mdp(rng)
        T = {s for s in M.states if rng.random() < 0.3}
        values, strat = max_reach(M, M.states, T)
        ref = reach_by_policies(M, T)
        assert [values[s] for s in M.states] == ref
