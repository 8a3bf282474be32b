"""Property tests over random arenas, chains and automata."""

import itertools
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from generators import random_arena, random_chain, random_dpw, random_game, random_safety_dpw
from paritymdp.games import solve_parity
from paritymdp.mdp import chain_gain
from paritymdp.model import ParityMDP
from paritymdp.strategy import finite_epsilon_strategy
from paritymdp.surecost import cost_sure_finite, cost_sure_infinite
from paritymdp.synthesis import (determinize_safety, extract_transducer, sensing_game,
                                 sensing_upw)

rngs = st.randoms(use_true_random=False)
SOLVERS = (cost_sure_infinite, cost_sure_finite)


def permuted(M, perm):
    inv = {p: s for s, p in enumerate(perm)}
    order = [inv[k] for k in range(M.n)]
    return ParityMDP(
        tuple(M.owner[s] for s in order),
        tuple({a: perm[t] for a, t in M.moves[s].items()} for s in order),
        tuple(dict(M.prob[s]) for s in order),
        tuple(M.cost[s] for s in order),
        tuple(M.rank[s] for s in order),
        perm[M.initial])


@settings(max_examples=80, deadline=None)
@given(rngs, st.integers(1, 5), st.integers(0, 4))
def test_sure_cost_is_affine_in_costs(rng, scale, shift):
    M = random_arena(rng, motif=0.3)
    N = M.with_costs([scale * c + shift for c in M.cost])
    for solve in SOLVERS:
        a, b = solve(M), solve(N)
        assert a.realizable == b.realizable
        if a.realizable:
            assert b.value == scale * a.value + shift


@settings(max_examples=60, deadline=None)
@given(rngs, st.randoms(use_true_random=False))
def test_sure_cost_ignores_state_names(rng, shuffle):
    M = random_arena(rng, motif=0.3)
    perm = list(range(M.n))
    shuffle.shuffle(perm)
    for solve in SOLVERS:
        assert solve(M).value == solve(permuted(M, perm)).value


@settings(max_examples=80, deadline=None)
@given(rngs)
def test_finite_memory_never_cheaper(rng):
    M = random_arena(rng, motif=0.3)
    a, b = cost_sure_infinite(M), cost_sure_finite(M)
    assert a.realizable == b.realizable
    if a.realizable:
        assert min(M.cost) <= a.value <= b.value <= max(M.cost) + 1


@settings(max_examples=60, deadline=None)
@given(rngs)
def test_sure_cost_matches_oracle(rng):
    M = random_arena(rng, motif=0.3)
    for memory, solve in zip(("infinite", "finite"), SOLVERS):
        assert solve(M).value == oracles.sure_cost(M, memory)[0]


@settings(max_examples=100, deadline=None)
@given(rngs)
def test_parity_games_are_determined(rng):
    G = random_game(rng)
    sol = solve_parity(G)
    assert sol.W1 | sol.W2 == set(G.states) and not sol.W1 & sol.W2
    assert set(sol.sigma1) == {s for s in sol.W1 if G.owner[s] == 1}


@settings(max_examples=100, deadline=None)
@given(rngs)
def test_chain_gain_within_cost_range(rng):
    rows, cost = random_chain(rng)
    g = chain_gain(rows, cost)
    assert all(min(cost) <= x <= max(cost) for x in g)
    for s, row in enumerate(rows):
        assert g[s] == sum(p * g[t] for t, p in row.items())


@settings(max_examples=40, deadline=None)
@given(rngs)
def test_sensing_game_size_formula(rng):
    D = random_dpw(rng, sensing=True)
    nI = D.alphabet.n_inputs
    assert sensing_game(D).n == 1 + D.n * nI * (1 + nI)


@settings(max_examples=30, deadline=None)
@given(rngs)
def test_minimized_transducer_same_outputs(rng):
    A = random_safety_dpw(rng)
    M = sensing_game(determinize_safety(sensing_upw(A)))
    if not cost_sure_finite(M).realizable:
        return
    T = extract_transducer(M, finite_epsilon_strategy(M, k=4), A.alphabet)
    small = T.minimized()
    for word in itertools.product(range(A.alphabet.n_inputs), repeat=4):
        assert T.outputs(word) == small.outputs(word)
    assert small.sensing_cost() <= T.sensing_cost()


@settings(max_examples=40, deadline=None)
@given(rngs)
def test_class_probabilities_sum_to_one(rng):
    D = random_dpw(rng, sensing=True)
    M = sensing_game(D)
    for v in M.states:
        if M.owner[v] == 2:
            assert sum(M.prob[v].values()) == Fraction(1)
