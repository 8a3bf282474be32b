"""Parity and parity-Büchi solvers, super-good end components."""

import random

import pytest

import oracles
from generators import random_arena, random_game
from paritymdp.decomposition import max_gecs
from paritymdp.games import (FiniteMemoryStrategy, NotGEC, ParityBuchiGame, build_sgec_gadget,
                             check_sgec_witness, has_cycle_with_parity, solve_parity,
                             solve_parity_buchi, super_good_states, verify_finite_memory_winning,
                             verify_memoryless_winning)
from paritymdp.model import ParityGame
from paritymdp.surecost import prune_to_sure_winning


def test_solve_parity_matches_enumeration():
    rng = random.Random(31)
    for _ in range(150):
        G = random_game(rng)
        sol = solve_parity(G)
        assert sol.W1 == oracles.parity_winners(G.owner, G.moves, G.rank, 1)
        assert sol.W2 == oracles.parity_winners(G.owner, G.moves, G.rank, 2)
        assert sol.W1 | sol.W2 == set(G.states) and not sol.W1 & sol.W2
        assert verify_memoryless_winning(G, sol.sigma1, 1, sol.W1)
        assert verify_memoryless_winning(G, sol.sigma2, 2, sol.W2)


def test_verify_memoryless_rejects_losing_choice():
    # Player 1 at 0 may loop on odd 1 or move to the even sink 1
    G = ParityGame((1, 1), ({0: 0, 1: 1}, {0: 1}), (1, 2), 0)
    assert verify_memoryless_winning(G, {0: 1, 1: 0}, 1, [0])
    assert not verify_memoryless_winning(G, {0: 0, 1: 0}, 1, [0])


def test_cycle_with_parity():
    succ = {0: [1], 1: [0], 2: [2]}.__getitem__
    rank = {0: 1, 1: 2, 2: 3}.__getitem__
    assert has_cycle_with_parity([0, 1], succ, rank, 0)
    assert not has_cycle_with_parity([0, 1], succ, rank, 1)
    assert has_cycle_with_parity([2], succ, rank, 1)


def test_parity_buchi_matches_enumeration():
    rng = random.Random(32)
    for _ in range(150):
        G = random_game(rng)
        acc = frozenset(v for v in G.states if rng.random() < 0.4)
        W1, f = solve_parity_buchi(ParityBuchiGame(G, acc))
        assert W1 == oracles.parity_buchi_winners(G.owner, G.moves, G.rank, acc)
        assert verify_finite_memory_winning(G, f, sorted(W1), acc)


def test_finite_memory_json_round_trip():
    rng = random.Random(33)
    G = random_game(rng)
    while True:
        acc = frozenset(G.states)
        W1, f = solve_parity_buchi(ParityBuchiGame(G, acc))
        if W1:
            break
        G = random_game(rng)
    g = FiniteMemoryStrategy.from_json(f.to_json())
    assert (g.init, g.next, g.act) == (f.init, f.next, f.act)


def test_fig1_component_is_good_but_not_super_good(fig1):
    C = frozenset({0, 2, 3})
    GB = build_sgec_gadget(fig1, C)
    kinds = [k for k, _ in GB.game.labels]
    assert kinds.count("s1") == kinds.count("s2") == 1
    sg = super_good_states(fig1, C)
    assert not sg.is_sgec and sg.witness is None
    assert super_good_states(fig1, {1}).is_sgec


def test_gadget_rejects_non_gec(fig1):
    with pytest.raises(NotGEC):
        build_sgec_gadget(fig1, {0})


def test_super_good_decision_matches_oracle_gadget():
    rng = random.Random(34)
    checked = 0
    for _ in range(150):
        M = random_arena(rng, motif=0.3)
        for comp in max_gecs(M):
            sg = super_good_states(M, comp)
            assert sg.is_sgec == oracles.is_sgec(M, comp.states)
            if sg.is_sgec:
                assert check_sgec_witness(M, comp, sg.witness)
            checked += 1
    assert checked > 100


def test_witness_check_rejects_bad_strategy(fig1):
    # always loop at q0: never reaches the top-even state
    C = frozenset({0, 2, 3})
    f = FiniteMemoryStrategy.from_functions(
        fig1.owner.__getitem__, lambda v: [(a, t) for a, t in fig1.moves[v].items() if t in C],
        sorted(C), None, lambda t, m: 0, lambda s, m: 0)
    assert not check_sgec_witness(fig1, C, f)


def test_pruning_keeps_winning_region():
    rng = random.Random(35)
    for _ in range(80):
        M = random_arena(rng)
        P, removed = prune_to_sure_winning(M)
        W1 = oracles.parity_winners(M.owner, M.moves, M.rank, 1)
        assert removed == set(M.states) - W1
        if P is not None:
            assert set(P.origin) == W1
