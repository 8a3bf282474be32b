"""Maximal end components and maximal GECs against subset enumeration."""

import random

import oracles
from generators import random_arena
from paritymdp.decomposition import (GEC, EndComponent, max_end_components, max_gecs, sccs,
                                     support_graph)


def test_sccs_partition_and_order():
    graph = {0: [1], 1: [0, 2], 2: [3], 3: [2], 4: []}
    comps = sccs(graph)
    assert sorted(map(sorted, comps)) == [[0, 1], [2, 3], [4]]


def test_end_component_profile(fig1):
    C = EndComponent.of(fig1, {0, 2, 3})
    assert C.max_rank == 2 and C.max_odd_rank == 1
    assert C.max_even_above_odd == {3}
    assert C.max_rank_states == {3}


def test_mecs_match_enumeration():
    rng = random.Random(21)
    for _ in range(150):
        M = random_arena(rng, motif=0.2)
        got = {c.states for c in max_end_components(M)}
        assert got == oracles.max_ecs(M)


def test_max_gecs_match_enumeration():
    rng = random.Random(22)
    for _ in range(150):
        M = random_arena(rng, motif=0.2)
        comps = max_gecs(M)
        assert {c.states for c in comps} == oracles.max_gecs(M)
        assert all(c.kind == GEC and c.max_rank % 2 == 0 for c in comps)


def test_support_graph_ignores_zero_probability(fig1):
    g = support_graph(fig1)
    assert set(g) == set(fig1.states)
    assert set(g[2]) == {0, 3}


def test_fig1_gec(fig1):
    assert [c.states for c in max_gecs(fig1)] == [frozenset({0, 2, 3}), frozenset({1})]
