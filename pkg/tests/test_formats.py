"""JSON reading and writing of arenas and automata."""

import json
import random
from fractions import Fraction

import pytest

from conftest import FIXTURES, load_doc
from generators import random_arena
from paritymdp.formats import (FormatError, arena_from_json, arena_to_json, fraction_str,
                               parse_fraction)
from paritymdp.synthesis import automaton_from_json, automaton_to_json


def same_arena(M, N):
    return (M.owner, M.moves, M.prob, M.cost, M.rank, M.initial, M.max_rank, M.state_names) == \
        (N.owner, N.moves, N.prob, N.cost, N.rank, N.initial, N.max_rank, N.state_names)


def same_automaton(A, B):
    fields = ("states", "initial", "delta")
    extra = "rank" if hasattr(A, "rank") else "accepting"
    return all(getattr(A, f) == getattr(B, f) for f in fields + (extra,)) and \
        A.alphabet == B.alphabet


@pytest.mark.parametrize("text, value", [
    (3, Fraction(3)), ("3", Fraction(3)), ("2/6", Fraction(1, 3)), ("-1/2", Fraction(-1, 2)),
    (" 4 / 8 ", Fraction(1, 2)),
])
def test_parse_fraction(text, value):
    assert parse_fraction(text) == value


@pytest.mark.parametrize("bad", [0.5, "0.5", "1/0", True, None, "x"])
def test_parse_fraction_rejects(bad):
    with pytest.raises(FormatError):
        parse_fraction(bad)


def test_fraction_str():
    assert fraction_str(Fraction(4, 2)) == "2"
    assert fraction_str(Fraction(-3, 6)) == "-1/2"


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_fixture_round_trip(name):
    doc = load_doc(name)
    if doc.get("kind") == "oracle-seeds":
        return
    if doc.get("kind") == "penalties":
        parts = [doc["specification"]] + [m["automaton"] for m in doc["monitors"]]
        for part in parts:
            A = automaton_from_json(part)
            assert same_automaton(A, automaton_from_json(automaton_to_json(A)))
    elif doc.get("kind"):
        A = automaton_from_json(doc)
        assert same_automaton(A, automaton_from_json(automaton_to_json(A)))
    else:
        M = arena_from_json(doc)
        again = arena_from_json(json.loads(json.dumps(arena_to_json(M))))
        assert same_arena(M, again)


def test_random_arena_round_trip():
    rng = random.Random(5)
    for _ in range(50):
        M = random_arena(rng)
        doc = arena_to_json(M)
        N = arena_from_json(doc)
        assert (N.owner, N.moves, N.prob, N.cost, N.rank) == (M.owner, M.moves, M.prob, M.cost, M.rank)
        assert arena_to_json(N) == doc


@pytest.mark.parametrize("doc", [
    [],
    {"states": []},
    {"states": [{"id": "a", "owner": 3, "cost": 0, "rank": 0}], "initial": "a",
     "transitions": [{"from": "a", "action": "x", "to": "a"}]},
    {"states": [{"id": "a", "owner": 1, "cost": 0.5, "rank": 0}], "initial": "a",
     "transitions": [{"from": "a", "action": "x", "to": "a"}]},
    {"states": [{"id": "a", "owner": 1, "cost": 0, "rank": 0}], "initial": "b",
     "transitions": [{"from": "a", "action": "x", "to": "a"}]},
    {"states": [{"id": "a", "owner": 1, "cost": 0, "rank": 0}], "initial": "a",
     "transitions": [{"from": "a", "action": "x", "to": "zz"}]},
])
def test_malformed_arenas(doc):
    with pytest.raises(FormatError):
        arena_from_json(doc)


def test_automaton_requires_totality():
    doc = {"kind": "dpw", "inputs": ["a"], "outputs": [], "initial": "q",
           "states": [{"id": "q", "rank": 0}],
           "transitions": [{"from": "q", "when": {"a": True}, "to": "q"}]}
    with pytest.raises(FormatError):
        automaton_from_json(doc)
    doc["transitions"].append({"from": "q", "when": {}, "to": "q"})
    assert automaton_from_json(doc).n == 1
