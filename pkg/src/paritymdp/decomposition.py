"""Strongly connected components, maximal end components and maximal GECs."""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Mapping

from .model import ParityMDP, attractor

EC, GEC, SGEC = "EC", "GEC", "SGEC"


@dataclass(frozen=True)
class EndComponent:
    """A state set of an arena together with its rank profile.

    ``max_odd_rank`` is -1 when no state of the component has an odd rank;
    ``max_even_above_odd`` holds the even-ranked states whose rank exceeds
    ``max_odd_rank``.
    """

    states: frozenset[int]
    kind: str
    max_rank: int
    max_rank_states: frozenset[int]
    max_odd_rank: int
    max_even_above_odd: frozenset[int]
    value: Fraction | None = None

    @classmethod
    def of(cls, M: ParityMDP, states: Iterable[int], kind: str = EC, value=None) -> "EndComponent":
        states = frozenset(states)
        if not states:
            raise ValueError("an end component is nonempty")
        top = max(M.rank[s] for s in states)
        odd = max((M.rank[s] for s in states if M.rank[s] % 2 == 1), default=-1)
        return cls(
            states=states,
            kind=kind,
            max_rank=top,
            max_rank_states=frozenset(s for s in states if M.rank[s] == top),
            max_odd_rank=odd,
            max_even_above_odd=frozenset(
                s for s in states if M.rank[s] % 2 == 0 and M.rank[s] > odd),
            value=value,
        )

    def with_value(self, value) -> "EndComponent":
        return replace(self, value=value)

    def with_kind(self, kind: str) -> "EndComponent":
        return replace(self, kind=kind)

    def __len__(self):
        return len(self.states)

    def __contains__(self, s):
        return s in self.states

    def __iter__(self):
        return iter(sorted(self.states))


def sccs(graph: Mapping[int, Iterable[int]]) -> list[set[int]]:
    """Tarjan's algorithm, iterative.

    ``graph`` maps each node to its successors; successors absent from the
    mapping are ignored.  Components come out in reverse topological order
    (sinks first), and the order is fixed by the iteration order of
    ``graph`` and its successor lists.
    """
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    out: list[set[int]] = []
    counter = 0
    for root in graph:
        if root in index:
            continue
        work = [(root, iter(graph[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in graph:
                    continue
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(graph[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def support_graph(M: ParityMDP, nodes: Iterable[int] | None = None) -> dict[int, list[int]]:
    """Edges of the MDP view (positive-probability ones for Player 2)
    restricted to ``nodes``."""
    nodes = list(M.states) if nodes is None else sorted(nodes)
    keep = set(nodes)
    return {s: sorted(t for t in M.support(s) if t in keep) for s in nodes}


def end_component_sets(M: ParityMDP, nodes: Iterable[int] | None = None) -> list[frozenset[int]]:
    """Maximal end components of ``M`` inside ``nodes``, as plain sets.

    Iterative SCC refinement: a state is dropped when the environment can
    push the play out of its SCC with positive probability, or when
    Player 1 cannot stay inside it.
    """
    pending = [set(M.states) if nodes is None else set(nodes)]
    found: list[frozenset[int]] = []
    while pending:
        cand = pending.pop()
        for comp in sccs(support_graph(M, cand)):
            bad = {s for s in comp
                   if M.owner[s] == 2 and not M.support(s) <= comp}
            attr, _ = attractor(comp, M.owner.__getitem__, M.stochastic_moves, bad, player=2)
            rest = comp - attr
            if not attr:
                found.append(frozenset(comp))
            elif rest:
                pending.append(rest)
    return sorted(found, key=min)


def max_end_components(M: ParityMDP, nodes: Iterable[int] | None = None) -> list[EndComponent]:
    return [EndComponent.of(M, c, EC) for c in end_component_sets(M, nodes)]


def max_gecs(M: ParityMDP, nodes: Iterable[int] | None = None) -> list[EndComponent]:
    """Maximal end components whose maximal rank is even.

    Components with odd maximal rank lose the environment attractor of their
    top-ranked states (computed inside the component) and the remainder is
    decomposed again.
    """
    pending = [set(M.states) if nodes is None else set(nodes)]
    found: list[EndComponent] = []
    while pending:
        cand = pending.pop()
        for comp in end_component_sets(M, cand):
            ec = EndComponent.of(M, comp, GEC)
            if ec.max_rank % 2 == 0:
                found.append(ec)
                continue
            attr, _ = attractor(comp, M.owner.__getitem__, M.stochastic_moves,
                                ec.max_rank_states, player=2)
            rest = set(comp) - attr
            if rest:
                pending.append(rest)
    return sorted(found, key=lambda c: min(c.states))
