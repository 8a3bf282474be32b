"""Qualitative game solving.

Player 1 is the even player: a play is won by Player 1 when the largest rank
seen infinitely often is even.  Games are anything exposing ``owner``,
``moves`` and ``rank`` indexed by dense state ids (a :class:`ParityGame` or a
:class:`ParityMDP`, whose probabilities are then ignored).
"""

from __future__ import annotations

import sys
from collections import deque
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, NamedTuple

from .decomposition import EndComponent, sccs
from .mdp import MemorylessStrategy
from .model import ParityGame, ParityMDP, attractor, is_end_component


class NotGEC(ValueError):
    """The component is not a good end component."""


class ParitySolution(NamedTuple):
    W1: frozenset
    W2: frozenset
    sigma1: MemorylessStrategy
    sigma2: MemorylessStrategy


@contextmanager
def _recursion(depth):
    old = sys.getrecursionlimit()
    if depth > old:
        sys.setrecursionlimit(depth)
    try:
        yield
    finally:
        sys.setrecursionlimit(old)


def solve_parity(G, nodes: Iterable[int] | None = None) -> ParitySolution:
    """Zielonka's recursive algorithm with memoryless strategies for both
    players on their winning regions."""
    nodes = frozenset(G.states if nodes is None else nodes)
    with _recursion(4 * len(nodes) + 1000):
        W1, W2, s1, s2 = _zielonka(G, nodes)
    return ParitySolution(frozenset(W1), frozenset(W2),
                          MemorylessStrategy(sorted(s1.items())),
                          MemorylessStrategy(sorted(s2.items())))


def _zielonka(G, nodes):
    if not nodes:
        return set(), set(), {}, {}
    owner = G.owner.__getitem__
    moves = lambda v: G.moves[v].items()
    p = max(G.rank[v] for v in nodes)
    pl = 1 if p % 2 == 0 else 2
    op = 3 - pl
    top = {v for v in nodes if G.rank[v] == p}
    A, strat_a = attractor(nodes, owner, moves, top, pl)
    sub = _zielonka(G, nodes - A)
    win = {1: sub[0], 2: sub[1]}
    strat = {1: sub[2], 2: sub[3]}
    if not win[op]:
        sigma = dict(strat[pl])
        sigma.update(strat_a)
        for v in top:
            if owner(v) == pl:
                sigma[v] = min(a for a, t in G.moves[v].items() if t in nodes)
        res = {pl: (set(nodes), sigma), op: (set(), {})}
    else:
        B, strat_b = attractor(nodes, owner, moves, win[op], op)
        sub2 = _zielonka(G, nodes - B)
        win2 = {1: sub2[0], 2: sub2[1]}
        strat2 = {1: sub2[2], 2: sub2[3]}
        tau = dict(strat[op])
        tau.update(strat_b)
        tau.update(strat2[op])
        res = {pl: (win2[pl], strat2[pl]), op: (win2[op] | B, tau)}
    return res[1][0], res[2][0], res[1][1], res[2][1]


def has_cycle_with_parity(nodes: Iterable[Hashable], succ: Callable, rank: Callable,
                          parity: int) -> bool:
    """Whether the graph has a cycle whose maximal rank has the given parity."""
    nodes = list(nodes)
    for p in sorted({rank(v) for v in nodes if rank(v) % 2 == parity}):
        sub = {v for v in nodes if rank(v) <= p}
        graph = {v: [w for w in succ(v) if w in sub] for v in nodes if v in sub}
        for comp in sccs(graph):
            if not any(rank(v) == p for v in comp):
                continue
            if len(comp) > 1:
                return True
            v = next(iter(comp))
            if v in graph[v]:
                return True
    return False


def has_cycle_avoiding(nodes: Iterable[Hashable], succ: Callable, avoid: Callable) -> bool:
    """Whether some cycle stays entirely outside the nodes flagged by ``avoid``."""
    sub = [v for v in nodes if not avoid(v)]
    keep = set(sub)
    graph = {v: [w for w in succ(v) if w in keep] for v in sub}
    for comp in sccs(graph):
        if len(comp) > 1:
            return True
        v = next(iter(comp))
        if v in graph[v]:
            return True
    return False


def _reachable(starts, succ):
    seen = set(starts)
    queue = deque(starts)
    while queue:
        v = queue.popleft()
        for w in succ(v):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def verify_memoryless_winning(G, sigma: Mapping[int, int], player: int = 1,
                              start: Iterable[int] | None = None) -> bool:
    """Certificate check: every cycle reachable from ``start`` (default: all
    states) in the graph restricted by ``sigma`` is won by ``player``."""
    start = list(G.states if start is None else start)

    def succ(v):
        if G.owner[v] == player:
            return [G.moves[v][sigma[v]]]
        return list(G.moves[v].values())

    nodes = set()
    queue = deque(start)
    nodes.update(start)
    while queue:
        v = queue.popleft()
        if G.owner[v] == player and (v not in sigma or sigma[v] not in G.moves[v]):
            return False
        for w in succ(v):
            if w not in nodes:
                nodes.add(w)
                queue.append(w)
    bad = 1 if player == 1 else 0
    return not has_cycle_with_parity(nodes, succ, G.rank.__getitem__, bad)


@dataclass(eq=False)
class FiniteMemoryStrategy:
    """A Mealy-style strategy with memory ids ``0..size-1``.

    The memory reads every state on arrival: starting in ``s0`` the memory is
    ``next[(s0, init)]``, and moving to ``t`` with memory ``m`` gives
    ``next[(t, m)]``.  At a Player-1 state ``s`` with memory ``m`` the
    strategy plays ``act[(s, m)]``.  Tables are partial: they cover the
    pairs reachable from the states the strategy was built for.
    """

    init: int
    next: dict = field(default_factory=dict)
    act: dict = field(default_factory=dict)
    labels: list = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.labels)

    def start(self, s: int) -> int:
        return self.next[(s, self.init)]

    def update(self, t: int, m: int) -> int:
        return self.next[(t, m)]

    def action(self, s: int, m: int) -> int:
        return self.act[(s, m)]

    @classmethod
    def from_functions(cls, owner: Callable[[int], int],
                       moves: Callable[[int], Iterable[tuple[int, int]]],
                       starts: Iterable[int], init, next_fn: Callable, act_fn: Callable):
        """Tabulate a strategy given by functions over hashable memory labels,
        exploring only the (state, memory) pairs reachable from ``starts``."""
        ids = {init: 0}
        labels = [init]
        nxt, act = {}, {}

        def mem_id(label):
            if label not in ids:
                ids[label] = len(labels)
                labels.append(label)
            return ids[label]

        queue = deque()
        seen = set()
        for s in starts:
            m = mem_id(next_fn(s, init))
            nxt[(s, 0)] = m
            if (s, m) not in seen:
                seen.add((s, m))
                queue.append((s, m))
        while queue:
            s, m = queue.popleft()
            label = labels[m]
            if owner(s) == 1:
                a = act_fn(s, label)
                act[(s, m)] = a
                targets = [t for b, t in moves(s) if b == a]
                if not targets:
                    raise ValueError(f"strategy plays unavailable action {a} at state {s}")
            else:
                targets = sorted({t for _, t in moves(s)})
            for t in targets:
                m2 = mem_id(next_fn(t, label))
                nxt[(t, m)] = m2
                if (t, m2) not in seen:
                    seen.add((t, m2))
                    queue.append((t, m2))
        return cls(0, nxt, act, labels)

    @classmethod
    def memoryless(cls, owner, moves, starts, choice: Mapping[int, int]):
        return cls.from_functions(owner, moves, starts, None,
                                  lambda t, m: None, lambda s, m: choice[s])

    def to_json(self, name=str, action_name=str) -> dict:
        return {
            "memory": self.size,
            "init": self.init,
            "next": [[name(s), m, m2] for (s, m), m2 in sorted(self.next.items())],
            "act": [[name(s), m, action_name(a)] for (s, m), a in sorted(self.act.items())],
        }

    @classmethod
    def from_json(cls, doc, state_id=int, action_id=int):
        size = int(doc["memory"])
        nxt = {(state_id(s), int(m)): int(m2) for s, m, m2 in doc["next"]}
        act = {(state_id(s), int(m)): action_id(a) for s, m, a in doc["act"]}
        init = int(doc["init"])
        for m in [init, *(k[1] for k in nxt), *nxt.values(), *(k[1] for k in act)]:
            if not 0 <= m < size:
                raise ValueError(f"memory value {m} outside 0..{size - 1}")
        return cls(init, nxt, act, list(range(size)))


def strategy_product(G, f: FiniteMemoryStrategy, start: Iterable[int],
                     moves: Callable | None = None):
    """Reachable (state, memory) nodes of ``G`` under ``f`` and their
    successor lists.  Player-2 branching stays nondeterministic.  Returns
    ``None`` when ``f`` is undefined somewhere it is needed."""
    moves = moves or (lambda v: G.moves[v].items())
    succ: dict[tuple[int, int], list[tuple[int, int]]] = {}
    queue = deque()
    for s in start:
        key = (s, f.init)
        if key not in f.next:
            return None
        node = (s, f.next[key])
        if node not in succ:
            succ[node] = None
            queue.append(node)
    while queue:
        node = queue.popleft()
        s, m = node
        if G.owner[s] == 1:
            a = f.act.get(node)
            targets = [t for b, t in moves(s) if b == a]
            if not targets:
                return None
        else:
            targets = sorted({t for _, t in moves(s)})
        out = []
        for t in targets:
            if (t, m) not in f.next:
                return None
            nxt = (t, f.next[(t, m)])
            out.append(nxt)
            if nxt not in succ:
                succ[nxt] = None
                queue.append(nxt)
        succ[node] = out
    return succ


def verify_finite_memory_winning(G, f: FiniteMemoryStrategy, start: Iterable[int],
                                 accepting: Iterable[int] | None = None,
                                 moves: Callable | None = None) -> bool:
    """Every play from ``start`` consistent with ``f`` satisfies parity (and
    visits ``accepting`` infinitely often when given)."""
    succ = strategy_product(G, f, start, moves)
    if succ is None:
        return False
    rank = lambda v: G.rank[v[0]]
    if has_cycle_with_parity(succ, succ.__getitem__, rank, 1):
        return False
    if accepting is not None:
        acc = set(accepting)
        if has_cycle_avoiding(succ, succ.__getitem__, lambda v: v[0] in acc):
            return False
    return True


@dataclass(frozen=True, eq=False)
class ParityBuchiGame:
    game: ParityGame
    accepting: frozenset

    @property
    def states(self):
        return self.game.states

    @property
    def owner(self):
        return self.game.owner

    @property
    def moves(self):
        return self.game.moves

    @property
    def rank(self):
        return self.game.rank


def solve_parity_buchi(GB: ParityBuchiGame) -> tuple[frozenset, FiniteMemoryStrategy]:
    """Winning region and a finite-memory winning strategy for parity and
    Büchi together.

    The game is multiplied with a memory holding the largest rank seen since
    the last accepting visit.  Accepting states emit a priority encoding that
    maximum (same parity, order preserving), all other states emit 1, and the
    product is solved as a plain parity game.
    """
    G = GB.game
    acc = GB.accepting
    ranks = sorted(set(G.rank))

    def mem_after(prev_mem, prev_state, t):
        base = -1 if prev_state is None or prev_state in acc else prev_mem
        return max(base, G.rank[t])

    index: dict[tuple[int, int], int] = {}
    nodes: list[tuple[int, int]] = []
    for s in G.states:
        for r in ranks:
            if r >= G.rank[s]:
                index[(s, r)] = len(nodes)
                nodes.append((s, r))
    owner, moves, prio = [], [], []
    for s, r in nodes:
        owner.append(G.owner[s])
        moves.append({a: index[(t, mem_after(r, s, t))] for a, t in G.moves[s].items()})
        if s in acc:
            prio.append(2 * r + 2 if r % 2 == 0 else 2 * r + 1)
        else:
            prio.append(1)
    P = ParityGame(tuple(owner), tuple(moves), tuple(prio))
    sol = solve_parity(P)
    W1 = frozenset(s for s in G.states if index[(s, G.rank[s])] in sol.W1)

    def next_fn(t, label):
        r, prev = label
        return (mem_after(r, prev, t), t)

    def act_fn(s, label):
        return sol.sigma1[index[(s, label[0])]]

    f = FiniteMemoryStrategy.from_functions(
        G.owner.__getitem__, lambda v: G.moves[v].items(), sorted(W1),
        (-1, None), next_fn, act_fn)
    return W1, f


def _gec_check(M: ParityMDP, C) -> EndComponent:
    comp = C if isinstance(C, EndComponent) else EndComponent.of(M, C)
    if not is_end_component(M, comp.states) or comp.max_rank % 2 == 1:
        raise NotGEC(f"{sorted(comp.states)} is not a good end component")
    return comp


def build_sgec_gadget(M: ParityMDP, C) -> ParityBuchiGame:
    """Parity-Büchi game deciding whether ``C`` is super good.

    States of ``C`` come first, in increasing order of their ids in ``M``;
    each Player-2 state outside the top-even set is followed by its two
    gadget copies.  ``labels[v]`` is ``("state", s)``, ``("s1", s)`` or
    ``("s2", s)`` with ``s`` an id of ``M``.  The copy ``s1`` belongs to
    Player 1 and only offers positive-probability actions; ``s2`` belongs to
    Player 2, offers every action inside ``C`` and is accepting.
    """
    comp = _gec_check(M, C)
    inside = sorted(comp.states)
    top = comp.max_even_above_odd
    gadgets = [s for s in inside if M.owner[s] == 2 and s not in top]
    node = {s: i for i, s in enumerate(inside)}
    labels = [("state", s) for s in inside]
    copies = {}
    for s in gadgets:
        copies[s] = (len(labels), len(labels) + 1)
        labels += [("s1", s), ("s2", s)]
    fresh = 1 + max((a for s in M.states for a in M.moves[s]), default=-1)
    to_s1, to_s2, loop = fresh, fresh + 1, fresh + 2
    owner, moves, rank = [], [], []
    accepting = set()
    for i, (kind, s) in enumerate(labels):
        in_c = {a: node[t] for a, t in M.moves[s].items() if t in comp.states}
        if kind == "state":
            owner.append(M.owner[s])
            rank.append(M.rank[s])
            if s in top:
                moves.append({loop: i})
                accepting.add(i)
            elif s in copies:
                moves.append({to_s1: copies[s][0], to_s2: copies[s][1]})
            else:
                moves.append(in_c)
        elif kind == "s1":
            owner.append(1)
            rank.append(0)
            moves.append({a: v for a, v in in_c.items() if M.prob[s].get(a, 0) > 0})
        else:
            owner.append(2)
            rank.append(0)
            moves.append(in_c)
            accepting.add(i)
    names = tuple(M.name(s) if k == "state" else f"{M.name(s)}#{k[1]}" for k, s in labels)
    action_names = dict(M.action_names)
    action_names.update({to_s1: "#s1", to_s2: "#s2", loop: "#sink"})
    game = ParityGame(tuple(owner), tuple(moves), tuple(rank), None, names,
                      action_names, tuple(labels))
    return ParityBuchiGame(game, frozenset(accepting))


class SuperGood(NamedTuple):
    is_sgec: bool
    states: frozenset
    witness: FiniteMemoryStrategy | None


def super_good_states(M: ParityMDP, C) -> SuperGood:
    """Decide whether ``C`` is super good and return its super-good states.

    The witness (present when ``C`` is super good) is a strategy over the
    state ids of ``M`` that stays in ``C``.  It replays the gadget-game
    strategy, reading every stochastic outcome as the Player-1 branch when
    that branch would have produced it, and restarts after each visit to the
    top-even states.
    """
    comp = C if isinstance(C, EndComponent) else EndComponent.of(M, C)
    if comp.max_rank % 2 == 1:
        return SuperGood(False, frozenset(), None)
    GB = build_sgec_gadget(M, comp)
    W1, sigma = solve_parity_buchi(GB)
    labels = GB.game.labels
    winning = frozenset(labels[v][1] for v in W1 if labels[v][0] == "state")
    if winning != comp.states:
        return SuperGood(False, winning, None)
    witness = lift_gadget_strategy(M, comp, GB, sigma)
    return SuperGood(True, winning, witness)


def lift_gadget_strategy(M: ParityMDP, comp: EndComponent, GB: ParityBuchiGame,
                         sigma: FiniteMemoryStrategy) -> FiniteMemoryStrategy:
    labels = GB.game.labels
    node = {s: v for v, (k, s) in enumerate(labels) if k == "state"}
    copies = {}
    for v, (k, s) in enumerate(labels):
        if k != "state":
            copies.setdefault(s, [None, None])[0 if k == "s1" else 1] = v
    top = comp.max_even_above_odd
    inside = comp.states
    restart = "restart"

    def next_fn(t, label):
        if label is None or label[0] == restart:
            return (sigma.start(node[t]), t)
        g, s = label
        if s in top:
            return (sigma.start(node[t]), t)
        if s in copies:
            v1, v2 = copies[s]
            g1 = sigma.next.get((v1, g))
            if g1 is not None and GB.game.moves[v1].get(sigma.act.get((v1, g1))) == node[t]:
                return (sigma.next[(node[t], g1)], t)
            g2 = sigma.next[(v2, g)]
            return (sigma.next[(node[t], g2)], t)
        return (sigma.next[(node[t], g)], t)

    def act_fn(s, label):
        if s in top:
            return min(a for a, t in M.moves[s].items() if t in inside)
        return sigma.act[(node[s], label[0])]

    return FiniteMemoryStrategy.from_functions(
        M.owner.__getitem__,
        lambda v: [(a, t) for a, t in M.moves[v].items() if t in inside],
        sorted(inside), None, next_fn, act_fn)


def check_sgec_witness(M: ParityMDP, C, f: FiniteMemoryStrategy) -> bool:
    """The two witness clauses on the product of ``M`` restricted to ``C``
    with ``f``: the top-even states are reached with probability one, and
    every play avoiding them forever satisfies parity."""
    comp = C if isinstance(C, EndComponent) else EndComponent.of(M, C)
    inside = comp.states
    top = comp.max_even_above_odd
    moves = lambda v: [(a, t) for a, t in M.moves[v].items() if t in inside]
    succ = strategy_product(M, f, sorted(inside), moves)
    if succ is None:
        return False
    # parity on plays that avoid the top-even states
    avoid = {v: [w for w in ws if w[0] not in top] for v, ws in succ.items() if v[0] not in top}
    if has_cycle_with_parity(avoid, avoid.__getitem__, lambda v: M.rank[v[0]], 1):
        return False
    # almost-sure reachability: in the chain (positive-probability edges) every
    # node that can be reached can still reach the target
    pos = {}
    for v in succ:
        s, m = v
        if M.owner[s] == 1:
            pos[v] = succ[v]
        else:
            good = {t for a, t in moves(s) if M.prob[s].get(a, 0) > 0}
            pos[v] = [w for w in succ[v] if w[0] in good]
    starts = [(s, f.start(s)) for s in sorted(inside)]
    reach = _reachable(starts, lambda v: [] if v[0] in top else pos[v])
    rev = {v: [] for v in succ}
    for v, ws in pos.items():
        for w in ws:
            rev[w].append(v)
    can = _reachable([v for v in succ if v[0] in top], lambda v: rev[v])
    return reach <= can
