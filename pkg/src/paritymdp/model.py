"""Parity-MDP arenas, their projections, restriction and attractors.

States and actions are dense nonnegative integers.  Human-readable names
live in side tables (``state_names``, ``action_names``) and are only used
for reporting.  All probabilities are :class:`fractions.Fraction`.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping


class ArenaError(Exception):
    """Base class for structural errors on arenas."""


class NotClosed(ArenaError):
    """A Player-2 state has a positive-probability edge leaving the subset."""


class EmptyActions(ArenaError):
    """A Player-1 state loses every action when restricting."""


@dataclass(frozen=True)
class Diagnostic:
    state: int | None
    action: int | None
    message: str

    def __str__(self):
        where = []
        if self.state is not None:
            where.append(f"state {self.state}")
        if self.action is not None:
            where.append(f"action {self.action}")
        prefix = ", ".join(where)
        return f"{prefix}: {self.message}" if prefix else self.message


@dataclass(frozen=True, eq=False)
class ParityMDP:
    """A parity-MDP over states ``0..n-1``.

    ``moves[s]`` maps each available action to its successor.  ``prob[s]``
    is empty for Player-1 states and maps actions to exact probabilities for
    Player-2 states.  ``origin`` records parent state ids when the arena was
    produced by :func:`restrict`; ``labels`` carries construction-specific
    state descriptors (used by the synthesis front-ends).
    """

    owner: tuple[int, ...]
    moves: tuple[Mapping[int, int], ...]
    prob: tuple[Mapping[int, Fraction], ...]
    cost: tuple[Fraction | int, ...]
    rank: tuple[int, ...]
    initial: int | None
    max_rank: int | None = None
    state_names: tuple[str, ...] = ()
    action_names: Mapping[int, str] = field(default_factory=dict)
    origin: tuple[int, ...] | None = None
    labels: tuple | None = None

    @property
    def n(self) -> int:
        return len(self.owner)

    @property
    def states(self) -> range:
        return range(len(self.owner))

    @property
    def states1(self) -> frozenset[int]:
        return frozenset(s for s, o in enumerate(self.owner) if o == 1)

    @property
    def states2(self) -> frozenset[int]:
        return frozenset(s for s, o in enumerate(self.owner) if o == 2)

    @property
    def d(self) -> int:
        """Declared maximal rank, or the largest rank present."""
        if self.max_rank is not None:
            return self.max_rank
        return max(self.rank, default=0)

    def actions(self, s: int) -> list[int]:
        return sorted(self.moves[s])

    def support(self, s: int) -> set[int]:
        """Successors that matter stochastically: all for Player 1,
        positive-probability ones for Player 2."""
        if self.owner[s] == 1:
            return set(self.moves[s].values())
        p = self.prob[s]
        return {t for a, t in self.moves[s].items() if p.get(a, 0) > 0}

    def stochastic_moves(self, s: int) -> list[tuple[int, int]]:
        """(action, successor) pairs in the MDP view, sorted by action."""
        if self.owner[s] == 1:
            return sorted(self.moves[s].items())
        p = self.prob[s]
        return sorted((a, t) for a, t in self.moves[s].items() if p.get(a, 0) > 0)

    def name(self, s: int) -> str:
        if self.state_names:
            return self.state_names[s]
        return str(s)

    def state_id(self, name: str) -> int:
        return self.state_names.index(name)

    def ids(self, names: Iterable[str]) -> set[int]:
        return {self.state_id(x) for x in names}

    def max_cost(self):
        return max(self.cost, default=0)

    def with_costs(self, cost: Iterable, rank: Iterable[int] | None = None) -> "ParityMDP":
        cost = tuple(cost)
        rank = tuple(rank) if rank is not None else self.rank
        return ParityMDP(self.owner, self.moves, self.prob, cost, rank, self.initial,
                         self.max_rank if rank is self.rank else None,
                         self.state_names, self.action_names, self.origin, self.labels)


@dataclass(frozen=True, eq=False)
class ParityGame:
    """The arena of a parity-MDP with probabilities and costs forgotten."""

    owner: tuple[int, ...]
    moves: tuple[Mapping[int, int], ...]
    rank: tuple[int, ...]
    initial: int | None = None
    state_names: tuple[str, ...] = ()
    action_names: Mapping[int, str] = field(default_factory=dict)
    labels: tuple | None = None

    @property
    def n(self) -> int:
        return len(self.owner)

    @property
    def states(self) -> range:
        return range(len(self.owner))

    def actions(self, s: int) -> list[int]:
        return sorted(self.moves[s])

    def name(self, s: int) -> str:
        return self.state_names[s] if self.state_names else str(s)


@dataclass(frozen=True, eq=False)
class MdpView:
    """The arena of a parity-MDP with ranks forgotten."""

    owner: tuple[int, ...]
    moves: tuple[Mapping[int, int], ...]
    prob: tuple[Mapping[int, Fraction], ...]
    cost: tuple[Fraction | int, ...]
    initial: int | None = None
    state_names: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return len(self.owner)

    @property
    def states(self) -> range:
        return range(len(self.owner))

    def actions(self, s: int) -> list[int]:
        return sorted(self.moves[s])

    def support(self, s: int) -> set[int]:
        return ParityMDP.support(self, s)

    def stochastic_moves(self, s: int) -> list[tuple[int, int]]:
        return ParityMDP.stochastic_moves(self, s)


def project_game(M: ParityMDP) -> ParityGame:
    return ParityGame(M.owner, M.moves, M.rank, M.initial, M.state_names,
                      M.action_names, M.labels)


def project_mdp(M: ParityMDP) -> MdpView:
    return MdpView(M.owner, M.moves, M.prob, M.cost, M.initial, M.state_names)


def validate(M: ParityMDP) -> list[Diagnostic]:
    """Check every arena invariant; an empty list means the arena is valid."""
    out: list[Diagnostic] = []
    n = M.n
    if M.initial is None or not 0 <= M.initial < n:
        out.append(Diagnostic(None, None, f"initial state {M.initial} is not a state"))
    for s in range(n):
        owner = M.owner[s]
        if owner not in (1, 2):
            out.append(Diagnostic(s, None, f"owner {owner} is not 1 or 2"))
            continue
        moves = M.moves[s]
        if not moves:
            out.append(Diagnostic(s, None, "no available action"))
        for a, t in sorted(moves.items()):
            if not 0 <= t < n:
                out.append(Diagnostic(s, a, f"successor {t} is not a state"))
        probs = M.prob[s]
        if owner == 1:
            if probs:
                out.append(Diagnostic(s, None, "Player-1 state carries probabilities"))
        else:
            for a in sorted(probs):
                if a not in moves:
                    out.append(Diagnostic(s, a, "probability on an unavailable action"))
                elif not 0 <= probs[a] <= 1:
                    out.append(Diagnostic(s, a, f"probability {probs[a]} outside [0,1]"))
            for a in sorted(moves):
                if a not in probs:
                    out.append(Diagnostic(s, a, "missing probability"))
            total = sum((Fraction(p) for a, p in probs.items() if a in moves), Fraction(0))
            if moves and total != 1:
                out.append(Diagnostic(s, None, f"probability sum {total} != 1"))
        if M.cost[s] < 0:
            out.append(Diagnostic(s, None, f"negative cost {M.cost[s]}"))
        r = M.rank[s]
        if r < 0:
            out.append(Diagnostic(s, None, f"negative rank {r}"))
        elif M.max_rank is not None and r > M.max_rank:
            out.append(Diagnostic(s, None, f"rank {r} exceeds declared maximum {M.max_rank}"))
    return out


def restrict(M: ParityMDP, U: Iterable[int], s: int) -> ParityMDP:
    """The arena ``M`` restricted to ``U`` with initial state ``s``.

    States are renumbered in increasing order of their ids in ``M``;
    ``origin`` maps new ids back to ids of ``M``.
    """
    keep = sorted(set(U))
    if s not in set(keep):
        raise ValueError(f"initial state {s} not in the subset")
    index = {old: new for new, old in enumerate(keep)}
    moves, prob = [], []
    for old in keep:
        if M.owner[old] == 2:
            p = M.prob[old]
            for a, t in M.moves[old].items():
                if t not in index and p.get(a, 0) > 0:
                    raise NotClosed(f"state {M.name(old)} leaves the subset with "
                                    f"probability {p[a]} via action {a}")
        mv = {a: index[t] for a, t in M.moves[old].items() if t in index}
        if not mv:
            raise EmptyActions(f"state {M.name(old)} has no action inside the subset")
        moves.append(mv)
        if M.owner[old] == 2:
            prob.append({a: M.prob[old][a] for a in mv if a in M.prob[old]})
        else:
            prob.append({})
    return ParityMDP(
        owner=tuple(M.owner[x] for x in keep),
        moves=tuple(moves),
        prob=tuple(prob),
        cost=tuple(M.cost[x] for x in keep),
        rank=tuple(M.rank[x] for x in keep),
        initial=index[s],
        max_rank=M.max_rank,
        state_names=tuple(M.state_names[x] for x in keep) if M.state_names else (),
        action_names=M.action_names,
        origin=tuple(keep),
        labels=tuple(M.labels[x] for x in keep) if M.labels else None,
    )


def attractor(nodes: Iterable[int], owner: Callable[[int], int],
              moves: Callable[[int], Iterable[tuple[int, int]]],
              target: Iterable[int], player: int) -> tuple[set[int], dict[int, int]]:
    """Least fixpoint of ``player``'s attractor to ``target`` inside ``nodes``.

    ``moves(s)`` yields the (action, successor) pairs considered for ``s``;
    successors outside ``nodes`` are ignored.  A state of ``player`` joins
    when some move enters the set, any other state when all of its moves do.
    Returns the attractor and, for attracted states of ``player`` outside
    the target, a move realizing the attraction.  Linear in the edges.
    """
    nodes = set(nodes)
    attr = set(target) & nodes
    preds: dict[int, list[tuple[int, int]]] = {}
    count: dict[int, int] = {}
    for s in sorted(nodes):
        seen = set()
        for a, t in sorted(moves(s)):
            if t not in nodes:
                continue
            if owner(s) == player:
                preds.setdefault(t, []).append((s, a))
            elif t not in seen:
                preds.setdefault(t, []).append((s, a))
            seen.add(t)
        count[s] = len(seen)
    strategy: dict[int, int] = {}
    queue = deque(sorted(attr))
    # opponent states with no move inside ``nodes`` are vacuously forced
    for s in sorted(nodes - attr):
        if owner(s) != player and count[s] == 0:
            attr.add(s)
            queue.append(s)
    while queue:
        t = queue.popleft()
        for s, a in preds.get(t, ()):
            if s in attr:
                continue
            if owner(s) == player:
                attr.add(s)
                strategy[s] = a
                queue.append(s)
            else:
                count[s] -= 1
                if count[s] == 0:
                    attr.add(s)
                    queue.append(s)
    return attr, strategy


def env_attractor(M: ParityMDP, R: Iterable[int], within: Iterable[int] | None = None) -> set[int]:
    """States from which the environment reaches ``R`` with positive probability."""
    nodes = M.states if within is None else within
    attr, _ = attractor(nodes, M.owner.__getitem__, M.stochastic_moves, R, player=2)
    return attr


def sys_attractor(M: ParityMDP, R: Iterable[int], within: Iterable[int] | None = None) -> set[int]:
    """States from which Player 1 surely reaches ``R``."""
    nodes = M.states if within is None else within
    attr, _ = attractor(nodes, M.owner.__getitem__, M.stochastic_moves, R, player=1)
    return attr


def is_end_component(M: ParityMDP, U: Iterable[int]) -> bool:
    """Direct check of the three end-component conditions."""
    U = set(U)
    if not U:
        return False
    for s in U:
        if M.owner[s] == 1:
            if not any(t in U for t in M.moves[s].values()):
                return False
        elif not M.support(s) <= U:
            return False
    # strong connectivity through edges inside U
    start = next(iter(U))
    for graph in (_inner_edges(M, U), _reverse(_inner_edges(M, U))):
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y in graph[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        if seen != U:
            return False
    return True


def _inner_edges(M, U):
    return {s: [t for t in M.support(s) if t in U] for s in U}


def _reverse(graph):
    rev = {s: [] for s in graph}
    for s, ts in graph.items():
        for t in ts:
            rev[t].append(s)
    return rev
