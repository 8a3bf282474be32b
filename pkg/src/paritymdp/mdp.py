"""Exact mean-payoff and reachability solving on the MDP view of an arena.

Player-1 states are choice states with deterministic actions; Player-2
states are purely stochastic.  Everything is computed over
:class:`fractions.Fraction`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .decomposition import EndComponent, sccs
from .linalg import solve_rows
from .model import NotClosed, restrict


class MemorylessStrategy(dict):
    """Maps Player-1 states to actions."""


class NotConstant(RuntimeError):
    """An end component produced a non-constant optimal gain."""


@dataclass(frozen=True)
class ValueVector:
    gain: tuple[Fraction, ...]
    bias: tuple[Fraction, ...]

    def __getitem__(self, s):
        return self.gain[s]

    def __len__(self):
        return len(self.gain)


Chain = Sequence[Mapping[int, Fraction]]


def policy_chain(M, choice: Mapping[int, int]) -> list[dict[int, Fraction]]:
    """Transition rows of the Markov chain induced by a memoryless choice."""
    rows = []
    for s in M.states:
        if M.owner[s] == 1:
            rows.append({M.moves[s][choice[s]]: Fraction(1)})
        else:
            row: dict[int, Fraction] = {}
            for a, t in M.moves[s].items():
                p = M.prob[s].get(a, 0)
                if p > 0:
                    row[t] = row.get(t, 0) + Fraction(p)
            rows.append(row)
    return rows


def bottom_classes(rows: Chain) -> list[set[int]]:
    """Closed recurrent classes of a finite chain, sorted by smallest state."""
    graph = {s: [t for t, p in sorted(rows[s].items()) if p > 0] for s in range(len(rows))}
    out = []
    for comp in sccs(graph):
        if all(t in comp for s in comp for t in graph[s]):
            out.append(comp)
    return sorted(out, key=min)


def stationary(rows: Chain, cls: Iterable[int]) -> dict[int, Fraction]:
    """Stationary distribution of an irreducible closed class."""
    order = sorted(cls)
    idx = {s: i for i, s in enumerate(order)}
    k = len(order)
    eqs = [dict() for _ in range(k)]
    rhs = [Fraction(0)] * k
    # balance equations pi(t) = sum_s pi(s) P(s,t) for all but the first state
    for s in order:
        for t, p in rows[s].items():
            j = idx[t]
            if j == 0:
                continue
            eqs[j][idx[s]] = eqs[j].get(idx[s], 0) + p
    for j in range(1, k):
        eqs[j][j] = eqs[j].get(j, 0) - 1
    eqs[0] = {i: 1 for i in range(k)}
    rhs[0] = Fraction(1)
    x = solve_rows(eqs, rhs, k)
    return {s: x[idx[s]] for s in order}


def evaluate_chain(rows: Chain, cost: Sequence) -> tuple[list[Fraction], list[Fraction]]:
    """Gain and bias of a chain with state costs.

    The bias is normalized so that its stationary average is zero on every
    closed class.
    """
    n = len(rows)
    gain: list[Fraction | None] = [None] * n
    bias: list[Fraction | None] = [None] * n
    for cls in bottom_classes(rows):
        pi = stationary(rows, cls)
        g = sum((pi[s] * cost[s] for s in cls), Fraction(0))
        order = sorted(cls)
        idx = {s: i for i, s in enumerate(order)}
        k = len(order)
        eqs, rhs = [], []
        for s in order[:-1]:
            row = {idx[s]: Fraction(1)}
            for t, p in rows[s].items():
                row[idx[t]] = row.get(idx[t], 0) - p
            eqs.append(row)
            rhs.append(cost[s] - g)
        eqs.append({idx[s]: pi[s] for s in order})
        rhs.append(Fraction(0))
        h = solve_rows(eqs, rhs, k)
        for s in order:
            gain[s] = g
            bias[s] = h[idx[s]]
    transient = [s for s in range(n) if gain[s] is None]
    if transient:
        idx = {s: i for i, s in enumerate(transient)}
        k = len(transient)
        eqs = []
        rhs_g = []
        for s in transient:
            row = {idx[s]: Fraction(1)}
            b = Fraction(0)
            for t, p in rows[s].items():
                if t in idx:
                    row[idx[t]] = row.get(idx[t], 0) - p
                else:
                    b += p * gain[t]
            eqs.append(row)
            rhs_g.append(b)
        g_t = solve_rows(eqs, rhs_g, k)
        for s in transient:
            gain[s] = g_t[idx[s]]
        rhs_h = []
        for s in transient:
            b = cost[s] - gain[s]
            for t, p in rows[s].items():
                if t not in idx:
                    b += p * bias[t]
            rhs_h.append(b)
        h_t = solve_rows(eqs, rhs_h, k)
        for s in transient:
            bias[s] = h_t[idx[s]]
    return gain, bias


def chain_gain(rows: Chain, cost: Sequence) -> list[Fraction]:
    """Exact long-run average cost from every state of a Markov chain."""
    return evaluate_chain(rows, cost)[0]


def _improve(M, choice, gain, bias):
    """One multichain improvement step; returns the new choice or None."""
    changed = False
    new = dict(choice)
    for s in M.states:
        if M.owner[s] != 1:
            continue
        cur = M.moves[s][choice[s]]
        best = min(gain[t] for t in M.moves[s].values())
        if best < gain[cur]:
            new[s] = min(a for a, t in M.moves[s].items() if gain[t] == best)
            changed = True
    if changed:
        return new
    for s in M.states:
        if M.owner[s] != 1:
            continue
        cur = M.moves[s][choice[s]]
        cands = [(bias[t], a) for a, t in sorted(M.moves[s].items()) if gain[t] == gain[cur]]
        hb, a = min(cands)
        if hb < bias[cur]:
            new[s] = a
            changed = True
    return new if changed else None


def is_optimal(M, gain, bias) -> bool:
    """No Player-1 action improves (gain, bias) lexicographically."""
    for s in M.states:
        if M.owner[s] != 1:
            continue
        for t in M.moves[s].values():
            if gain[t] < gain[s]:
                return False
            if gain[t] == gain[s] and M.cost[s] - gain[s] + bias[t] < bias[s]:
                return False
    return True


def min_mean_payoff(M) -> tuple[ValueVector, MemorylessStrategy]:
    """Minimal expected mean-payoff from every state, with a memoryless
    strategy attaining it everywhere (multichain policy iteration)."""
    choice = {s: min(M.moves[s]) for s in M.states if M.owner[s] == 1}
    seen = set()
    while True:
        key = tuple(sorted(choice.items()))
        if key in seen:
            raise RuntimeError("policy iteration revisited a policy")
        seen.add(key)
        gain, bias = evaluate_chain(policy_chain(M, choice), M.cost)
        new = _improve(M, choice, gain, bias)
        if new is None:
            break
        choice = new
    if not is_optimal(M, gain, bias):
        raise RuntimeError("policy iteration stopped at a non-optimal policy")
    return ValueVector(tuple(gain), tuple(bias)), MemorylessStrategy(choice)


def ec_solution(M, C) -> tuple[Fraction, MemorylessStrategy]:
    """Value of an end component and an optimal strategy inside it,
    expressed in the state ids of ``M``."""
    states = C.states if isinstance(C, EndComponent) else frozenset(C)
    sub = restrict(M, states, min(states))
    values, strat = min_mean_payoff(sub)
    vals = set(values.gain)
    if len(vals) != 1:
        raise NotConstant(f"gains {sorted(vals)} inside an end component")
    choice = {sub.origin[s]: a for s, a in strat.items()}
    return vals.pop(), MemorylessStrategy(choice)


def ec_value(M, C) -> Fraction:
    return ec_solution(M, C)[0]


def max_reach(M, C: Iterable[int], T: Iterable[int]) -> tuple[dict[int, Fraction], MemorylessStrategy]:
    """Maximal probability of reaching ``T`` without leaving ``C``.

    The probability-one region comes from the classical nested fixpoint; the
    remaining states are solved by policy iteration whose policies are
    evaluated as least fixpoints (states that cannot reach the target under
    the policy get 0).
    """
    C = set(C)
    T = set(T) & C
    for s in sorted(C):
        if M.owner[s] == 2 and not M.support(s) <= C:
            raise NotClosed(f"state {s} leaves the set with positive probability")
    inner = {s: sorted((a, t) for a, t in M.moves[s].items() if t in C) for s in C}
    for s in C:
        if M.owner[s] == 1 and not inner[s]:
            raise NotClosed(f"state {s} has no action inside the set")
    pos = {s: M.support(s) for s in C if M.owner[s] == 2}

    # probability-one region with layered progress actions
    Y = set(C)
    while True:
        X = set(T)
        layer = {s: 0 for s in T}
        level = 0
        while True:
            level += 1
            add = set()
            for s in C - X:
                if M.owner[s] == 1:
                    if any(t in X for _, t in inner[s]):
                        add.add(s)
                elif pos[s] <= Y and pos[s] & X:
                    add.add(s)
            if not add:
                break
            for s in add:
                layer[s] = level
            X |= add
        if X == Y:
            break
        Y = X
    choice: dict[int, int] = {}
    for s in Y:
        if M.owner[s] == 1:
            if s in T:
                choice[s] = inner[s][0][0]
            else:
                choice[s] = min(a for a, t in inner[s] if t in Y and layer[t] < layer[s])

    # states that cannot reach T at all
    reach = set(Y)
    changed = True
    while changed:
        changed = False
        for s in C - reach:
            succ = [t for _, t in inner[s]] if M.owner[s] == 1 else pos[s]
            if any(t in reach for t in succ):
                reach.add(s)
                changed = True
    maybe = sorted(reach - Y)
    for s in C - reach:
        if M.owner[s] == 1:
            choice[s] = inner[s][0][0]

    value = {s: Fraction(1) for s in Y}
    value.update({s: Fraction(0) for s in C - reach})
    if maybe:
        for s in maybe:
            if M.owner[s] == 1:
                choice[s] = inner[s][0][0]
        while True:
            val = _reach_values(M, maybe, Y, choice)
            full = dict(value)
            full.update(val)
            changed = False
            for s in maybe:
                if M.owner[s] != 1:
                    continue
                cur = full[M.moves[s][choice[s]]]
                best = max(full[t] for _, t in inner[s])
                if best > cur:
                    choice[s] = min(a for a, t in inner[s] if full[t] == best)
                    changed = True
            if not changed:
                value = full
                break
    return value, MemorylessStrategy({s: choice[s] for s in C if M.owner[s] == 1})


def _reach_values(M, maybe, Y, choice):
    """Probability of reaching ``Y`` from the ``maybe`` states under ``choice``;
    successors outside ``maybe`` and ``Y`` contribute 0."""
    rows = {}
    for s in maybe:
        if M.owner[s] == 1:
            rows[s] = {M.moves[s][choice[s]]: Fraction(1)}
        else:
            row = {}
            for a, t in M.moves[s].items():
                p = M.prob[s].get(a, 0)
                if p > 0:
                    row[t] = row.get(t, 0) + Fraction(p)
            rows[s] = row
    good = set()
    changed = True
    while changed:
        changed = False
        for s in maybe:
            if s not in good and any(t in Y or t in good for t in rows[s]):
                good.add(s)
                changed = True
    out = {s: Fraction(0) for s in maybe if s not in good}
    order = sorted(good)
    if order:
        idx = {s: i for i, s in enumerate(order)}
        eqs, rhs = [], []
        for s in order:
            row = {idx[s]: Fraction(1)}
            b = Fraction(0)
            for t, p in rows[s].items():
                if t in Y:
                    b += p
                elif t in idx:
                    row[idx[t]] = row.get(idx[t], 0) - p
            eqs.append(row)
            rhs.append(b)
        x = solve_rows(eqs, rhs, len(order))
        out.update({s: x[idx[s]] for s in order})
    return out
