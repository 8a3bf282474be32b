"""Sure-cost values for infinite-memory and finite-memory strategies.

Both pipelines prune the arena to Player 1's parity winning region, find the
relevant end components (maximal GECs, resp. maximal SGECs), and solve the
rank-free MDP in which component states cost the component's value and all
other states cost one more than the largest cost of the arena.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .decomposition import SGEC, EndComponent, end_component_sets, max_gecs
from .games import FiniteMemoryStrategy, solve_parity, super_good_states
from .mdp import MemorylessStrategy, ValueVector, ec_value, min_mean_payoff
from .model import ParityMDP, attractor, restrict


class _Unrealizable:
    """Marker value: no strategy wins the parity condition from the initial state."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNREALIZABLE"

    def __str__(self):
        return "unrealizable"

    def __reduce__(self):
        return (_Unrealizable, ())


UNREALIZABLE = _Unrealizable()


class Unrealizable(Exception):
    """Raised by operations that need a sure-winning initial state."""


def as_number(value, infinity=float("inf")):
    """``value`` itself, or ``infinity`` for the unrealizable marker."""
    return infinity if value is UNREALIZABLE else value


@dataclass(eq=False)
class SureCostResult:
    """Outcome of a sure-cost pipeline.

    ``components`` and ``pruned_states`` use the ids of the input arena;
    ``arena`` (the pruned arena), ``reduced`` (the rank-free MDP with
    component costs), ``values``, ``policy``, ``local_components`` and
    ``witnesses`` use the ids of the pruned arena, whose ``origin`` maps
    back to the input arena.
    """

    value: object
    reduced: ParityMDP | None
    components: list[EndComponent]
    pruned_states: frozenset
    arena: ParityMDP | None = None
    values: ValueVector | None = None
    policy: MemorylessStrategy | None = None
    local_components: list[EndComponent] = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)
    memory: str = "infinite"

    @property
    def realizable(self) -> bool:
        return self.value is not UNREALIZABLE


def prune_to_sure_winning(M: ParityMDP) -> tuple[ParityMDP | None, frozenset]:
    """Restrict ``M`` to Player 1's parity winning region.

    The result keeps the initial state when it is winning and has initial
    ``None`` otherwise; ``None`` is returned for an empty region.
    """
    sol = solve_parity(M)
    removed = frozenset(M.states) - sol.W1
    if not sol.W1:
        return None, removed
    if M.initial in sol.W1:
        return restrict(M, sol.W1, M.initial), removed
    sub = restrict(M, sol.W1, min(sol.W1))
    return dataclasses.replace(sub, initial=None), removed


def reduced_arena(M: ParityMDP, components, W) -> ParityMDP:
    """Rank-free arena with component values inside components and ``W+1``
    elsewhere."""
    cost = [W + 1] * M.n
    for comp in components:
        for s in comp.states:
            cost[s] = comp.value
    return dataclasses.replace(M, cost=tuple(cost), rank=(0,) * M.n, max_rank=None)


def _lift(M: ParityMDP, Mp: ParityMDP, comp: EndComponent) -> EndComponent:
    return dataclasses.replace(EndComponent.of(M, (Mp.origin[s] for s in comp.states), comp.kind),
                               value=comp.value)


def _solve(M: ParityMDP, find_components, memory: str) -> SureCostResult:
    Mp, removed = prune_to_sure_winning(M)
    if Mp is None or Mp.initial is None:
        return SureCostResult(UNREALIZABLE, None, [], removed, Mp, memory=memory)
    W = M.max_cost()
    local, witnesses = find_components(Mp)
    local = [c.with_value(ec_value(Mp, c)) for c in local]
    R = reduced_arena(Mp, local, W)
    values, policy = min_mean_payoff(R)
    return SureCostResult(
        value=values[Mp.initial],
        reduced=R,
        components=[_lift(M, Mp, c) for c in local],
        pruned_states=removed,
        arena=Mp,
        values=values,
        policy=policy,
        local_components=local,
        witnesses=witnesses,
        memory=memory,
    )


def cost_sure_infinite(M: ParityMDP) -> SureCostResult:
    """Infimum of the expected mean-payoff over sure-winning strategies."""
    return _solve(M, lambda Mp: (max_gecs(Mp), {}), "infinite")


def cost_sure_finite(M: ParityMDP) -> SureCostResult:
    """Infimum of the expected mean-payoff over sure-winning finite-memory
    strategies."""
    return _solve(M, _sgecs_with_witnesses, "finite")


def max_sgecs(M: ParityMDP) -> list[EndComponent]:
    """Maximal super-good end components of an arena (normally already
    pruned to the sure-winning region)."""
    return _sgecs_with_witnesses(M)[0]


def _odd_ranks(M: ParityMDP):
    return [-1] + list(range(1, M.d + 1, 2))


def _sgecs_for_rank(M: ParityMDP, k: int):
    found = []
    pending = [set(M.states)]
    owner = M.owner.__getitem__
    while pending:
        cand = pending.pop()
        for comp in end_component_sets(M, cand):
            odd = {s for s in comp if M.rank[s] % 2 == 1 and M.rank[s] > k}
            if odd:
                attr, _ = attractor(comp, owner, M.stochastic_moves, odd, player=2)
            else:
                sg = super_good_states(M, comp)
                if sg.is_sgec:
                    found.append((comp, sg.witness))
                    continue
                attr, _ = attractor(comp, owner, M.stochastic_moves, comp - sg.states, player=2)
            rest = set(comp) - attr
            if rest:
                pending.append(rest)
    return found


def _sgecs_with_witnesses(M: ParityMDP):
    candidates: dict[frozenset, FiniteMemoryStrategy] = {}
    for k in _odd_ranks(M):
        for comp, witness in _sgecs_for_rank(M, k):
            candidates.setdefault(comp, witness)
    # unions of overlapping super-good components are super good; merge them
    # so that only maximal components remain
    sets = list(candidates)
    merged = True
    while merged:
        merged = False
        for i in range(len(sets)):
            for j in range(i + 1, len(sets)):
                if sets[i] & sets[j]:
                    union = sets[i] | sets[j]
                    sets = [s for n, s in enumerate(sets) if n not in (i, j)] + [union]
                    merged = True
                    break
            if merged:
                break
    comps, witnesses = [], {}
    for s in sorted(sets, key=min):
        witness = candidates.get(s)
        if witness is None:
            sg = super_good_states(M, s)
            if not sg.is_sgec:
                raise RuntimeError(f"union {sorted(s)} of super-good components is not super good")
            witness = sg.witness
        comps.append(EndComponent.of(M, s, SGEC))
        witnesses[s] = witness
    return comps, witnesses
