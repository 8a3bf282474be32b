"""Strategies realizing near-optimal sure costs, a certifier for finite-memory
strategies, and a seeded Monte-Carlo simulator.

Three strategy shapes are supported everywhere:

* memoryless: a mapping from Player-1 states to actions;
* finite-memory: :class:`~paritymdp.games.FiniteMemoryStrategy`;
* procedural: :class:`ProceduralStrategy` and :class:`GlobalStrategy`, whose
  phase schedules use unbounded counters.

A strategy is executed through a controller with ``start(s)``, ``act(s)``
and ``arrive(t)``; controllers hold the per-play mutable state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np

from .decomposition import EndComponent
from .games import (FiniteMemoryStrategy, NotGEC, has_cycle_with_parity, solve_parity,
                    strategy_product, super_good_states)
from .mdp import MemorylessStrategy, chain_gain, ec_solution, max_reach
from .model import ParityMDP, is_end_component
from .surecost import Unrealizable, cost_sure_finite, cost_sure_infinite


class NotSGEC(ValueError):
    """The component is not a super-good end component."""


MEAN_PAYOFF, REACH, FALLBACK, PREFIX = "MeanPayoff", "Reach", "Fallback", "Prefix"


def _mean_4(i):
    return 4 ** i


def _mean_2(i):
    return 2 ** i


def _mean_22(i):
    return 2 ** (2 ** i)


_MEAN = {"4^i": _mean_4, "2^i": _mean_2, "2^2^i": _mean_22}


@dataclass(frozen=True)
class ScheduleParams:
    """Phase lengths of the component strategy.

    Iteration ``i`` (starting at 1) plays the mean-payoff strategy for
    ``mean_steps(i)`` steps and the reachability strategy for
    ``reach_steps(i, n)`` steps, ``n`` being the component size.  ``mean``
    names a schedule (``"4^i"``, ``"2^i"``, ``"2^2^i"``) or is a function;
    ``reach`` defaults to ``gamma * n * 2^i``.
    """

    mean: object = "4^i"
    gamma: int = 4
    reach: Callable[[int, int], int] | None = None

    def __post_init__(self):
        if isinstance(self.mean, str) and self.mean not in _MEAN:
            raise ValueError(f"unknown mean schedule {self.mean!r}")
        if self.reach is None and (not isinstance(self.gamma, int) or self.gamma <= 0):
            raise ValueError("gamma must be a positive integer")
        for name, fn in (("mean_steps", self.mean_steps), ("reach_steps", lambda i: self.reach_steps(i, 1))):
            prev = 0
            for i in range(1, 7):
                v = fn(i)
                if not isinstance(v, int) or v <= 0:
                    raise ValueError(f"{name}({i}) = {v!r} is not a positive integer")
                if v <= prev:
                    raise ValueError(f"{name} is not strictly increasing at {i}")
                prev = v

    def mean_steps(self, i: int) -> int:
        fn = _MEAN[self.mean] if isinstance(self.mean, str) else self.mean
        return fn(i)

    def reach_steps(self, i: int, n: int) -> int:
        if self.reach is not None:
            return self.reach(i, n)
        return self.gamma * n * 2 ** i

    @classmethod
    def for_epsilon(cls, eps, mean="4^i") -> "ScheduleParams":
        """Reach-phase constant growing like log(1/eps)."""
        eps = Fraction(eps)
        if not 0 < eps:
            raise ValueError("epsilon must be positive")
        gamma = max(4, math.ceil(math.log2(1 / eps))) if eps < 1 else 4
        return cls(mean=mean, gamma=gamma)


# ---------------------------------------------------------------- controllers


class _MemorylessController:
    def __init__(self, choice):
        self.choice = choice

    def start(self, s):
        pass

    def act(self, s):
        return self.choice[s]

    def arrive(self, t):
        pass


class _FiniteController:
    def __init__(self, f: FiniteMemoryStrategy):
        self.f = f
        self.m = None

    def start(self, s):
        self.m = self.f.start(s)

    def act(self, s):
        return self.f.act[(s, self.m)]

    def arrive(self, t):
        self.m = self.f.next[(t, self.m)]


def controller(f):
    """A fresh controller executing strategy ``f``."""
    if isinstance(f, FiniteMemoryStrategy):
        return _FiniteController(f)
    if hasattr(f, "controller"):
        return f.controller()
    if isinstance(f, Mapping):
        return _MemorylessController(f)
    raise TypeError(f"not a strategy: {type(f).__name__}")


# ---------------------------------------------------- procedural GEC strategy


@dataclass(eq=False)
class ProceduralStrategy:
    """Near-optimal strategy inside a good end component.

    Iteration ``i`` plays ``g`` (mean-payoff optimal inside the component)
    for ``mean_steps(i)`` steps, then ``f_c`` (maximal reachability of the
    top-ranked states) for ``reach_steps(i, n)`` steps.  When an iteration
    passes without visiting a top-ranked state, the strategy switches for
    good to ``fallback``, a sure-winning memoryless strategy.
    """

    arena: ParityMDP
    component: EndComponent
    g: MemorylessStrategy
    f_c: MemorylessStrategy
    fallback: MemorylessStrategy
    params: ScheduleParams

    def controller(self):
        return _GecController(self)


class _GecController:
    def __init__(self, h: ProceduralStrategy):
        self.h = h
        self.top = h.component.max_rank_states
        self.n = len(h.component.states)
        self.phase = MEAN_PAYOFF
        self.iteration = 1
        self.step = 0
        self.visited = False
        self.limit = h.params.mean_steps(1)

    def start(self, s):
        self.phase = MEAN_PAYOFF
        self.iteration = 1
        self.step = 0
        self.limit = self.h.params.mean_steps(1)
        self.visited = s in self.top

    def act(self, s):
        if self.phase == MEAN_PAYOFF:
            return self.h.g[s]
        if self.phase == REACH:
            return self.h.f_c[s]
        return self.h.fallback[s]

    def arrive(self, t):
        if self.phase == FALLBACK:
            return
        if t in self.top:
            self.visited = True
        self.step += 1
        if self.step < self.limit:
            return
        self.step = 0
        if self.phase == MEAN_PAYOFF:
            self.phase = REACH
            self.limit = self.h.params.reach_steps(self.iteration, self.n)
        elif self.visited:
            self.iteration += 1
            self.phase = MEAN_PAYOFF
            self.limit = self.h.params.mean_steps(self.iteration)
            self.visited = False
        else:
            self.phase = FALLBACK


def _component(M, C, kind="EC"):
    return C if isinstance(C, EndComponent) else EndComponent.of(M, C, kind)


def epsilon_strategy_gec(M: ParityMDP, C, params: ScheduleParams | None = None) -> ProceduralStrategy:
    comp = _component(M, C)
    if not is_end_component(M, comp.states) or comp.max_rank % 2 == 1:
        raise NotGEC(f"{sorted(comp.states)} is not a good end component")
    sol = solve_parity(M)
    if not comp.states <= sol.W1:
        raise NotGEC("component contains states that are not sure-winning")
    _, g = ec_solution(M, comp)
    _, f_c = max_reach(M, comp.states, comp.max_rank_states)
    return ProceduralStrategy(M, comp, g, f_c, sol.sigma1, params or ScheduleParams())


@dataclass(eq=False)
class GlobalStrategy:
    """Near-optimal sure-winning strategy for a whole arena.

    Follows ``policy`` (optimal in the reduced MDP) for at most ``n0`` steps.
    Entering a good end component that ``policy`` never leaves hands control
    to that component's :class:`ProceduralStrategy`; running out of steps
    hands it to the sure-winning ``fallback``.  State ids are those of
    ``arena``; ``local`` maps them to the pruned arena the policy lives on.
    """

    arena: ParityMDP
    policy: Mapping[int, int]
    n0: int
    components: dict
    fallback: Mapping[int, int]
    local: Mapping[int, int]

    def controller(self):
        return _GlobalController(self)


class _GlobalController:
    def __init__(self, f: GlobalStrategy):
        self.f = f
        self.j = 0
        self.phase = PREFIX
        self.inner = None

    def _enter(self, s):
        if self.phase != PREFIX:
            return
        if self.j >= self.f.n0:
            self.phase = FALLBACK
            return
        u = self.f.local[s]
        h = self.f.components.get(u)
        if h is not None:
            self.phase = "Component"
            self.inner = h.controller()
            self.inner.start(u)

    def start(self, s):
        self.j = 0
        self.phase = PREFIX
        self.inner = None
        self._enter(s)

    def act(self, s):
        u = self.f.local[s]
        if self.phase == PREFIX:
            return self.f.policy[u]
        if self.phase == FALLBACK:
            return self.f.fallback[u]
        return self.inner.act(u)

    def arrive(self, t):
        if self.phase == PREFIX:
            self.j += 1
            self._enter(t)
        elif self.phase != FALLBACK:
            self.inner.arrive(self.f.local[t])


def _retained(M, policy, components):
    """Components that ``policy`` never leaves."""
    out = []
    for comp in components:
        if all(M.moves[s][policy[s]] in comp.states for s in comp.states if M.owner[s] == 1):
            out.append(comp)
    return out


def global_epsilon_strategy(M: ParityMDP, eps=Fraction(1, 10), n0: int = 1000,
                            params: ScheduleParams | None = None) -> GlobalStrategy:
    res = cost_sure_infinite(M)
    if not res.realizable:
        raise Unrealizable("the initial state is not sure-winning")
    Mp = res.arena
    params = params or ScheduleParams.for_epsilon(eps)
    handlers = {}
    for comp in _retained(Mp, res.policy, res.local_components):
        h = epsilon_strategy_gec(Mp, comp, params)
        for s in comp.states:
            handlers[s] = h
    local = {o: s for s, o in enumerate(Mp.origin)}
    fallback = solve_parity(Mp).sigma1
    return GlobalStrategy(M, res.policy, n0, handlers, fallback, local)


# ---------------------------------------------------- finite-memory strategies


def epsilon_strategy_sgec(M: ParityMDP, C, k: int) -> FiniteMemoryStrategy:
    """Repeat: ``k`` steps of the optimal memoryless strategy inside ``C``,
    then the super-good witness until a top-even state is reached."""
    if not isinstance(k, int) or k < 1:
        raise ValueError("k must be a positive integer")
    comp = _component(M, C)
    if not is_end_component(M, comp.states):
        raise NotSGEC(f"{sorted(comp.states)} is not an end component")
    sg = super_good_states(M, comp)
    if not sg.is_sgec:
        raise NotSGEC(f"{sorted(comp.states)} is not super good")
    _, g = ec_solution(M, comp)
    return _sgec_strategy(M, comp, g, sg.witness, k)


def _sgec_strategy(M, comp, g, h, k):
    top = comp.max_even_above_odd
    inside = comp.states

    def next_fn(t, label):
        if label is None:
            return ("g", 0)
        if label[0] == "g":
            if label[1] + 1 < k:
                return ("g", label[1] + 1)
            return ("g", 0) if t in top else ("h", h.start(t))
        return ("g", 0) if t in top else ("h", h.next[(t, label[1])])

    def act_fn(s, label):
        if label[0] == "g":
            return g[s]
        return h.act[(s, label[1])]

    return FiniteMemoryStrategy.from_functions(
        M.owner.__getitem__,
        lambda v: [(a, t) for a, t in M.moves[v].items() if t in inside],
        sorted(inside), None, next_fn, act_fn)


def finite_epsilon_strategy(M: ParityMDP, k: int = 16, n0: int = 64) -> FiniteMemoryStrategy:
    """Finite-memory near-optimal strategy for the finite-memory sure cost.

    Follows the reduced-MDP policy for up to ``n0`` steps; inside a
    super-good component that the policy never leaves it plays the
    component's ``k``-strategy; otherwise it falls back to a sure-winning
    memoryless strategy.  State ids are those of ``M``.
    """
    res = cost_sure_finite(M)
    if not res.realizable:
        raise Unrealizable("the initial state is not sure-winning")
    Mp = res.arena
    local = {o: s for s, o in enumerate(Mp.origin)}
    fallback = solve_parity(Mp).sigma1
    inner = {}
    for comp in _retained(Mp, res.policy, res.local_components):
        _, g = ec_solution(Mp, comp)
        f = _sgec_strategy(Mp, comp, g, res.witnesses[comp.states], k)
        for s in comp.states:
            inner[s] = (comp.states, f)

    def enter(u, j):
        if j >= n0:
            return ("fb",)
        if u in inner:
            cs, f = inner[u]
            return ("c", min(cs), f.start(u))
        return ("pre", j)

    def next_fn(t, label):
        u = local[t]
        if label is None:
            return enter(u, 0)
        if label[0] == "pre":
            return enter(u, label[1] + 1)
        if label[0] == "fb":
            return label
        cs, f = inner[u]
        return ("c", label[1], f.next[(u, label[2])])

    def act_fn(s, label):
        u = local[s]
        if label[0] == "pre":
            return res.policy[u]
        if label[0] == "fb":
            return fallback[u]
        return inner[u][1].act[(u, label[2])]

    return FiniteMemoryStrategy.from_functions(
        M.owner.__getitem__, lambda v: M.moves[v].items(), [M.initial], None, next_fn, act_fn)


def certify_finite_strategy(M: ParityMDP, f: FiniteMemoryStrategy, start: int | None = None):
    """Exact check of a finite-memory strategy from ``start``.

    Returns ``(sure_winning, value)``: whether every play (Player-2 branching
    treated as adversarial) satisfies parity, and the exact expected
    mean-payoff of the product chain (Player-2 branching probabilistic).
    """
    start = M.initial if start is None else start
    succ = strategy_product(M, f, [start])
    if succ is None:
        return False, None
    winning = not has_cycle_with_parity(succ, succ.__getitem__, lambda v: M.rank[v[0]], 1)
    rows, nodes = product_chain(M, f, start)
    gain = chain_gain(rows, [M.cost[s] for s, _ in nodes])
    return winning, gain[0]


def product_chain(M: ParityMDP, f: FiniteMemoryStrategy, start: int):
    """Markov chain of ``M`` under ``f`` from ``start``, over (state, memory)
    nodes reachable with positive probability; node 0 is the start."""
    first = (start, f.start(start))
    index = {first: 0}
    nodes = [first]
    rows = []
    k = 0
    while k < len(nodes):
        s, m = nodes[k]
        k += 1
        if M.owner[s] == 1:
            branch = [(M.moves[s][f.act[(s, m)]], Fraction(1))]
        else:
            branch = [(t, Fraction(M.prob[s].get(a, 0))) for a, t in sorted(M.moves[s].items())]
        row = {}
        for t, p in branch:
            if p <= 0:
                continue
            node = (t, f.next[(t, m)])
            if node not in index:
                index[node] = len(nodes)
                nodes.append(node)
            j = index[node]
            row[j] = row.get(j, 0) + p
        rows.append(row)
    return rows, nodes


# ----------------------------------------------------------------- simulation


@dataclass(frozen=True)
class TrajectoryStats:
    """Summary of one simulated play ``s_0 .. s_m`` (``m`` = horizon).

    ``mean_cost`` is the exact average of the ``m + 1`` visited costs;
    ``max_suffix_rank`` and ``suffix_visited`` describe the final window
    of ``window`` states and are diagnostics only.
    """

    horizon: int
    mean_cost: Fraction
    max_suffix_rank: int
    suffix_visited: frozenset
    seed: int
    stream: int = 0
    window: int = 0

    def to_json(self, name=str):
        from .formats import fraction_str
        return {
            "horizon": self.horizon,
            "mean_cost": fraction_str(self.mean_cost),
            "mean_cost_float": float(self.mean_cost),
            "max_suffix_rank": self.max_suffix_rank,
            "suffix_visited": sorted(name(s) for s in self.suffix_visited),
            "seed": self.seed,
            "stream": self.stream,
            "window": self.window,
        }


class _Sampler:
    """Exact sampling of Player-2 moves from a seeded generator.

    Each distribution is turned into integer thresholds over the common
    denominator ``L``; uniform integers in ``[0, L)`` are drawn in blocks
    per distinct ``L``, so a run is fully determined by its seed.
    """

    BLOCK = 1 << 14

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.buffers: dict[int, tuple[list, int]] = {}

    def draw(self, L: int) -> int:
        buf = self.buffers.get(L)
        if buf is None or buf[1] >= len(buf[0]):
            if L <= 1 << 62:
                data = self.rng.integers(0, L, size=self.BLOCK, dtype=np.int64).tolist()
            else:
                data = [self._big(L) for _ in range(64)]
            buf = (data, 0)
        data, pos = buf
        self.buffers[L] = (data, pos + 1)
        return data[pos]

    def _big(self, L):
        nbytes = (L.bit_length() + 7) // 8
        while True:
            x = int.from_bytes(self.rng.bytes(nbytes), "little") >> (8 * nbytes - L.bit_length())
            if x < L:
                return x


def _distribution(M, s):
    items = [(a, t, Fraction(M.prob[s].get(a, 0))) for a, t in sorted(M.moves[s].items())]
    items = [(t, p) for a, t, p in items if p > 0]
    L = math.lcm(*(p.denominator for _, p in items))
    thresholds, acc = [], 0
    for t, p in items:
        acc += p.numerator * (L // p.denominator)
        thresholds.append((acc, t))
    return L, thresholds


def _pick(thresholds, u):
    for bound, t in thresholds:
        if u < bound:
            return t
    return thresholds[-1][1]


def rng_for(seed: int, stream: int = 0) -> np.random.Generator:
    """PCG64 generator of trajectory ``stream`` under base ``seed``.

    Streams are the children ``SeedSequence(seed).spawn(...)`` would
    produce, so trajectories are independent and reproducible in any order.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


def simulate(M: ParityMDP, f, horizon: int, seed: int = 0, stream: int = 0,
             start: int | None = None, window: int | None = None) -> TrajectoryStats:
    """Sample one play of ``horizon`` steps under strategy ``f``."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    window = window or max(1, (horizon + 1) // 10)
    sampler = _Sampler(rng_for(seed, stream))
    s = M.initial if start is None else start
    if isinstance(f, (FiniteMemoryStrategy, Mapping)):
        states = _run_compiled(M, f, s, horizon, sampler)
    else:
        states = _run_controller(M, f, s, horizon, sampler)
    total = sum(M.cost[x] for x in states)
    tail = states[-window:]
    return TrajectoryStats(
        horizon=horizon,
        mean_cost=Fraction(total) / (horizon + 1),
        max_suffix_rank=max(M.rank[x] for x in tail),
        suffix_visited=frozenset(tail),
        seed=seed,
        stream=stream,
        window=window,
    )


def _run_controller(M, f, s, horizon, sampler):
    ctl = controller(f)
    dists = {}
    owner, moves = M.owner, M.moves
    states = [s]
    ctl.start(s)
    for _ in range(horizon):
        if owner[s] == 1:
            a = ctl.act(s)
            t = moves[s].get(a)
            if t is None:
                raise RuntimeError(f"strategy chose unavailable action {a} at state {s}")
        else:
            d = dists.get(s)
            if d is None:
                d = dists[s] = _distribution(M, s)
            t = _pick(d[1], sampler.draw(d[0]))
        ctl.arrive(t)
        states.append(t)
        s = t
    return states


def _run_compiled(M, f, s, horizon, sampler):
    """Fast path: walk the precomputed (state, memory) product."""
    if isinstance(f, FiniteMemoryStrategy):
        first = (s, f.start(s))
        nxt = lambda t, m: f.next[(t, m)]
        act = lambda v, m: f.act[(v, m)]
    else:
        first = (s, 0)
        nxt = lambda t, m: 0
        act = lambda v, m: f[v]
    index = {first: 0}
    nodes = [first]
    table = []
    k = 0
    while k < len(nodes):
        v, m = nodes[k]
        k += 1
        if M.owner[v] == 1:
            a = act(v, m)
            if a not in M.moves[v]:
                raise RuntimeError(f"strategy chose unavailable action {a} at state {v}")
            branch = [(None, M.moves[v][a])]
            L = None
        else:
            L, thr = _distribution(M, v)
            branch = thr
        out = []
        for bound, t in branch:
            node = (t, nxt(t, m))
            if node not in index:
                index[node] = len(nodes)
                nodes.append(node)
            out.append((bound, index[node]))
        table.append((L, out))
    cur = 0
    states = [s]
    for _ in range(horizon):
        L, out = table[cur]
        if L is None:
            cur = out[0][1]
        else:
            u = sampler.draw(L)
            for bound, j in out:
                if u < bound:
                    cur = j
                    break
        states.append(nodes[cur][0])
    return states
