"""Game and parity-MDP constructions for synthesis.

All arenas built here share one action encoding so that strategies can be
read back as transducers: at an environment state the action id is the input
valuation ``j``; at a system state the action id is
``n_inputs + x * n_outputs + o`` where ``x`` is the set of inputs sensed in the
next step (always all inputs outside sensing games) and ``o`` the output
valuation.  State labels are ``("env", s, x)``, ``("sys", s, x, i)`` and, for
sensing games, ``("start",)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..model import ParityGame, ParityMDP
from ..surecost import cost_sure_finite, cost_sure_infinite
from .automata import (AlphabetMismatch, Dfw, Dpw, InputDistribution, NotSafety,
                       SignalAlphabet, Upw, popcount, same_alphabet, subsets)


def system_action(alphabet: SignalAlphabet, x: int, o: int) -> int:
    return alphabet.n_inputs + x * alphabet.n_outputs + o


def decode_system_action(alphabet: SignalAlphabet, a: int) -> tuple[int, int]:
    """``(x, o)`` of a system action id."""
    a -= alphabet.n_inputs
    if a < 0:
        raise ValueError(f"{a + alphabet.n_inputs} is an input action")
    return divmod(a, alphabet.n_outputs)


def _action_names(alphabet: SignalAlphabet, sensing: bool) -> dict[int, str]:
    names = {j: "in" + alphabet.show_inputs(j) for j in range(alphabet.n_inputs)}
    xs = range(alphabet.n_inputs) if sensing else [alphabet.full]
    for x in xs:
        for o in range(alphabet.n_outputs):
            text = "out" + alphabet.show_outputs(o)
            if sensing:
                text = "sense" + alphabet.show_inputs(x) + text
            names[system_action(alphabet, x, o)] = text
    return names


def _require_plain(A, what):
    if A.alphabet.sensing:
        raise AlphabetMismatch(f"{what} must be over input/output letters without sensing")


def dpw_to_game(A: Dpw) -> ParityGame:
    """The synthesis game of a specification automaton.

    Environment states are the automaton states and choose an input
    valuation; system states ``<q, i>`` choose an output valuation ``o`` and
    move to ``delta(q, i | o)``.  Both copies carry the rank of ``q``.
    """
    M = penalties_mdp(A, PenaltySpec())
    return ParityGame(M.owner, M.moves, M.rank, M.initial, M.state_names,
                      M.action_names, M.labels)


@dataclass(frozen=True)
class PenaltySpec:
    """Monitors for undesired scenarios and the penalty of each.

    Each monitor must accept exactly the words that end in an undesired
    scenario (it reads the whole history, so the caller composes it with
    the suffix closure).
    """

    monitors: tuple = ()
    gamma: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "monitors", tuple(self.monitors))
        object.__setattr__(self, "gamma", tuple(self.gamma))
        if len(self.monitors) != len(self.gamma):
            raise ValueError("one penalty per monitor is required")
        for U in self.monitors:
            if not isinstance(U, Dfw):
                raise TypeError("monitors are deterministic finite-word automata")
        for g in self.gamma:
            if g < 0:
                raise ValueError("penalties are nonnegative")


def penalties_mdp(A: Dpw, spec: PenaltySpec, dist: InputDistribution | None = None,
                  charge_copies: bool = True) -> ParityMDP:
    """Product of the specification with the penalty monitors.

    Environment states ``s = (q, q^1, ..., q^m)`` cost the sum of the
    penalties of the monitors in an accepting state.  With ``charge_copies``
    the system copies ``<s, i>`` carry the same cost, so that the mean payoff
    of a play is the average penalty per step; otherwise they cost 0 and the
    mean payoff is half of it.
    """
    _require_plain(A, "the specification")
    if spec.monitors:
        same_alphabet(A, *spec.monitors)
        for U in spec.monitors:
            _require_plain(U, "a monitor")
    alphabet = A.alphabet
    dist = dist or InputDistribution.uniform(alphabet)
    if dist.n_inputs != alphabet.n_inputs:
        raise AlphabetMismatch("input distribution does not match the alphabet")
    nI = alphabet.n_inputs
    product = list(itertools.product(range(A.n), *(range(U.n) for U in spec.monitors)))
    index = {s: k for k, s in enumerate(product)}
    N = len(product)

    def sys_id(k, i):
        return N + k * nI + i

    total = N * (1 + nI)
    owner = [2] * N + [1] * (N * nI)
    moves: list[dict] = [None] * total
    prob: list[dict] = [None] * total
    cost: list = [0] * total
    rank = [0] * total
    names = [""] * total
    labels: list = [None] * total
    full = alphabet.full

    def show(s):
        parts = [A.states[s[0]]] + [U.states[u] for U, u in zip(spec.monitors, s[1:])]
        return parts[0] if len(parts) == 1 else "(" + ",".join(parts) + ")"

    for k, s in enumerate(product):
        penalty = sum(g for U, u, g in zip(spec.monitors, s[1:], spec.gamma) if u in U.accepting)
        moves[k] = {i: sys_id(k, i) for i in range(nI)}
        prob[k] = {i: dist.probability(i) for i in range(nI)}
        cost[k] = penalty
        rank[k] = A.rank[s[0]]
        names[k] = show(s)
        labels[k] = ("env", s, full)
        for i in range(nI):
            v = sys_id(k, i)
            row = {}
            for o in range(alphabet.n_outputs):
                letter = alphabet.letter(i, o)
                nxt = (A.delta[s[0]][letter],) + tuple(
                    U.delta[u][letter] for U, u in zip(spec.monitors, s[1:]))
                row[system_action(alphabet, full, o)] = index[nxt]
            moves[v] = row
            prob[v] = {}
            cost[v] = penalty if charge_copies else 0
            rank[v] = A.rank[s[0]]
            names[v] = show(s) + "|" + alphabet.show_inputs(i)
            labels[v] = ("sys", s, full, i)
    initial = index[(A.initial,) + tuple(U.initial for U in spec.monitors)]
    return ParityMDP(tuple(owner), tuple(moves), tuple(prob), tuple(cost), tuple(rank), initial,
                     max(A.rank, default=0), tuple(names), _action_names(alphabet, False),
                     None, tuple(labels))


def sensing_upw(A: Dpw) -> Upw:
    """Universal automaton reading letters ``(i, x, o)``: it moves to every
    ``delta(q, j | o)`` for input valuations ``j`` that agree with ``i`` on
    the sensed set ``x``."""
    _require_plain(A, "the specification")
    plain = A.alphabet
    ext = plain.with_sensing()
    delta = []
    for q in range(A.n):
        row = []
        for letter in ext.letters():
            i, x, o = ext.split(letter)
            row.append(frozenset(A.delta[q][plain.letter(j, o)]
                                 for j in range(plain.n_inputs) if j & x == i & x))
        delta.append(tuple(row))
    return Upw(ext, A.states, A.initial, tuple(delta), A.rank)


def _sinks(U: Upw) -> set[int]:
    return {q for q in range(U.n) if all(t == frozenset([q]) for t in U.delta[q])}


def determinize_safety(U) -> Dpw:
    """Subset construction for universal safety automata.

    Ranks must be 0 or 1 and every rank-1 state must be a rejecting sink.
    Subsets containing a sink collapse into a single rejecting sink; all
    other subsets get rank 0.  Only subsets reachable from the initial state
    are built.
    """
    if isinstance(U, Dpw):
        U = U.as_upw()
    sinks = _sinks(U)
    for q in range(U.n):
        if U.rank[q] > 1:
            raise NotSafety(f"state {U.states[q]!r} has rank {U.rank[q]}")
        if U.rank[q] == 1 and q not in sinks:
            raise NotSafety(f"state {U.states[q]!r} has odd rank but is not a sink")
    rejecting = {q for q in sinks if U.rank[q] == 1}
    REJECT = None

    def canon(states):
        return REJECT if states & rejecting else frozenset(states)

    start = canon({U.initial})
    order = [start]
    index = {start: 0}
    delta = []
    k = 0
    while k < len(order):
        cur = order[k]
        k += 1
        row = []
        for letter in U.alphabet.letters():
            if cur is REJECT:
                nxt = REJECT
            else:
                nxt = canon(set().union(*(U.delta[q][letter] for q in cur)))
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            row.append(index[nxt])
        delta.append(tuple(row))

    def show(S):
        if S is REJECT:
            return "reject"
        return "{" + ",".join(U.states[q] for q in sorted(S)) + "}"

    rank = tuple(1 if S is REJECT else 0 for S in order)
    return Dpw(U.alphabet, tuple(show(S) for S in order), 0, tuple(delta), rank)


def sensing_game(D: Dpw, dist: InputDistribution | None = None) -> ParityMDP:
    """Parity-MDP whose sure cost is the sensing cost of the language of ``D``.

    ``D`` reads letters ``(i, x, o)``.  The system first moves from START
    by choosing the first sensed set; at ``<s, x>`` the environment draws the
    input, of which only its restriction ``j`` to ``x`` is kept (probability of
    the whole agreement class); at ``<s, x, j>`` the system picks the next
    sensed set ``x'`` and the output ``o`` and moves to
    ``<delta(s, (j, x, o)), x'>``.  States ``<s, x>`` and ``<s, x, i>`` cost
    ``|x|``; START costs 0 and has rank 0.
    """
    if not D.alphabet.sensing:
        raise AlphabetMismatch("the sensing game reads letters carrying a sensed set")
    alphabet = D.alphabet
    dist = dist or InputDistribution.uniform(alphabet)
    if dist.n_inputs != alphabet.n_inputs:
        raise AlphabetMismatch("input distribution does not match the alphabet")
    nI = alphabet.n_inputs
    S = D.n

    def env_id(s, x):
        return 1 + s * nI + x

    def sys_id(s, x, i):
        return 1 + S * nI + (s * nI + x) * nI + i

    total = 1 + S * nI * (1 + nI)
    owner = [0] * total
    moves: list = [None] * total
    prob: list = [None] * total
    cost: list = [0] * total
    rank = [0] * total
    names = [""] * total
    labels: list = [None] * total
    choices = [(x, o) for x in range(nI) for o in range(alphabet.n_outputs)]

    owner[0] = 1
    moves[0] = {system_action(alphabet, x, o): env_id(D.initial, x) for x, o in choices}
    prob[0] = {}
    names[0] = "START"
    labels[0] = ("start",)
    for s in range(S):
        for x in range(nI):
            v = env_id(s, x)
            owner[v] = 2
            moves[v] = {j: sys_id(s, x, j) for j in subsets(x)}
            prob[v] = {j: dist.class_probability(j, x) for j in subsets(x)}
            cost[v] = popcount(x)
            rank[v] = D.rank[s]
            names[v] = f"{D.states[s]}|sense{alphabet.show_inputs(x)}"
            labels[v] = ("env", s, x)
            for i in range(nI):
                u = sys_id(s, x, i)
                owner[u] = 1
                moves[u] = {system_action(alphabet, x2, o):
                            env_id(D.delta[s][alphabet.letter(i, o, x)], x2) for x2, o in choices}
                prob[u] = {}
                cost[u] = popcount(x)
                rank[u] = D.rank[s]
                names[u] = f"{D.states[s]}|sense{alphabet.show_inputs(x)}|{alphabet.show_inputs(i)}"
                labels[u] = ("sys", s, x, i)
    return ParityMDP(tuple(owner), tuple(moves), tuple(prob), tuple(cost), tuple(rank), 0,
                     max(D.rank, default=0), tuple(names), _action_names(alphabet, True),
                     None, tuple(labels))


def sensing_automaton(A: Dpw, determinized: Dpw | None = None) -> Dpw:
    """The deterministic automaton over sensing letters used by the sensing
    game: ``determinized`` when supplied, otherwise the safety subset
    construction of :func:`sensing_upw`."""
    _require_plain(A, "the specification")
    if determinized is None:
        return determinize_safety(sensing_upw(A))
    same_alphabet(A, determinized)
    if not determinized.alphabet.sensing:
        raise AlphabetMismatch("the determinized automaton must read sensing letters")
    return determinized


@dataclass
class SensingSolution:
    value: object
    arena: ParityMDP
    automaton: Dpw
    result: object = field(repr=False, default=None)


def solve_sensing(A: Dpw, mode: str = "infinite", determinized: Dpw | None = None,
                  dist: InputDistribution | None = None) -> SensingSolution:
    if mode not in ("infinite", "finite"):
        raise ValueError(f"mode must be 'infinite' or 'finite', not {mode!r}")
    D = sensing_automaton(A, determinized)
    M = sensing_game(D, dist)
    result = cost_sure_infinite(M) if mode == "infinite" else cost_sure_finite(M)
    return SensingSolution(result.value, M, D, result)


def sensing_cost(A: Dpw, mode: str = "infinite", determinized: Dpw | None = None,
                 dist: InputDistribution | None = None):
    """Least expected long-run number of sensed inputs over transducers
    realizing ``A`` (with unbounded or finite memory), or ``UNREALIZABLE``."""
    return solve_sensing(A, mode, determinized, dist).value


def expected_sizes(A: Dpw, spec: PenaltySpec | None = None, D: Dpw | None = None) -> dict:
    """Closed-form state counts of the constructions."""
    nI = A.alphabet.n_inputs
    out = {}
    prod = A.n
    for U in (spec.monitors if spec else ()):
        prod *= U.n
    out["penalties"] = prod * (1 + nI)
    if D is not None:
        out["sensing"] = 1 + D.n * nI * (1 + nI)
    return out

