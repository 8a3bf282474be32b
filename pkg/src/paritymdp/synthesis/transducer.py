"""Transducers and their extraction from finite-memory strategies."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..games import FiniteMemoryStrategy, has_cycle_with_parity
from ..mdp import chain_gain
from ..model import ParityMDP
from ..strategy import certify_finite_strategy
from .automata import Dpw, SignalAlphabet, popcount
from .construct import decode_system_action


class NotWinning(ValueError):
    """The strategy does not surely win, so it realizes nothing."""


@dataclass(frozen=True, eq=False)
class Transducer:
    """A Moore machine reading input valuations and labelled by outputs.

    ``step[t][i]`` is the successor of ``t`` on input ``i``; ``label[t]`` is
    the output emitted on entering ``t`` (the label of the initial state is
    never emitted).  ``declared[t]``, when present, is the sensed set the
    originating strategy paid for at ``t``.
    """

    alphabet: SignalAlphabet
    states: tuple[str, ...]
    initial: int
    step: tuple[tuple[int, ...], ...]
    label: tuple[int, ...]
    declared: tuple[int, ...] | None = None

    @property
    def n(self) -> int:
        return len(self.states)

    def sensed(self, t: int) -> int:
        """Inputs whose value can change the successor of ``t``."""
        out = 0
        row = self.step[t]
        for k in range(self.alphabet.n_in):
            bit = 1 << k
            if any(row[i] != row[i | bit] for i in range(self.alphabet.n_inputs) if not i & bit):
                out |= bit
        return out

    @property
    def sensed_per_state(self) -> tuple[int, ...]:
        return tuple(self.sensed(t) for t in range(self.n))

    def outputs(self, inputs) -> list[int]:
        """Outputs ``o_1, o_2, ...`` produced on the inputs ``i_0, i_1, ...``."""
        t = self.initial
        out = []
        for i in inputs:
            t = self.step[t][i]
            out.append(self.label[t])
        return out

    def sensing_cost(self) -> Fraction:
        """Exact expected long-run number of sensed inputs per step under
        uniformly random inputs."""
        p = Fraction(1, self.alphabet.n_inputs)
        rows = []
        for t in range(self.n):
            row: dict[int, Fraction] = {}
            for i in range(self.alphabet.n_inputs):
                u = self.step[t][i]
                row[u] = row.get(u, 0) + p
            rows.append(row)
        cost = [popcount(self.sensed(t)) for t in range(self.n)]
        return chain_gain(rows, cost)[self.initial]

    def realizes(self, A: Dpw) -> bool:
        """Whether every computation is accepted by the plain automaton ``A``."""
        alphabet = A.alphabet
        start = (self.initial, A.initial)
        nodes = {start}
        stack = [start]
        succ = {}
        while stack:
            v = stack.pop()
            t, q = v
            out = []
            for i in range(alphabet.n_inputs):
                u = self.step[t][i]
                w = (u, A.delta[q][alphabet.letter(i, self.label[u])])
                out.append(w)
                if w not in nodes:
                    nodes.add(w)
                    stack.append(w)
            succ[v] = out
        # the automaton state after the letter carries the rank
        return not has_cycle_with_parity(nodes, succ.__getitem__, lambda v: A.rank[v[1]], 1)

    def minimized(self) -> "Transducer":
        """The reachable quotient by output-and-successor equivalence
        (Moore partition refinement).  Structural sensing can only shrink."""
        block = {t: self.label[t] for t in range(self.n)}
        while True:
            sig = {t: (block[t],) + tuple(block[u] for u in self.step[t]) for t in range(self.n)}
            ids: dict = {}
            new = {t: ids.setdefault(sig[t], len(ids)) for t in range(self.n)}
            if len(ids) == len(set(block.values())):
                break
            block = new
        order, index = [], {}
        stack = [self.initial]
        while stack:
            t = stack.pop(0)
            b = block[t]
            if b in index:
                continue
            index[b] = len(order)
            order.append(t)
            stack.extend(self.step[t])
        step = tuple(tuple(index[block[u]] for u in self.step[t]) for t in order)
        label = tuple(self.label[t] for t in order)
        declared = None
        if self.declared is not None:
            declared = tuple(max((self.declared[u] for u in range(self.n) if block[u] == block[t]))
                             for t in order)
        return Transducer(self.alphabet, tuple(f"t{k}" for k in range(len(order))), 0,
                          step, label, declared)

    def to_json(self) -> dict:
        a = self.alphabet
        doc = {
            "kind": "transducer",
            "inputs": list(a.inputs),
            "outputs": list(a.outputs),
            "initial": self.states[self.initial],
            "states": [{"id": name, "output": a.output_names(self.label[t]),
                        "sensed": a.input_names(self.sensed(t))}
                       for t, name in enumerate(self.states)],
            "transitions": [{"from": self.states[t], "letter": a.input_names(i),
                             "to": self.states[u]}
                            for t, row in enumerate(self.step) for i, u in enumerate(row)],
        }
        return doc

    def to_dot(self) -> str:
        a = self.alphabet
        lines = ["digraph transducer {", "  rankdir=LR;", '  init [shape=point];']
        for t, name in enumerate(self.states):
            out = a.show_outputs(self.label[t])
            lines.append(f'  t{t} [label="{name}\\nout {out}\\nsense {a.show_inputs(self.sensed(t))}"];')
        lines.append(f"  init -> t{self.initial};")
        for t, row in enumerate(self.step):
            grouped: dict[int, list[int]] = {}
            for i, u in enumerate(row):
                grouped.setdefault(u, []).append(i)
            for u, ins in sorted(grouped.items()):
                text = " ".join(a.show_inputs(i) for i in ins)
                lines.append(f'  t{t} -> t{u} [label="{text}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _as_mdp(G) -> ParityMDP:
    if isinstance(G, ParityMDP):
        return G
    prob = tuple({} if G.owner[s] == 1 else
                 {a: Fraction(1, len(G.moves[s])) for a in G.moves[s]} for s in G.states)
    return ParityMDP(G.owner, G.moves, prob, (0,) * G.n, G.rank, G.initial, None,
                     G.state_names, G.action_names, None, G.labels)


def extract_transducer(G, f: FiniteMemoryStrategy, alphabet: SignalAlphabet) -> Transducer:
    """Fold a sure-winning finite-memory strategy on a synthesis or sensing
    arena into a transducer.

    Transducer states are the reachable triples (environment state, memory,
    last output).  On input ``i`` the environment plays the restriction of
    ``i`` to the currently sensed inputs, the strategy answers with the next
    sensed set and an output, and the memory is updated on both moves.
    """
    M = _as_mdp(G)
    if M.labels is None:
        raise ValueError("the arena was not built by a synthesis construction")
    alphabet = alphabet.plain()
    winning, _ = certify_finite_strategy(M, f)
    if not winning:
        raise NotWinning("the strategy does not surely win from the initial state")

    def respond(u, m):
        a = f.action(u, m)
        _, o = decode_system_action(alphabet, a)
        v = M.moves[u][a]
        return (v, f.update(v, m), o)

    s0 = M.initial
    if M.labels[s0][0] == "start":
        first = respond(s0, f.start(s0))
    else:
        first = (s0, f.start(s0), 0)
    index = {first: 0}
    order = [first]
    step = []
    k = 0
    while k < len(order):
        v, m, _ = order[k]
        k += 1
        _, _, x = M.labels[v]
        row = []
        for i in range(alphabet.n_inputs):
            u = M.moves[v][i & x]
            nxt = respond(u, f.update(u, m))
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            row.append(index[nxt])
        step.append(tuple(row))
    names = tuple(f"t{k}" for k in range(len(order)))
    label = tuple(o for _, _, o in order)
    declared = tuple(M.labels[v][2] for v, _, _ in order)
    return Transducer(alphabet, names, 0, tuple(step), label, declared)


def strategy_from_transducer(M: ParityMDP, T: Transducer) -> FiniteMemoryStrategy:
    """The strategy on a sensing or synthesis arena that follows ``T``.

    In sensing arenas it senses exactly the inputs ``T`` senses in its
    current state.  The memory is the current state of ``T``; it advances on
    arrival at a system state, whose input already fixes the successor.
    """
    alphabet = T.alphabet
    sensing = M.labels[M.initial][0] == "start"
    sensed = T.sensed_per_state

    def choice(t):
        x = sensed[t] if sensing else alphabet.full
        return alphabet.n_inputs + x * alphabet.n_outputs

    def next_fn(w, mem):
        kind = M.labels[w][0]
        if kind == "start":
            return "start"
        if mem is None or mem == "start":
            return T.initial
        if kind == "sys":
            return T.step[mem][M.labels[w][3]]
        return mem

    def act_fn(s, mem):
        if mem == "start":
            return choice(T.initial)
        return choice(mem) + T.label[mem]

    return FiniteMemoryStrategy.from_functions(
        M.owner.__getitem__, lambda v: M.moves[v].items(), [M.initial], None, next_fn, act_fn)
