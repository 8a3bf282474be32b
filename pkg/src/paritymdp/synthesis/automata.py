"""Signal alphabets and deterministic/universal automata over them.

A letter is a valuation of the signals, encoded as an integer.  For a plain
alphabet the letter is ``i | o << |I|`` where ``i`` and ``o`` are bitmasks
over the ordered input and output signals.  A *sensing* alphabet also
carries the set ``x`` of sensed inputs: ``i | x << |I| | o << 2|I|``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from ..formats import FormatError
from ..games import has_cycle_with_parity


class AlphabetMismatch(ValueError):
    """Automata combined in one construction use different alphabets."""


class NotSafety(ValueError):
    """The automaton is outside the safety fragment."""


@dataclass(frozen=True)
class SignalAlphabet:
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    sensing: bool = False

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        names = self.inputs + self.outputs
        if len(set(names)) != len(names):
            raise AlphabetMismatch(f"signal names must be distinct: {list(names)}")

    @property
    def n_in(self) -> int:
        return len(self.inputs)

    @property
    def n_out(self) -> int:
        return len(self.outputs)

    @property
    def n_inputs(self) -> int:
        """Number of input valuations."""
        return 1 << self.n_in

    @property
    def n_outputs(self) -> int:
        return 1 << self.n_out

    @property
    def size(self) -> int:
        bits = self.n_in * (2 if self.sensing else 1) + self.n_out
        return 1 << bits

    @property
    def full(self) -> int:
        """Bitmask of all inputs."""
        return self.n_inputs - 1

    def plain(self) -> "SignalAlphabet":
        return SignalAlphabet(self.inputs, self.outputs, False)

    def with_sensing(self) -> "SignalAlphabet":
        return SignalAlphabet(self.inputs, self.outputs, True)

    def letter(self, i: int, o: int, x: int | None = None) -> int:
        if self.sensing:
            if x is None:
                raise ValueError("a sensing letter needs a sensed set")
            return i | (x << self.n_in) | (o << (2 * self.n_in))
        return i | (o << self.n_in)

    def split(self, letter: int) -> tuple[int, int | None, int]:
        """``(i, x, o)`` of a letter; ``x`` is ``None`` for plain alphabets."""
        mask = self.full
        i = letter & mask
        if self.sensing:
            return i, (letter >> self.n_in) & mask, letter >> (2 * self.n_in)
        return i, None, letter >> self.n_in

    def letters(self) -> range:
        return range(self.size)

    def input_mask(self, names: Iterable[str]) -> int:
        return _mask(self.inputs, names, "input")

    def output_mask(self, names: Iterable[str]) -> int:
        return _mask(self.outputs, names, "output")

    def input_names(self, i: int) -> list[str]:
        return [p for k, p in enumerate(self.inputs) if i >> k & 1]

    def output_names(self, o: int) -> list[str]:
        return [p for k, p in enumerate(self.outputs) if o >> k & 1]

    def show_inputs(self, i: int) -> str:
        return "{" + ",".join(self.input_names(i)) + "}"

    def show_outputs(self, o: int) -> str:
        return "{" + ",".join(self.output_names(o)) + "}"

    def show(self, letter: int) -> str:
        i, x, o = self.split(letter)
        names = self.input_names(i) + self.output_names(o)
        text = "{" + ",".join(names) + "}"
        if x is not None:
            text += "/sensed" + self.show_inputs(x)
        return text

    def letter_to_json(self, letter: int):
        i, x, o = self.split(letter)
        if x is None:
            return self.input_names(i) + self.output_names(o)
        return {"inputs": self.input_names(i), "sensed": self.input_names(x),
                "outputs": self.output_names(o)}


def _mask(order, names, what):
    out = 0
    for p in names:
        if p not in order:
            raise FormatError(f"unknown {what} signal {p!r}")
        out |= 1 << order.index(p)
    return out


def subsets(mask: int):
    """All submasks of ``mask`` in increasing order."""
    out = []
    sub = mask
    while True:
        out.append(sub)
        if sub == 0:
            break
        sub = (sub - 1) & mask
    return sorted(out)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


@dataclass(frozen=True)
class InputDistribution:
    """Distribution of the environment's input valuation at every step.

    Only the uniform distribution ships; ``probability(i)`` is exact.
    """

    n_inputs: int
    kind: str = "uniform"

    def __post_init__(self):
        if self.kind != "uniform":
            raise ValueError(f"unsupported input distribution {self.kind!r}")

    def probability(self, i: int) -> Fraction:
        return Fraction(1, self.n_inputs)

    def class_probability(self, j: int, x: int) -> Fraction:
        """Probability that the input agrees with ``j`` on the sensed set ``x``."""
        return sum((self.probability(i) for i in range(self.n_inputs) if i & x == j & x),
                   Fraction(0))

    @classmethod
    def uniform(cls, alphabet: SignalAlphabet) -> "InputDistribution":
        return cls(alphabet.n_inputs)


# -------------------------------------------------------------------- automata


@dataclass(frozen=True, eq=False)
class _Automaton:
    alphabet: SignalAlphabet
    states: tuple[str, ...]
    initial: int
    delta: tuple[tuple, ...]

    kind = "?"

    @property
    def n(self) -> int:
        return len(self.states)

    def state_id(self, name: str) -> int:
        return self.states.index(name)

    def step(self, q: int, letter: int):
        return self.delta[q][letter]


@dataclass(frozen=True, eq=False)
class Dpw(_Automaton):
    """Deterministic parity automaton; ``delta[q][letter]`` is a state."""

    rank: tuple[int, ...] = ()
    kind = "dpw"

    def as_upw(self) -> "Upw":
        delta = tuple(tuple(frozenset([t]) for t in row) for row in self.delta)
        return Upw(self.alphabet, self.states, self.initial, delta, self.rank)

    def run(self, word: Iterable[int]) -> list[int]:
        q = self.initial
        out = [q]
        for letter in word:
            q = self.delta[q][letter]
            out.append(q)
        return out

    def accepts_lasso(self, prefix, loop) -> bool:
        """Acceptance of the ultimately periodic word ``prefix · loop^ω``."""
        q = self.initial
        for letter in prefix:
            q = self.delta[q][letter]
        seen = {}
        k = 0
        while (q, k) not in seen:
            seen[(q, k)] = len(seen)
            q = self.delta[q][loop[k]]
            k = (k + 1) % len(loop)
        first = seen[(q, k)]
        cycle = [s for (s, _), idx in seen.items() if idx >= first]
        return max(self.rank[s] for s in cycle) % 2 == 0


@dataclass(frozen=True, eq=False)
class Dfw(_Automaton):
    """Deterministic automaton on finite words."""

    accepting: frozenset = frozenset()
    kind = "dfw"


@dataclass(frozen=True, eq=False)
class Upw(_Automaton):
    """Universal parity automaton; ``delta[q][letter]`` is a nonempty frozenset."""

    rank: tuple[int, ...] = ()
    kind = "upw"

    def accepts_lasso(self, prefix, loop) -> bool:
        """All runs on ``prefix · loop^ω`` are accepting."""
        current = {self.initial}
        for letter in prefix:
            current = set().union(*(self.delta[q][letter] for q in current))
        # graph over (state, loop position); a reachable cycle with odd maximum rejects
        nodes = {(q, 0) for q in current}
        stack = list(nodes)
        while stack:
            q, k = stack.pop()
            for t in self.delta[q][loop[k]]:
                v = (t, (k + 1) % len(loop))
                if v not in nodes:
                    nodes.add(v)
                    stack.append(v)
        def succ(v):
            q, k = v
            return [(t, (k + 1) % len(loop)) for t in self.delta[q][loop[k]]]

        return not has_cycle_with_parity(nodes, succ, lambda v: self.rank[v[0]], 1)


def check_total(A: _Automaton):
    size = A.alphabet.size
    for q, row in enumerate(A.delta):
        if len(row) != size:
            raise FormatError(f"state {A.states[q]!r} lacks transitions")
        for t in row:
            targets = t if isinstance(t, frozenset) else (t,)
            if not targets:
                raise FormatError(f"state {A.states[q]!r} has an empty transition set")
            for u in targets:
                if not 0 <= u < A.n:
                    raise FormatError(f"transition to unknown state {u}")


def same_alphabet(*automata, sensing=None):
    base = automata[0].alphabet.plain()
    for A in automata[1:]:
        if A.alphabet.plain() != base:
            raise AlphabetMismatch(
                f"alphabets differ: {base.inputs}/{base.outputs} vs "
                f"{A.alphabet.inputs}/{A.alphabet.outputs}")
    if sensing is not None:
        for A in automata:
            if A.alphabet.sensing != sensing:
                want = "sensing" if sensing else "plain"
                raise AlphabetMismatch(f"expected a {want} alphabet")


# ------------------------------------------------------------------------ JSON


def _letter_matches(alphabet: SignalAlphabet, spec, letter: int) -> bool:
    i, x, o = alphabet.split(letter)
    if "letter" in spec:
        want = spec["letter"]
        if alphabet.sensing:
            if not isinstance(want, dict):
                raise FormatError("sensing letters are objects with inputs/sensed/outputs")
            return (i == alphabet.input_mask(want.get("inputs", []))
                    and x == alphabet.input_mask(want.get("sensed", []))
                    and o == alphabet.output_mask(want.get("outputs", [])))
        if not isinstance(want, list):
            raise FormatError("a letter is a list of signal names")
        ins = [p for p in want if p in alphabet.inputs]
        outs = [p for p in want if p not in alphabet.inputs]
        return i == alphabet.input_mask(ins) and o == alphabet.output_mask(outs)
    guard = spec.get("when", {})
    if not isinstance(guard, dict):
        raise FormatError("'when' must map signal names to booleans")
    for p, val in guard.items():
        if p == "sensed":
            if not alphabet.sensing:
                raise FormatError("'sensed' guard on a plain alphabet")
            for q, v in val.items():
                if q not in alphabet.inputs:
                    _unknown(q)
                if bool(x >> alphabet.inputs.index(q) & 1) != bool(v):
                    return False
            continue
        if p in alphabet.inputs:
            bit = i >> alphabet.inputs.index(p) & 1
        elif p in alphabet.outputs:
            bit = o >> alphabet.outputs.index(p) & 1
        else:
            _unknown(p)
        if bool(bit) != bool(val):
            return False
    return True


def _unknown(p):
    raise FormatError(f"unknown signal {p!r}")


def automaton_from_json(doc):
    """Parse the JSON automaton format.

    Transitions are tried in order and the first one matching a letter
    decides it.  A transition names its letter exactly (``letter``: a list of
    signal names, or for sensing alphabets an object with ``inputs``,
    ``sensed`` and ``outputs``) or by a partial valuation (``when``: signal
    name to boolean, plus an optional ``sensed`` map); ``when: {}`` matches
    every letter.
    """
    if not isinstance(doc, dict):
        raise FormatError("automaton must be a JSON object")
    kind = doc.get("kind")
    if kind not in ("dpw", "dfw", "upw"):
        raise FormatError(f"unknown automaton kind {kind!r}")
    for key in ("inputs", "outputs", "states", "initial", "transitions"):
        if key not in doc:
            raise FormatError(f"automaton lacks {key!r}")
    try:
        alphabet = SignalAlphabet(doc["inputs"], doc["outputs"], bool(doc.get("sensing", False)))
    except AlphabetMismatch as exc:
        raise FormatError(str(exc)) from exc
    names, rank, accepting = [], [], set()
    for rec in doc["states"]:
        sid = str(rec["id"])
        if sid in names:
            raise FormatError(f"duplicate state {sid!r}")
        names.append(sid)
        if kind == "dfw":
            if rec.get("accepting", False):
                accepting.add(len(names) - 1)
        else:
            if "rank" not in rec:
                raise FormatError(f"state {sid!r} lacks a rank")
            r = rec["rank"]
            if not isinstance(r, int) or isinstance(r, bool) or r < 0:
                raise FormatError(f"state {sid!r}: rank must be a nonnegative integer")
            rank.append(r)
    index = {s: k for k, s in enumerate(names)}

    def sid(x, where):
        if str(x) not in index:
            raise FormatError(f"{where}: unknown state {x!r}")
        return index[str(x)]

    if str(doc["initial"]) not in index:
        raise FormatError(f"unknown initial state {doc['initial']!r}")
    initial = index[str(doc["initial"])]
    delta = [[None] * alphabet.size for _ in names]
    for k, tr in enumerate(doc["transitions"]):
        where = f"transition {k}"
        q = sid(tr.get("from"), where)
        if "to" not in tr:
            raise FormatError(f"{where} lacks 'to'")
        if kind == "upw":
            to = tr["to"] if isinstance(tr["to"], list) else [tr["to"]]
            target = frozenset(sid(t, where) for t in to)
            if not target:
                raise FormatError(f"{where}: empty target set")
        else:
            target = sid(tr["to"], where)
        for letter in alphabet.letters():
            if delta[q][letter] is None and _letter_matches(alphabet, tr, letter):
                delta[q][letter] = target
    for q, row in enumerate(delta):
        missing = [alphabet.show(a) for a, t in enumerate(row) if t is None]
        if missing:
            raise FormatError(f"state {names[q]!r} has no transition on {missing[0]}")
    args = (alphabet, tuple(names), initial, tuple(tuple(r) for r in delta))
    if kind == "dpw":
        return Dpw(*args, rank=tuple(rank))
    if kind == "upw":
        return Upw(*args, rank=tuple(rank))
    return Dfw(*args, accepting=frozenset(accepting))


def automaton_to_json(A) -> dict:
    alphabet = A.alphabet
    states = []
    for q, name in enumerate(A.states):
        if A.kind == "dfw":
            states.append({"id": name, "accepting": q in A.accepting})
        else:
            states.append({"id": name, "rank": A.rank[q]})
    transitions = []
    for q, row in enumerate(A.delta):
        for letter, t in enumerate(row):
            to = sorted(A.states[u] for u in t) if A.kind == "upw" else A.states[t]
            transitions.append({"from": A.states[q], "letter": alphabet.letter_to_json(letter),
                                "to": to})
    doc = {"kind": A.kind, "inputs": list(alphabet.inputs), "outputs": list(alphabet.outputs)}
    if alphabet.sensing:
        doc["sensing"] = True
    doc.update({"states": states, "initial": A.states[A.initial], "transitions": transitions})
    return doc
