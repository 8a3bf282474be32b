"""Two strategy families for the specification
(GF a and G b) or G(not b -> X G(a <-> b)), one input a and one output b.

``stubborn(n)`` is a finite transducer: it always reads a, outputs b until it
has seen n consecutive letters without a, then outputs not-b once and copies
a into b forever.  ``GamblingController`` is the unbounded-memory strategy
on the sensing game: round r reads a for r*block letters; if a showed up it
reads nothing for 2^r letters, otherwise it switches to copying.
"""

from paritymdp.synthesis import SignalAlphabet, Transducer
from paritymdp.synthesis.construct import system_action

A_BIT = B_BIT = 1


def stubborn(n: int, alphabet: SignalAlphabet | None = None) -> Transducer:
    alphabet = alphabet or SignalAlphabet(("a",), ("b",))
    names = [f"c{k}" for k in range(n)] + ["copy0", "copy1"]
    copy = {0: n, 1: n + 1}
    step = []
    for k in range(n):
        quiet = k + 1 if k + 1 < n else copy[0]
        step.append((quiet, 0))
    step += [(copy[0], copy[1])] * 2
    label = [B_BIT] * n + [0, B_BIT]
    return Transducer(alphabet, tuple(names), 0, tuple(step), tuple(label))


class GamblingController:
    """Controller (start/act/arrive) for the sensing game of the
    specification; memory is unbounded through the round counter."""

    def __init__(self, M, alphabet: SignalAlphabet, block: int = 8):
        self.M = M
        self.alphabet = alphabet.plain()
        self.block = block
        self.full = self.alphabet.full
        self.reset()

    def reset(self):
        self.mode = "sense"
        self.round = 1
        self.count = 0
        self.seen = False
        self.rounds_done = 0

    def start(self, s):
        self.reset()

    def arrive(self, t):
        pass

    def _choose(self, x, o):
        return system_action(self.alphabet, x, o)

    def act(self, s):
        label = self.M.labels[s]
        if label[0] == "start":
            return self._choose(self.full, B_BIT)
        _, _, x, i = label
        if self.mode == "copy":
            return self._choose(self.full, B_BIT if i & A_BIT else 0)
        self.count += 1
        if self.mode == "sense":
            self.seen |= bool(i & A_BIT)
            if self.count < self.round * self.block:
                return self._choose(self.full, B_BIT)
            self.count = 0
            if self.seen:
                self.mode = "blind"
                return self._choose(0, B_BIT)
            self.mode = "copy"
            return self._choose(self.full, 0)
        if self.count < 2 ** self.round:
            return self._choose(0, B_BIT)
        self.count = 0
        self.round += 1
        self.rounds_done += 1
        self.mode = "sense"
        self.seen = False
        return self._choose(self.full, B_BIT)

    def snapshot(self):
        return (self.mode, self.round, self.count, self.seen, self.rounds_done)

    def restore(self, snap):
        self.mode, self.round, self.count, self.seen, self.rounds_done = snap

    def controller(self):
        return self


def explore(M, ctl, letters: int):
    """Every play of the sensing game under ``ctl`` for ``letters`` letters,
    the environment branching over all inputs; yields the automaton states
    visited (as names) along each branch."""
    ctl.start(M.initial)
    stack = [(M.moves[M.initial][ctl.act(M.initial)], ctl.snapshot(), 0, ())]
    while stack:
        v, snap, depth, trace = stack.pop()
        trace = trace + (M.labels[v][1],)
        if depth == letters:
            yield trace
            continue
        for j, u in sorted(M.moves[v].items()):
            ctl.restore(snap)
            w = M.moves[u][ctl.act(u)]
            stack.append((w, ctl.snapshot(), depth + 1, trace))
