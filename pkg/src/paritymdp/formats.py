"""JSON reading and writing for arenas and exact numbers."""

from __future__ import annotations

import json
import re
from fractions import Fraction

from .model import ParityMDP


class FormatError(ValueError):
    """Malformed input document."""


_FRACTION = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(\d+)\s*)?$")


def parse_fraction(value, what="value") -> Fraction:
    """Exact number from an integer or a ``"p/q"`` / ``"p"`` string.

    Floats and decimal literals are rejected so no rounding can sneak in.
    """
    if isinstance(value, bool):
        raise FormatError(f"{what}: boolean is not a number")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        m = _FRACTION.match(value)
        if m:
            den = int(m.group(2)) if m.group(2) else 1
            if den == 0:
                raise FormatError(f"{what}: zero denominator in {value!r}")
            return Fraction(int(m.group(1)), den)
    raise FormatError(f"{what}: {value!r} is not an integer or a fraction string")


def fraction_str(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _number_out(x):
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else fraction_str(x)


def _require(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise FormatError(f"{where}: missing field {key!r}")
    return obj[key]


def arena_from_json(doc) -> ParityMDP:
    """Build an arena from a parsed JSON document.

    State ids and action names may be strings or integers; they become the
    reporting names while dense integer ids are assigned in order of
    appearance.  Unknown top-level keys are ignored.
    """
    if not isinstance(doc, dict):
        raise FormatError("arena document must be an object")
    states = _require(doc, "states", "arena")
    transitions = _require(doc, "transitions", "arena")
    if not isinstance(states, list) or not isinstance(transitions, list):
        raise FormatError("arena: states and transitions must be lists")
    index: dict[str, int] = {}
    names, owner, cost, rank = [], [], [], []
    for k, rec in enumerate(states):
        where = f"states[{k}]"
        sid = str(_require(rec, "id", where))
        if sid in index:
            raise FormatError(f"{where}: duplicate state id {sid!r}")
        o = _require(rec, "owner", where)
        if o not in (1, 2):
            raise FormatError(f"{where}: owner must be 1 or 2")
        r = _require(rec, "rank", where)
        if not isinstance(r, int) or isinstance(r, bool):
            raise FormatError(f"{where}: rank must be an integer")
        c = parse_fraction(_require(rec, "cost", where), f"{where}.cost")
        index[sid] = len(names)
        names.append(sid)
        owner.append(o)
        cost.append(c.numerator if c.denominator == 1 else c)
        rank.append(r)
    action_ids: dict[str, int] = {}
    declared = doc.get("actions", [])
    if not isinstance(declared, list):
        raise FormatError("arena: actions must be a list")
    for name in declared:
        action_ids.setdefault(str(name), len(action_ids))
    moves = [dict() for _ in names]
    prob = [dict() for _ in names]
    for k, rec in enumerate(transitions):
        where = f"transitions[{k}]"
        src = str(_require(rec, "from", where))
        dst = str(_require(rec, "to", where))
        act = str(_require(rec, "action", where))
        for x in (src, dst):
            if x not in index:
                raise FormatError(f"{where}: unknown state {x!r}")
        a = action_ids.setdefault(act, len(action_ids))
        s = index[src]
        if a in moves[s]:
            raise FormatError(f"{where}: duplicate action {act!r} at state {src!r}")
        moves[s][a] = index[dst]
        if "prob" in rec:
            prob[s][a] = parse_fraction(rec["prob"], f"{where}.prob")
        elif owner[s] == 2:
            raise FormatError(f"{where}: Player-2 transition without prob")
    initial = str(_require(doc, "initial", "arena"))
    if initial not in index:
        raise FormatError(f"arena: initial state {initial!r} is not declared")
    max_rank = doc.get("max_rank")
    if max_rank is not None and (not isinstance(max_rank, int) or isinstance(max_rank, bool)):
        raise FormatError("arena: max_rank must be an integer")
    return ParityMDP(
        owner=tuple(owner),
        moves=tuple(moves),
        prob=tuple(prob),
        cost=tuple(cost),
        rank=tuple(rank),
        initial=index[initial],
        max_rank=max_rank,
        state_names=tuple(names),
        action_names={a: name for name, a in action_ids.items()},
    )


def arena_to_json(M: ParityMDP) -> dict:
    doc = {
        "states": [
            {"id": M.name(s), "owner": M.owner[s], "cost": _number_out(M.cost[s]),
             "rank": M.rank[s]}
            for s in M.states
        ],
        "initial": M.name(M.initial) if M.initial is not None else None,
        "transitions": [],
    }
    used = sorted({a for s in M.states for a in M.moves[s]})
    if used:
        doc["actions"] = [M.action_names.get(a, str(a)) for a in range(used[-1] + 1)]
    if M.max_rank is not None:
        doc["max_rank"] = M.max_rank
    for s in M.states:
        for a, t in sorted(M.moves[s].items()):
            rec = {"from": M.name(s), "action": M.action_names.get(a, str(a)), "to": M.name(t)}
            if a in M.prob[s]:
                rec["prob"] = fraction_str(M.prob[s][a])
            doc["transitions"].append(rec)
    return doc


def load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from exc


def load_arena(path) -> ParityMDP:
    return arena_from_json(load_json(path))


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
