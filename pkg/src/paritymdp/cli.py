"""Command-line interface.

Every command reads one JSON file and prints one JSON report on standard
output.  Exit status: 0 on success, 1 on a domain error (unrealizable
specification, automaton outside the safety fragment, failed check, ...),
2 on malformed input.  Reports are byte-identical across runs unless
``--timing`` is given.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import __version__
from .decomposition import max_end_components, max_gecs
from .formats import FormatError, arena_from_json, dumps, fraction_str
from .games import FiniteMemoryStrategy, NotGEC, solve_parity, super_good_states
from .mdp import min_mean_payoff
from .model import ArenaError, ParityMDP, validate
from .strategy import (certify_finite_strategy, epsilon_strategy_gec, finite_epsilon_strategy,
                       global_epsilon_strategy, simulate)
from .surecost import UNREALIZABLE, Unrealizable, cost_sure_finite, cost_sure_infinite
from .synthesis import (AlphabetMismatch, NotSafety, NotWinning, PenaltySpec, automaton_from_json,
                        dpw_to_game, expected_sizes, extract_transducer, penalties_mdp,
                        sensing_automaton, sensing_game)


class DomainError(Exception):
    """Reported with exit status 1."""

    def __init__(self, kind, message, detail=None):
        super().__init__(message)
        self.kind = kind
        self.detail = detail


def fixture_paths() -> list[Path]:
    root = resources.files("paritymdp") / "fixtures"
    return sorted(Path(str(p)) for p in root.iterdir() if p.name.endswith(".json"))


def _read(path):
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc
    return doc, hashlib.sha256(raw).hexdigest()


def _arena(doc) -> ParityMDP:
    if isinstance(doc, dict) and doc.get("kind") not in (None, "arena"):
        raise FormatError(f"expected an arena, found a {doc.get('kind')!r} document")
    return arena_from_json(doc)


def _check_signals(A, limit):
    a = A.alphabet
    if a.n_in > limit or a.n_out > limit:
        raise DomainError("TooManySignals",
                          f"{a.n_in} inputs / {a.n_out} outputs exceed --max-signals {limit}")


def _automaton(doc, limit, kind="dpw"):
    A = automaton_from_json(doc)
    if A.kind != kind:
        raise FormatError(f"expected a {kind} automaton, found {A.kind}")
    _check_signals(A, limit)
    return A


def _names(M, states):
    return sorted(M.name(s) for s in states)


def _component_record(M, comp):
    rec = {
        "states": _names(M, comp.states),
        "kind": comp.kind,
        "max_rank": comp.max_rank,
        "max_rank_states": _names(M, comp.max_rank_states),
    }
    if comp.value is not None:
        rec["value"] = fraction_str(comp.value)
    return rec


def _strategy_json(M, f):
    if isinstance(f, FiniteMemoryStrategy):
        return f.to_json(M.name, lambda a: M.action_names.get(a, str(a)))
    return {M.name(s): M.action_names.get(a, str(a)) for s, a in sorted(f.items())}


def _value_str(v):
    return "unrealizable" if v is UNREALIZABLE else fraction_str(v)


# ------------------------------------------------------------------ commands


def cmd_validate(args, doc):
    kind = doc.get("kind") if isinstance(doc, dict) else None
    if kind in ("dpw", "dfw", "upw"):
        A = automaton_from_json(doc)
        return {"kind": A.kind, "states": A.n, "inputs": list(A.alphabet.inputs),
                "outputs": list(A.alphabet.outputs), "diagnostics": []}
    if kind == "penalties":
        A, spec = _penalty_bundle(doc, args.max_signals)
        return {"kind": "penalties", "states": A.n, "monitors": len(spec.monitors),
                "diagnostics": []}
    M = _arena(doc)
    diags = validate(M)
    records = [{"state": None if d.state is None else M.name(d.state),
                "action": None if d.action is None else M.action_names.get(d.action, str(d.action)),
                "message": d.message} for d in diags]
    if records:
        raise DomainError("InvalidArena", f"{len(records)} problem(s) found", records)
    return {"kind": "arena", "states": M.n, "diagnostics": []}


def _checked_arena(doc):
    M = _arena(doc)
    diags = validate(M)
    if diags:
        raise DomainError("InvalidArena", str(diags[0]), [str(d) for d in diags])
    return M


def cmd_mec(args, doc):
    M = _checked_arena(doc)
    return {"components": [_component_record(M, c) for c in max_end_components(M)]}


def cmd_gec(args, doc):
    M = _checked_arena(doc)
    return {"components": [_component_record(M, c) for c in max_gecs(M)]}


def cmd_sgec_check(args, doc):
    M = _checked_arena(doc)
    if args.states:
        comps = [M.ids(x.strip() for x in args.states.split(","))]
    else:
        comps = [c.states for c in max_gecs(M)]
    out = []
    for C in comps:
        try:
            sg = super_good_states(M, C)
        except (NotGEC, ArenaError) as exc:
            raise DomainError(type(exc).__name__, str(exc)) from exc
        rec = {"states": _names(M, C), "is_sgec": sg.is_sgec,
               "super_good_states": _names(M, sg.states)}
        if sg.witness is not None:
            rec["witness"] = _strategy_json(M, sg.witness)
        out.append(rec)
    return {"components": out}


def cmd_parity(args, doc):
    M = _checked_arena(doc)
    sol = solve_parity(M)
    return {
        "W1": _names(M, sol.W1),
        "W2": _names(M, sol.W2),
        "sigma1": _strategy_json(M, sol.sigma1),
        "sigma2": _strategy_json(M, sol.sigma2),
    }


def cmd_mdp_value(args, doc):
    M = _checked_arena(doc)
    values, policy = min_mean_payoff(M)
    return {
        "values": {M.name(s): fraction_str(values[s]) for s in M.states},
        "strategy": _strategy_json(M, policy),
    }


def _sure_cost(M, memory):
    res = cost_sure_infinite(M) if memory == "infinite" else cost_sure_finite(M)
    if not res.realizable:
        raise DomainError("Unrealizable", "the initial state is not sure-winning")
    return res


def _result_json(M, res):
    Mp = res.arena
    return {
        "value": _value_str(res.value),
        "memory": res.memory,
        "components": [_component_record(M, c) for c in res.components],
        "pruned_states": _names(M, res.pruned_states),
        "reduced_costs": {M.name(Mp.origin[s]): fraction_str(Fraction(c))
                          for s, c in enumerate(res.reduced.cost)},
    }


def cmd_solve(args, doc):
    M = _checked_arena(doc)
    res = _sure_cost(M, args.memory)
    out = _result_json(M, res)
    if args.emit_strategy:
        if args.memory != "finite":
            raise DomainError("NoFiniteStrategy",
                              "only the finite-memory value has finite-memory witnesses")
        f = finite_epsilon_strategy(M)
        winning, value = certify_finite_strategy(M, f)
        Path(args.emit_strategy).write_text(dumps(_strategy_json(M, f)))
        out["strategy"] = {"path": str(args.emit_strategy), "memory": f.size,
                           "sure_winning": winning, "value": fraction_str(value)}
    return out


def _load_strategy(M, spec):
    if spec == "builtin:global":
        return global_epsilon_strategy(M)
    if spec == "builtin:finite":
        return finite_epsilon_strategy(M)
    if spec == "builtin:gec":
        comps = [c for c in max_gecs(M) if M.initial in c.states]
        if not comps:
            raise DomainError("NotGEC", "the initial state lies in no good end component")
        return epsilon_strategy_gec(M, comps[0])
    doc, _ = _read(spec)
    actions = {name: a for a, name in M.action_names.items()}

    def action_id(name):
        if name not in actions:
            raise FormatError(f"unknown action {name!r} in strategy")
        return actions[name]

    def state_id(name):
        try:
            return M.state_id(name)
        except ValueError:
            raise FormatError(f"unknown state {name!r} in strategy") from None

    try:
        if "act" in doc:
            return FiniteMemoryStrategy.from_json(doc, state_id, action_id)
        return {state_id(s): action_id(a) for s, a in doc.items()}
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"malformed strategy file: {exc}") from exc


def _simulate_one(job):
    M, f, horizon, seed, stream = job
    return simulate(M, f, horizon, seed=seed, stream=stream)


def _workers():
    raw = os.environ.get("PARITYMDP_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def cmd_simulate(args, doc):
    M = _checked_arena(doc)
    f = _load_strategy(M, args.strategy)
    jobs = [(M, f, args.horizon, args.seed, k) for k in range(args.seeds)]
    workers = min(_workers(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(_simulate_one, jobs))
    else:
        stats = [_simulate_one(j) for j in jobs]
    means = [s.mean_cost for s in stats]
    agg = sum(means, Fraction(0)) / len(means)
    out = {
        "strategy": args.strategy,
        "trajectories": [s.to_json(M.name) for s in stats],
        "aggregate": {"mean_cost": fraction_str(agg), "mean_cost_float": float(agg),
                      "min": float(min(means)), "max": float(max(means))},
    }
    if isinstance(f, FiniteMemoryStrategy):
        winning, value = certify_finite_strategy(M, f)
        out["certified"] = {"sure_winning": winning, "value": fraction_str(value)}
    return out


def _penalty_bundle(doc, limit):
    if doc.get("kind") != "penalties":
        raise FormatError("expected a penalties document")
    if "specification" not in doc:
        raise FormatError("penalties document lacks 'specification'")
    A = _automaton(doc["specification"], limit)
    monitors, gamma = [], []
    for k, rec in enumerate(doc.get("monitors", [])):
        if "automaton" not in rec:
            raise FormatError(f"monitor {k} lacks 'automaton'")
        monitors.append(_automaton(rec["automaton"], limit, "dfw"))
        g = rec.get("penalty", 1)
        if not isinstance(g, int) or isinstance(g, bool) or g < 0:
            raise FormatError(f"monitor {k}: penalty must be a nonnegative integer")
        gamma.append(g)
    return A, PenaltySpec(monitors, gamma)


def cmd_penalties(args, doc):
    A, spec = _penalty_bundle(doc, args.max_signals)
    M = penalties_mdp(A, spec)
    res = _sure_cost(M, args.memory)
    return {"value": _value_str(res.value), "memory": args.memory, "states": M.n,
            "expected_states": expected_sizes(A, spec)["penalties"],
            "components": [_component_record(M, c) for c in res.components]}


def _sensing_inputs(args, doc):
    A = _automaton(doc, args.max_signals)
    if A.alphabet.sensing:
        return A, A
    D = None
    if args.determinized:
        ddoc, _ = _read(args.determinized)
        D = _automaton(ddoc, args.max_signals)
    return A, sensing_automaton(A, D)


def cmd_sensing(args, doc):
    A, D = _sensing_inputs(args, doc)
    M = sensing_game(D)
    res = _sure_cost(M, args.mode)
    return {"value": _value_str(res.value), "mode": args.mode, "states": M.n,
            "expected_states": 1 + D.n * D.alphabet.n_inputs * (1 + D.alphabet.n_inputs),
            "determinized_states": D.n}


def cmd_extract(args, doc):
    A = _automaton(doc, args.max_signals)
    if args.game == "plain" and A.alphabet.sensing:
        raise FormatError("the plain synthesis game needs an automaton without sensing letters")
    if args.game == "sensing":
        _, D = _sensing_inputs(args, doc)
        M = sensing_game(D)
    else:
        M = penalties_mdp(A, PenaltySpec())
    try:
        f = finite_epsilon_strategy(M)
        T = extract_transducer(M, f, A.alphabet)
    except Unrealizable as exc:
        raise DomainError("Unrealizable", str(exc)) from exc
    _, value = certify_finite_strategy(M, f)
    small = T.minimized()
    out = {"transducer": small.to_json(), "states": small.n, "unminimized_states": T.n,
           "strategy_value": fraction_str(value)}
    if args.game == "sensing":
        out["sensing_cost"] = fraction_str(small.sensing_cost())
    if not A.alphabet.sensing:
        out["realizes_specification"] = small.realizes(A)
    if args.dot:
        Path(args.dot).write_text(small.to_dot())
        out["dot"] = str(args.dot)
    return out


COMMANDS = {
    "validate": cmd_validate,
    "mec": cmd_mec,
    "gec": cmd_gec,
    "sgec-check": cmd_sgec_check,
    "parity": cmd_parity,
    "mdp-value": cmd_mdp_value,
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "penalties": cmd_penalties,
    "sensing": cmd_sensing,
    "extract-transducer": cmd_extract,
}


# ---------------------------------------------------------------- --check


def _expected_checks(path, doc, max_signals):
    """Yield ``(key, expected, actual)`` for the expectations of a fixture."""
    expected = doc.get("expected", {}) if isinstance(doc, dict) else {}
    ns = argparse.Namespace(max_signals=max_signals, determinized=None, dot=None,
                            emit_strategy=None, states=None)
    for key, want in sorted(expected.items()):
        if key.startswith("solve --memory "):
            ns.memory = key.split()[-1]
            got = cmd_solve(ns, doc)["value"]
        elif key.startswith("penalties --memory "):
            ns.memory = key.split()[-1]
            got = cmd_penalties(ns, doc)["value"]
        elif key.startswith("sensing --mode "):
            ns.mode = key.split()[-1]
            got = cmd_sensing(ns, doc)["value"]
        elif key == "size sensing":
            got = cmd_sensing(argparse.Namespace(**{**vars(ns), "mode": "infinite"}), doc)["states"]
        elif key == "size penalties":
            A, spec = _penalty_bundle(doc, max_signals)
            got = penalties_mdp(A, spec).n
        elif key == "size game":
            got = dpw_to_game(_automaton(doc, max_signals)).n
        elif key == "extract-transducer states":
            ns.game = "sensing"
            got = cmd_extract(ns, doc)["states"]
        else:
            raise FormatError(f"{path}: unknown expectation {key!r}")
        yield key, want, got


def run_checks(paths, max_signals):
    results = []
    ok = True
    for path in paths:
        doc, digest = _read(path)
        for key, want, got in _expected_checks(path, doc, max_signals):
            passed = str(want) == str(got)
            ok &= passed
            results.append({"fixture": Path(path).name, "check": key, "expected": str(want),
                            "actual": str(got), "passed": passed})
    return ok, results


# ------------------------------------------------------------------- driver


def build_parser():
    p = argparse.ArgumentParser(prog="paritymdp", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"paritymdp {__version__}")
    p.add_argument("--check", action="store_true",
                   help="verify the expectations stored in the input file "
                        "(or, without a command, in every shipped fixture)")
    p.add_argument("--timing", action="store_true", help="include wall-clock timing")
    p.add_argument("--max-signals", type=int, default=4,
                   help="largest number of input or output signals accepted (default 4)")
    sub = p.add_subparsers(dest="command")
    for name in ("validate", "mec", "gec", "parity", "mdp-value"):
        sub.add_parser(name).add_argument("file")
    s = sub.add_parser("sgec-check")
    s.add_argument("file")
    s.add_argument("--states", help="comma-separated component (default: every maximal GEC)")
    s = sub.add_parser("solve")
    s.add_argument("file")
    s.add_argument("--memory", choices=("infinite", "finite"), default="infinite")
    s.add_argument("--emit-strategy", metavar="PATH",
                   help="write a near-optimal finite-memory strategy (finite memory only)")
    s = sub.add_parser("simulate")
    s.add_argument("file")
    s.add_argument("--horizon", type=int, default=100_000)
    s.add_argument("--seeds", type=int, default=1, help="number of trajectories")
    s.add_argument("--seed", type=int, default=0, help="base seed")
    s.add_argument("--strategy", default="builtin:global",
                   help="builtin:gec, builtin:global, builtin:finite or a strategy JSON file")
    s = sub.add_parser("penalties")
    s.add_argument("file")
    s.add_argument("--memory", choices=("infinite", "finite"), default="infinite")
    s = sub.add_parser("sensing")
    s.add_argument("file")
    s.add_argument("--mode", choices=("infinite", "finite"), default="infinite")
    s.add_argument("--determinized", help="deterministic automaton over sensing letters")
    s = sub.add_parser("extract-transducer")
    s.add_argument("file")
    s.add_argument("--game", choices=("sensing", "plain"), default="sensing")
    s.add_argument("--determinized", help="deterministic automaton over sensing letters")
    s.add_argument("--dot", metavar="PATH", help="also write a DOT rendering")
    return p


def _emit(obj, stream=None):
    (stream or sys.stdout).write(dumps(obj))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if args.command == "simulate" and (args.horizon < 1 or args.seeds < 1):
        _emit({"error": {"type": "UsageError", "message": "horizon and seeds must be positive"}})
        return 2
    started = time.perf_counter()
    report = {"tool_version": __version__}
    try:
        if args.command is None:
            if not args.check:
                parser.print_usage(sys.stderr)
                return 2
            ok, results = run_checks(fixture_paths(), args.max_signals)
            report.update({"command": "check", "checks": results, "passed": ok})
            code = 0 if ok else 1
        else:
            doc, digest = _read(args.file)
            report.update({"command": args.command, "input": str(args.file),
                           "input_sha256": digest})
            report["result"] = COMMANDS[args.command](args, doc)
            code = 0
            if args.check:
                ok, results = run_checks([args.file], args.max_signals)
                report["checks"] = results
                code = 0 if ok else 1
    except FormatError as exc:
        _emit({"error": {"type": "FormatError", "message": str(exc)}, **report})
        return 2
    except DomainError as exc:
        err = {"type": exc.kind, "message": str(exc)}
        if exc.detail is not None:
            err["detail"] = exc.detail
        _emit({"error": err, **report})
        return 1
    except (Unrealizable, NotSafety, NotWinning, NotGEC, AlphabetMismatch, ArenaError) as exc:
        _emit({"error": {"type": type(exc).__name__, "message": str(exc)}, **report})
        return 1
    if args.timing:
        report["timing_seconds"] = round(time.perf_counter() - started, 6)
    _emit(report)
    return code


if __name__ == "__main__":
    sys.exit(main())
