"""Command-line reports, exit codes and the fixture check mode."""

import json
import subprocess
import sys

import pytest

from conftest import FIXTURES
from paritymdp.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def test_solve_fig1(capsys):
    code, rep = run(capsys, "solve", "--memory", "infinite", FIXTURES["fig1.json"])
    assert code == 0 and rep["result"]["value"] == "1"
    code, rep = run(capsys, "solve", "--memory", "finite", FIXTURES["fig1.json"])
    assert code == 0 and rep["result"]["value"] == "10"
    assert rep["tool_version"] and len(rep["input_sha256"]) == 64
    assert "timing_seconds" not in rep


def test_reports_are_byte_identical(capsys):
    main(["solve", str(FIXTURES["ergodic.json"])])
    first = capsys.readouterr().out
    main(["solve", str(FIXTURES["ergodic.json"])])
    assert capsys.readouterr().out == first


def test_timing_flag(capsys):
    code, rep = run(capsys, "--timing", "validate", FIXTURES["fig1.json"])
    assert code == 0 and "timing_seconds" in rep


def test_malformed_input_exits_2(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, rep = run(capsys, "validate", bad)
    assert code == 2 and rep["error"]["type"] == "FormatError"
    bad.write_text(json.dumps({"states": [{"id": "a", "owner": 1, "cost": "x", "rank": 0}],
                               "initial": "a", "transitions": []}))
    assert run(capsys, "validate", bad)[0] == 2
    assert run(capsys, "validate", tmp_path / "missing.json")[0] == 2


def test_usage_errors_exit_2(capsys):
    assert main(["solve"]) == 2
    assert main(["frobnicate", "x"]) == 2
    assert main([]) == 2
    capsys.readouterr()


def test_invalid_arena_exits_1(capsys, tmp_path):
    doc = {"states": [{"id": "a", "owner": 2, "cost": 0, "rank": 0}], "initial": "a",
           "transitions": [{"from": "a", "action": "x", "to": "a", "prob": "1/2"}]}
    path = tmp_path / "arena.json"
    path.write_text(json.dumps(doc))
    code, rep = run(capsys, "validate", path)
    assert code == 1 and rep["error"]["type"] == "InvalidArena"


def test_unrealizable_exits_1(capsys, tmp_path):
    doc = {"states": [{"id": "a", "owner": 1, "cost": 0, "rank": 1}], "initial": "a",
           "transitions": [{"from": "a", "action": "x", "to": "a"}]}
    path = tmp_path / "arena.json"
    path.write_text(json.dumps(doc))
    code, rep = run(capsys, "solve", path)
    assert code == 1 and rep["error"]["type"] == "Unrealizable"


def test_non_safety_exits_1(capsys):
    code, rep = run(capsys, "sensing", FIXTURES["psi-dpw.json"])
    assert code == 1 and rep["error"]["type"] == "NotSafety"


def test_sensing_with_supplied_automaton(capsys):
    code, rep = run(capsys, "sensing", "--mode", "finite", FIXTURES["psi-dpw.json"],
                    "--determinized", FIXTURES["psi-sensing-dpw.json"])
    assert code == 0 and rep["result"]["value"] == "1"
    assert rep["result"]["states"] == rep["result"]["expected_states"] == 31


def test_penalties(capsys):
    code, rep = run(capsys, "penalties", FIXTURES["penalties-rg.json"])
    assert code == 0 and rep["result"]["value"] == "1/2"
    assert rep["result"]["states"] == rep["result"]["expected_states"] == 18


def test_component_commands(capsys):
    path = FIXTURES["fig1.json"]
    code, rep = run(capsys, "mec", path)
    assert code == 0 and len(rep["result"]["components"]) == 2
    code, rep = run(capsys, "gec", path)
    assert code == 0
    code, rep = run(capsys, "sgec-check", path)
    flags = [c["is_sgec"] for c in rep["result"]["components"]]
    assert code == 0 and flags == [False, True]
    code, rep = run(capsys, "sgec-check", "--states", "q0", path)
    assert code == 0 and not rep["result"]["components"][0]["is_sgec"]
    code, rep = run(capsys, "sgec-check", "--states", "q0,q1", path)
    assert code == 1 and rep["error"]["type"] == "NotGEC"
    code, rep = run(capsys, "parity", path)
    assert code == 0 and set(rep["result"]["W1"]) == {"q0", "q1", "m", "m2"}
    code, rep = run(capsys, "mdp-value", FIXTURES["ergodic.json"])
    assert code == 0 and set(rep["result"]["values"]) == {"s0", "s1", "s2", "s3"}


def test_emit_and_replay_strategy(capsys, tmp_path):
    out = tmp_path / "f.json"
    code, rep = run(capsys, "solve", "--memory", "finite", "--emit-strategy", out,
                    FIXTURES["ergodic.json"])
    assert code == 0 and rep["result"]["strategy"]["sure_winning"]
    code, sim = run(capsys, "simulate", "--horizon", "20000", "--strategy", out,
                    FIXTURES["ergodic.json"])
    assert code == 0
    assert sim["result"]["certified"]["value"] == rep["result"]["strategy"]["value"]
    code, rep = run(capsys, "solve", "--memory", "infinite", "--emit-strategy", out,
                    FIXTURES["ergodic.json"])
    assert code == 1


def test_simulate_builtins(capsys, monkeypatch):
    path = FIXTURES["fig1.json"]
    for strategy in ("builtin:gec", "builtin:global", "builtin:finite"):
        code, rep = run(capsys, "simulate", "--horizon", "5000", "--strategy", strategy, path)
        assert code == 0 and len(rep["result"]["trajectories"]) == 1
    monkeypatch.setenv("PARITYMDP_THREADS", "2")
    code, par = run(capsys, "simulate", "--horizon", "3000", "--seeds", "3", path)
    monkeypatch.setenv("PARITYMDP_THREADS", "1")
    code2, seq = run(capsys, "simulate", "--horizon", "3000", "--seeds", "3", path)
    assert code == code2 == 0 and par["result"] == seq["result"]
    assert run(capsys, "simulate", "--horizon", "0", path)[0] == 2


def test_extract_transducer(capsys, tmp_path):
    dot = tmp_path / "t.dot"
    code, rep = run(capsys, "extract-transducer", "--dot", dot, FIXTURES["echo-sensing.json"])
    assert code == 0 and rep["result"]["states"] == 2
    assert rep["result"]["sensing_cost"] == "1" and rep["result"]["realizes_specification"]
    assert dot.read_text().startswith("digraph")
    code, rep = run(capsys, "extract-transducer", "--game", "plain", FIXTURES["true-spec.json"])
    assert code == 0 and rep["result"]["states"] == 1


def test_check_mode(capsys):
    code, rep = run(capsys, "--check")
    assert code == 0 and rep["passed"]
    names = {c["fixture"] for c in rep["checks"]}
    assert names == {name for name in FIXTURES if "expected" in FIXTURES[name].read_text()}


def test_check_single_file_failure(capsys, tmp_path):
    doc = json.loads(FIXTURES["fig1.json"].read_text())
    doc["expected"]["solve --memory finite"] = "9"
    path = tmp_path / "fig1.json"
    path.write_text(json.dumps(doc))
    code, rep = run(capsys, "--check", "solve", path)
    assert code == 1
    assert [c["passed"] for c in rep["checks"]].count(False) == 1


def test_max_signals(capsys):
    code, rep = run(capsys, "--max-signals", "0", "sensing", FIXTURES["echo-sensing.json"])
    assert code == 1 and rep["error"]["type"] == "TooManySignals"


@pytest.mark.parametrize("argv", [["--version"], ["--check"]])
def test_console_script(argv):
    proc = subprocess.run([sys.executable, "-c", "import sys; from paritymdp.cli import main;"
                           " sys.exit(main(sys.argv[1:]))", *argv],
                          capture_output=True, text=True)
    assert proc.returncode == 0
