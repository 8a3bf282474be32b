import json
import sys
from pathlib import Path

import pytest

from paritymdp.cli import fixture_paths
from paritymdp.formats import arena_from_json
from paritymdp.synthesis import automaton_from_json

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = {p.name: p for p in fixture_paths()}


def load_doc(name):
    return json.loads(FIXTURES[name].read_text())


def load_arena(name):
    return arena_from_json(load_doc(name))


def load_automaton(name):
    return automaton_from_json(load_doc(name))


@pytest.fixture
def fig1():
    return load_arena("fig1.json")


@pytest.fixture
def ergodic():
    return load_arena("ergodic.json")


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(acceptance.RESULTS):
        terminalreporter.write_line(acceptance.RESULTS[n])
