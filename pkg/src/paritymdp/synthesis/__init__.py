"""Synthesis front-ends: penalties on undesired scenarios and sensing cost."""

from .automata import (AlphabetMismatch, Dfw, Dpw, InputDistribution, NotSafety,
                       SignalAlphabet, Upw, automaton_from_json, automaton_to_json)
from .construct import (PenaltySpec, SensingSolution, decode_system_action, determinize_safety,
                        dpw_to_game, expected_sizes, penalties_mdp, sensing_automaton,
                        sensing_cost, sensing_game, sensing_upw, solve_sensing, system_action)
from .transducer import NotWinning, Transducer, extract_transducer, strategy_from_transducer

__all__ = [
    "AlphabetMismatch", "Dfw", "Dpw", "InputDistribution", "NotSafety", "SignalAlphabet", "Upw",
    "automaton_from_json", "automaton_to_json", "PenaltySpec", "SensingSolution",
    "decode_system_action", "determinize_safety", "dpw_to_game", "expected_sizes",
    "penalties_mdp", "sensing_automaton", "sensing_cost", "sensing_game", "sensing_upw",
    "solve_sensing", "system_action", "NotWinning", "Transducer", "extract_transducer",
    "strategy_from_transducer",
]
