"""Automaton distillation: LTL_f objectives as a transfer medium between RL agents."""

__version__ = "0.1.0"
