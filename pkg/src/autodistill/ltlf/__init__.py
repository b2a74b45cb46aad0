"""LTL_f parsing and compilation to minimized DFAs."""

from .dfa import (
    Dfa,
    Edge,
    InfeasibleLabelError,
    StateExplosionError,
    accepts,
    compile_formula,
    minimize_dfa,
    to_dot,
)
from .formula import Formula, UnknownPropositionError, simplify
from .labels import AtomicPropositionSet
from .parser import LtlfSyntaxError, parse
from .printer import to_text
from .progression import progress
from .semantics import holds, satisfies

compile = compile_formula

__all__ = [
    "AtomicPropositionSet", "Dfa", "Edge", "Formula", "InfeasibleLabelError",
    "LtlfSyntaxError", "StateExplosionError", "UnknownPropositionError",
    "accepts", "compile", "compile_formula", "holds", "minimize_dfa", "parse",
    "progress", "satisfies", "simplify", "to_dot", "to_text",
]
