"""Objective formulas, propositions and feasible labels of each task."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from ..ltlf import AtomicPropositionSet, Dfa, compile_formula, parse

GOLD_LEVELS = 10


@dataclass(frozen=True)
class Objective:
    kind: str
    ap: AtomicPropositionSet
    formula_text: str
    # propositions whose firing pays the +1 item reward
    item_props: frozenset[str]
    feasible: frozenset[frozenset[str]]

    def formula(self):
        return parse(self.formula_text, self.ap)

    def feasible_labels(self) -> frozenset[int]:
        return frozenset(self.ap.encode(l) for l in self.feasible)


def _singletons(names, extra=()):
    out = {frozenset()}
    out.update(frozenset([n]) for n in names)
    out.update(frozenset(e) for e in extra)
    return frozenset(out)


def _blind_craftsman() -> Objective:
    ap = AtomicPropositionSet(["wood", "factory", "tools3", "home"])
    # at most one of wood/factory/home per step; tools3 is level-triggered
    base = [frozenset(), frozenset(["wood"]), frozenset(["factory"]), frozenset(["home"])]
    feas = frozenset(b | t for b in base for t in (frozenset(), frozenset(["tools3"])))
    return Objective(
        kind="blind_craftsman",
        ap=ap,
        formula_text="G(wood -> F(factory)) & F(tools3 & home)",
        item_props=frozenset(["wood"]),
        feasible=feas,
    )


def _dungeon_quest() -> Objective:
    ap = AtomicPropositionSet(["key", "shield", "sword", "dragon"])
    return Objective(
        kind="dungeon_quest",
        ap=ap,
        formula_text="F(dragon) & (key R !sword) & (sword R !dragon) & (shield R !dragon)",
        item_props=frozenset(["key", "shield", "sword"]),
        feasible=_singletons(ap),
    )


def _diamond_mine() -> Objective:
    golds = [f"gold{i}" for i in range(1, GOLD_LEVELS + 1)]
    ap = AtomicPropositionSet(["wood", "diamond", *golds, "home"])
    chain = " & ".join(f"({a} R !{b})" for a, b in zip(golds, golds[1:]))
    text = (
        "F(home) & (!F(gold1) | !F(wood)) & (wood R !diamond) & "
        f"{chain} & ((diamond | gold{GOLD_LEVELS}) R !home)"
    )
    return Objective(
        kind="diamond_mine",
        ap=ap,
        formula_text=text,
        item_props=frozenset(["wood", "diamond", *golds]),
        feasible=_singletons(ap),
    )


OBJECTIVES = {
    o.kind: o for o in (_blind_craftsman(), _dungeon_quest(), _diamond_mine())
}

# reference automaton sizes (states, transitions), rejecting sink excluded
REFERENCE_SIZES = {
    "blind_craftsman": (4, 12),
    "dungeon_quest": (7, 17),
    "diamond_mine": (15, 29),
}


def objective(kind: str) -> Objective:
    try:
        return OBJECTIVES[kind]
    except KeyError:
        raise ValueError(f"unknown environment kind {kind!r}") from None


@lru_cache(maxsize=None)
def objective_dfa(kind: str, restrict: bool = True) -> Dfa:
    """Minimized objective automaton, restricted to feasible labels by default."""
    o = objective(kind)
    return compile_formula(o.formula(), o.ap, o.feasible_labels() if restrict else None)
