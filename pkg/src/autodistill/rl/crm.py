"""Counterfactual experiences for reward machines."""

from __future__ import annotations

from dataclasses import replace
from typing import Callable

from ..ltlf import Dfa
from .replay import Experience

# R'(omega, sigma, omega_next, base_reward) -> reward
CrmReward = Callable[[int, int, int, float], float]


def completion_reward(d: Dfa, value: float = 100.0) -> CrmReward:
    """Base (automaton-free) reward plus ``value`` on entering acceptance."""

    def reward(omega: int, sigma: int, omega_next: int, base: float) -> float:
        bonus = value if omega_next in d.accepting and omega not in d.accepting else 0.0
        return base + bonus

    return reward


def base_reward(exp: Experience, d: Dfa, value: float = 100.0) -> float:
    """The part of ``exp.r`` that does not depend on the automaton."""
    entered = exp.omega_next in d.accepting and exp.omega not in d.accepting
    return exp.r - (value if entered else 0.0)


def crm_experiences(exp: Experience, d: Dfa, reward_fn: CrmReward | None = None,
                    completion: float = 100.0) -> list[Experience]:
    """One experience per automaton state, replaying the observed label.

    The list is ordered by automaton state and contains the real experience
    (re-derived) at index ``exp.omega``.
    """
    reward_fn = reward_fn or completion_reward(d, completion)
    base = base_reward(exp, d, completion)
    out = []
    for w in d.states:
        w2 = d.step(w, exp.label_next)
        out.append(replace(exp, omega=w, omega_next=w2, r=reward_fn(w, exp.label_next, w2, base),
                           done=w2 in d.accepting))
    return out
