"""Two-branch corridor whose automaton has a short and a long accepting trace.

From the start cell, action 0 enters branch A and action 1 enters branch C.
Inside a branch, action 0 advances and action 1 steps back (leaving the
branch at its first cell returns to the start).  Actions 2 and 3 wait.

Branch A fires ``a`` on its first cell and ``b`` on its last, so the
automaton trace a -> b costs ``len_a`` steps; branch C fires ``c``, ``d``
and ``e`` and costs ``len_c`` steps.  Entering both branches violates the
objective.  The automaton prefers A (fewer transitions) while the
environment favours C whenever ``len_c < len_a``.
"""

from __future__ import annotations

from ..ltlf import compile_formula, parse
from .world import COMPLETION_REWARD, STEP_PENALTY, EnvState, EpisodeDoneError

TWO_TRACE = "F(b | e) & (!F a | !F c) & (a R !b) & (c R !d) & (d R !e)"
AP = ("a", "b", "c", "d", "e")


class TwoTraceCorridor:
    n_actions = 4
    continuous = False

    def __init__(self, len_a: int = 30, len_c: int = 6, max_steps: int = 200):
        if len_a < 2 or len_c < 3:
            raise ValueError("branch A needs 2 cells and branch C needs 3")
        self.len_a, self.len_c, self.max_steps = len_a, len_c, max_steps
        self.dfa = compile_formula(parse(TWO_TRACE, AP), AP, [set()] + [{p} for p in AP])
        self.ap = self.dfa.ap
        bit = self.ap.bit
        # label fired on arrival at (branch, cell), cells numbered from 1
        self._labels = {("A", 1): bit("a"), ("A", len_a): bit("b"),
                        ("C", 1): bit("c"), ("C", len_c // 2 + 1): bit("d"),
                        ("C", len_c): bit("e")}
        self.done = True
        self.reset()

    def reset(self):
        self.pos = ("S", 0)
        self.t = 0
        self.omega = self.dfa.initial
        self.last_label = 0
        self.accepted = False
        self.done = False
        return self.state(), 0, self.omega

    def state(self) -> EnvState:
        return EnvState(self.pos, (), self.t, self.omega)

    def key(self):
        return self.pos

    def snapshot(self):
        return (self.pos, self.omega)

    def restore(self, snap):
        self.pos, self.omega = snap
        self.t = 0
        self.accepted = self.omega in self.dfa.accepting
        self.done = self.accepted

    def step(self, action):
        if self.done:
            raise EpisodeDoneError("episode is over; call reset()")
        branch, cell = self.pos
        action = int(action)
        if branch == "S":
            if action in (0, 1):
                self.pos = ("A" if action == 0 else "C", 1)
        elif action == 0:
            end = self.len_a if branch == "A" else self.len_c
            self.pos = (branch, min(cell + 1, end))
        elif action == 1:
            self.pos = ("S", 0) if cell == 1 else (branch, cell - 1)
        moved = self.pos != (branch, cell)
        bits = self._labels.get(self.pos, 0) if moved else 0
        prev = self.omega
        self.omega = self.dfa.step(prev, bits)
        self.last_label = bits
        self.t += 1
        reward = STEP_PENALTY
        self.accepted = self.omega in self.dfa.accepting
        if self.accepted and prev not in self.dfa.accepting:
            reward += COMPLETION_REWARD
        self.done = self.accepted or self.t >= self.max_steps
        return self.state(), reward, self.done
