"""Automaton runtime and the abstract MDP whose actions are automaton labels.

The abstract MDP treats automaton states as states and feasible labels as
actions.  Accepting states are absorbing terminals with value 0.  Two
solvers produce static Q-value estimates for every (state, label) pair:
synchronous value iteration and tabular epsilon-greedy Q-learning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .ltlf import Dfa

RewardFn = Callable[[int, int, int], float]


class ConvergenceError(RuntimeError):
    pass


def automaton_step(d: Dfa, omega: int, sigma: "int | Iterable[str]") -> int:
    """Successor state; raises :class:`~autodistill.ltlf.InfeasibleLabelError`
    for labels outside the feasible set."""
    return d.step(omega, sigma)


@dataclass
class AbstractMdp:
    states: list[int]
    initial: int
    actions: dict[int, list[int]]
    transition: dict[tuple[int, int], int]
    reward: dict[tuple[int, int], float]
    terminal: frozenset[int]

    def n_states(self) -> int:
        return len(self.states)

    def reachable(self) -> set[int]:
        """States reachable from the initial state without passing a terminal."""
        seen, todo = {self.initial}, [self.initial]
        while todo:
            q = todo.pop()
            if q in self.terminal:
                continue
            for s in self.actions.get(q, []):
                t = self.transition[(q, s)]
                if t not in seen:
                    seen.add(t)
                    todo.append(t)
        return seen


@dataclass
class AbstractValueTable:
    gamma: float
    V: dict[int, float] = field(default_factory=dict)
    Q: dict[tuple[int, int], float] = field(default_factory=dict)
    sweeps: int = 0
    residuals: list[float] = field(default_factory=list)

    def greedy(self, omega: int) -> int | None:
        cands = [(q, s) for (w, s), q in self.Q.items() if w == omega]
        if not cands:
            return None
        return max(cands, key=lambda t: (t[0], -t[1]))[1]


def abstract_mdp(
    d: Dfa,
    reward: RewardFn,
    labels: Iterable[int] | None = None,
    *,
    prune_dead: bool = False,
    merge_terminals: bool = False,
) -> AbstractMdp:
    """Abstract MDP of ``d`` with ``reward(omega, sigma, omega_next)``.

    ``labels`` defaults to the automaton alphabet.  ``prune_dead`` removes
    states that cannot reach acceptance (and the actions entering them);
    ``merge_terminals`` collapses all accepting states into the lowest
    numbered one.  Both are off by default.
    """
    labels = list(d.alphabet() if labels is None else labels)
    dead = d.dead_states() if prune_dead else set()
    dead.discard(d.initial)
    acc = sorted(d.accepting)
    rep = {q: (acc[0] if merge_terminals and q in d.accepting else q) for q in d.states}
    terminal = frozenset(rep[q] for q in d.accepting)
    states = sorted({rep[q] for q in d.states if q not in dead})
    actions: dict[int, list[int]] = {q: [] for q in states}
    transition: dict[tuple[int, int], int] = {}
    rewards: dict[tuple[int, int], float] = {}
    for q in d.states:
        if q in dead or q in d.accepting:
            continue
        for s in labels:
            t = d.step(q, s)
            if t in dead:
                continue
            actions[q].append(s)
            transition[(q, s)] = rep[t]
            rewards[(q, s)] = float(reward(q, s, t))
    return AbstractMdp(states, rep[d.initial], actions, transition, rewards, terminal)


def value_iteration(
    m: AbstractMdp,
    gamma: float = 0.99,
    tol: float = 1e-8,
    max_sweeps: int = 1_000_000,
) -> AbstractValueTable:
    """Synchronous value iteration; stops once the sup-norm change is <= tol."""
    if not 0 <= gamma <= 1:
        raise ValueError("gamma must lie in [0, 1]")
    if tol <= 0:
        raise ValueError("tol must be positive")
    V = {q: 0.0 for q in m.states}
    out = AbstractValueTable(gamma=gamma)
    for sweep in range(1, max_sweeps + 1):
        new = {}
        for q in m.states:
            acts = m.actions.get(q, [])
            if q in m.terminal or not acts:
                new[q] = 0.0
                continue
            new[q] = max(m.reward[(q, s)] + gamma * V[m.transition[(q, s)]] for s in acts)
        res = max((abs(new[q] - V[q]) for q in m.states), default=0.0)
        V = new
        out.residuals.append(res)
        if not math.isfinite(res):
            raise ConvergenceError("value iteration diverged")
        if res <= tol:
            out.sweeps = sweep
            break
    else:
        raise ConvergenceError(f"no convergence within {max_sweeps} sweeps (gamma={gamma})")
    out.V = V
    out.Q = {
        (q, s): m.reward[(q, s)] + gamma * V[m.transition[(q, s)]]
        for q in m.states if q not in m.terminal
        for s in m.actions.get(q, [])
    }
    return out


def abstract_q_learning(
    m: AbstractMdp,
    gamma: float = 0.99,
    alpha: float = 0.5,
    steps: int = 50_000,
    seed: int = 0,
    epsilon: float = 0.1,
    max_episode_len: int = 1_000,
) -> AbstractValueTable:
    """Epsilon-greedy tabular Q-learning on the abstract MDP.

    Episodes start at the initial state and restart on reaching a terminal
    (or after ``max_episode_len`` steps).  Greedy ties break uniformly.
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    Q = {(q, s): 0.0 for q in m.states if q not in m.terminal for s in m.actions.get(q, [])}
    q, t_ep = m.initial, 0
    for _ in range(steps):
        acts = m.actions.get(q, [])
        if q in m.terminal or not acts or t_ep >= max_episode_len:
            q, t_ep = m.initial, 0
            acts = m.actions.get(q, [])
            if q in m.terminal or not acts:
                break
        if rng.random() < epsilon:
            s = acts[rng.integers(len(acts))]
        else:
            vals = [Q[(q, s)] for s in acts]
            best = max(vals)
            ties = [s for s, v in zip(acts, vals) if v == best]
            s = ties[rng.integers(len(ties))] if len(ties) > 1 else ties[0]
        nxt = m.transition[(q, s)]
        nxt_acts = m.actions.get(nxt, [])
        boot = 0.0 if nxt in m.terminal or not nxt_acts else max(Q[(nxt, a)] for a in nxt_acts)
        Q[(q, s)] += alpha * (m.reward[(q, s)] + gamma * boot - Q[(q, s)])
        q, t_ep = nxt, t_ep + 1
    V = {}
    for st in m.states:
        acts = m.actions.get(st, [])
        V[st] = 0.0 if st in m.terminal or not acts else max(Q[(st, a)] for a in acts)
    return AbstractValueTable(gamma=gamma, V=V, Q=Q)


def env_reward_projection(
    d: Dfa,
    item_bits: int,
    step_penalty: float = -0.1,
    item_reward: float = 1.0,
    completion_reward: float = 100.0,
) -> RewardFn:
    """Environment reward schedule projected onto automaton transitions.

    Every abstract step pays ``step_penalty``, each item proposition in the
    label pays ``item_reward`` and entering an accepting state pays
    ``completion_reward``.
    """

    def reward(q: int, s: int, t: int) -> float:
        r = step_penalty + item_reward * bin(s & item_bits).count("1")
        if t in d.accepting and q not in d.accepting:
            r += completion_reward
        return r

    return reward


def terminal_reward(d: Dfa, value: float = 1.0) -> RewardFn:
    """``value`` for transitions entering an accepting state, 0 otherwise."""

    def reward(q: int, s: int, t: int) -> float:
        return value if t in d.accepting and q not in d.accepting else 0.0

    return reward
