"""Tabular automaton Q-learning and explicit product MDPs.

``product_mdp`` enumerates every (environment state, omega) pair reachable
from reset by breadth-first search, which gives a value-iteration oracle
``optimal_q``.  ``automaton_q_learning`` runs the blended update on that
MDP and tracks the split Q = q + r where q is driven by environment
targets and r by teacher values.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Hashable

import numpy as np

from .transfer import DEFAULT_RHO, TeacherEntry, TeacherTable, rho_powers


class TabularQ:
    """Action values per hashable state, zero-initialised on first access."""

    def __init__(self, n_actions: int, init: float = 0.0):
        self.n_actions = n_actions
        self.init = init
        self.table: dict[Hashable, np.ndarray] = {}

    def __getitem__(self, key) -> np.ndarray:
        row = self.table.get(key)
        if row is None:
            row = np.full(self.n_actions, self.init)
            self.table[key] = row
        return row

    def __len__(self) -> int:
        return len(self.table)

    def value(self, key, done: bool = False) -> float:
        return 0.0 if done else float(self[key].max())

    def greedy(self, key, rng: np.random.Generator | None = None) -> int:
        row = self[key]
        best = np.flatnonzero(row == row.max())
        if rng is None or len(best) == 1:
            return int(best[0])
        return int(best[rng.integers(len(best))])


def tabular_automaton_q_update(Q: TabularQ, exp, alpha: float, beta: float,
                               teacher: TeacherTable | None, gamma: float,
                               product: bool = True) -> float:
    """Q <- (1-a) Q + a b T + a (1-b) (r + gamma V(s')).

    States are keyed ``(s, omega)`` when ``product`` is set, else ``s``.
    A missing teacher entry counts as beta = 0.  Returns the new value.
    """
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    key = (exp.s, exp.omega) if product else exp.s
    nxt = (exp.s_next, exp.omega_next) if product else exp.s_next
    target = exp.r + gamma * Q.value(nxt, exp.done)
    t = None if teacher is None else teacher.get(exp.omega, exp.label_next)
    if t is not None:
        target = beta * t + (1.0 - beta) * target
    row = Q[key]
    row[exp.a] += alpha * (target - row[exp.a])
    return float(row[exp.a])


@dataclass
class ProductMdp:
    """Deterministic product MDP with arrays indexed [state, action]."""

    keys: list
    omega: np.ndarray
    next: np.ndarray
    reward: np.ndarray
    done: np.ndarray
    label: np.ndarray
    terminal: np.ndarray
    n_actions: int

    @property
    def n(self) -> int:
        return len(self.keys)

    def transition_ids(self) -> tuple[np.ndarray, list[tuple[int, int]]]:
        """Integer id of (omega, label) per entry, and the id -> transition list."""
        pairs = sorted({(int(w), int(l)) for w, row in zip(self.omega, self.label) for l in row})
        ids = {p: i for i, p in enumerate(pairs)}
        out = np.array([[ids[(int(w), int(l))] for l in row] for w, row in zip(self.omega, self.label)])
        return out, pairs


def product_mdp(env, max_states: int = 100_000) -> ProductMdp:
    """Enumerate reachable product states of an environment with
    ``snapshot``/``restore`` support.  Accepting product states are terminal."""
    env.reset()
    start = env.snapshot()
    index = {start: 0}
    order = [start]
    nA = env.n_actions
    rows_next, rows_r, rows_done, rows_lab = [], [], [], []
    accepting = env.dfa.accepting
    i = 0
    while i < len(order):
        snap = order[i]
        nxt, rew, dn, lab = [], [], [], []
        if snap[-1] in accepting:
            nxt, rew, dn, lab = [i] * nA, [0.0] * nA, [True] * nA, [0] * nA
        else:
            for a in range(nA):
                env.restore(snap)
                _, r, _ = env.step(a)
                s2 = env.snapshot()
                if s2 not in index:
                    if len(order) >= max_states:
                        raise RuntimeError(f"product MDP exceeds {max_states} states")
                    index[s2] = len(order)
                    order.append(s2)
                nxt.append(index[s2])
                rew.append(r)
                dn.append(bool(env.accepted))
                lab.append(env.last_label)
        rows_next.append(nxt)
        rows_r.append(rew)
        rows_done.append(dn)
        rows_lab.append(lab)
        i += 1
    env.reset()
    omega = np.array([s[-1] for s in order])
    return ProductMdp(
        keys=order, omega=omega, next=np.array(rows_next), reward=np.array(rows_r),
        done=np.array(rows_done), label=np.array(rows_lab),
        terminal=np.array([w in accepting for w in omega]), n_actions=nA,
    )


def optimal_q(pm: ProductMdp, gamma: float, tol: float = 1e-12, max_sweeps: int = 100_000) -> np.ndarray:
    """Q* by synchronous value iteration (terminal rows stay 0)."""
    Q = np.zeros((pm.n, pm.n_actions))
    live = ~pm.terminal
    for _ in range(max_sweeps):
        V = Q.max(axis=1)
        new = np.where(pm.done, pm.reward, pm.reward + gamma * V[pm.next])
        new[~live] = 0.0
        if np.max(np.abs(new - Q)) <= tol:
            return new
        Q = new
    raise RuntimeError("value iteration did not converge")


def distill_q(pm: ProductMdp, Q: np.ndarray, provenance: str = "dynamic") -> TeacherTable:
    """Average of Q over all live (state, action) entries per transition."""
    sums: dict = defaultdict(float)
    counts: dict = defaultdict(int)
    for i in np.flatnonzero(~pm.terminal):
        for a in range(pm.n_actions):
            k = (int(pm.omega[i]), int(pm.label[i, a]))
            sums[k] += Q[i, a]
            counts[k] += 1
    return TeacherTable(provenance, {k: TeacherEntry(counts[k], sums[k] / counts[k]) for k in sums})


def robbins_monro(n: np.ndarray) -> np.ndarray:
    """Step size (n + 2) ** -0.6 for the n-th update of a pair: in (0, 1),
    sum diverges, sum of squares converges."""
    return (n + 2.0) ** -0.6


@dataclass
class AutomatonQRun:
    Q: np.ndarray
    q: np.ndarray
    r: np.ndarray
    errors: list[float] = field(default_factory=list)
    gaps: list[float] = field(default_factory=list)
    r_max: list[float] = field(default_factory=list)
    steps: int = 0


def automaton_q_learning(
    pm: ProductMdp,
    teacher: TeacherTable | None,
    gamma: float,
    steps: int,
    seed: int = 0,
    rho: float = DEFAULT_RHO,
    p_update: float = 0.5,
    alpha: Callable[[np.ndarray], np.ndarray] = robbins_monro,
    q_star: np.ndarray | None = None,
    track: bool = True,
) -> AutomatonQRun:
    """Asynchronous blended Q-learning on an explicit product MDP.

    Each step updates an independent Bernoulli(``p_update``) subset of live
    (state, action) pairs from the current iterate.  The per-transition
    count that drives beta grows by one for each updated pair.  With
    ``track`` set the split q (environment part) and r (teacher part) is
    advanced alongside Q, and ``gaps`` records max |Q - (q + r)|.
    """
    rng = np.random.default_rng(seed)
    tid, pairs = pm.transition_ids()
    T = np.zeros(len(pairs))
    has = np.zeros(len(pairs), dtype=bool)
    if teacher is not None:
        for j, (w, l) in enumerate(pairs):
            v = teacher.get(w, l)
            if v is not None:
                T[j], has[j] = v, True
    Tsa, hsa = T[tid], has[tid]
    eta = np.zeros(len(pairs), dtype=np.int64)
    visits = np.zeros(pm.reward.shape, dtype=np.int64)
    live = np.broadcast_to(~pm.terminal[:, None], pm.reward.shape)
    Q = np.zeros(pm.reward.shape)
    q = np.zeros_like(Q)
    r = np.zeros_like(Q)
    run = AutomatonQRun(Q, q, r)
    for _ in range(steps):
        mask = live & (rng.random(Q.shape) < p_update)
        V = Q.max(axis=1)
        env_target = np.where(pm.done, pm.reward, pm.reward + gamma * V[pm.next])
        b = np.where(hsa, rho_powers(rho, eta[tid]), 0.0)
        a = np.where(mask, alpha(visits), 0.0)
        Q_new = (1 - a) * Q + a * b * Tsa + a * (1 - b) * env_target
        if track:
            q = (1 - a) * q + a * (1 - b) * env_target
            r = (1 - a) * r + a * b * Tsa
            run.gaps.append(float(np.max(np.abs(Q_new - (q + r)))))
            run.r_max.append(float(np.max(np.abs(r))))
        Q = Q_new
        visits += mask
        eta += np.bincount(tid[mask], minlength=len(pairs))
        if q_star is not None:
            run.errors.append(float(np.max(np.abs(Q - q_star)[live])))
        run.steps += 1
    run.Q, run.q, run.r = Q, q, r
    return run
