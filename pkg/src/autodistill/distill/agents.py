"""Learning agents driven by the shared training loop.

Every agent sees the same stream of automaton-augmented experiences.  The
``baseline`` decides what it does with them:

``none``     product input plus the teacher blend (when a table is given)
``vanilla``  environment state only, no automaton, no teacher
``product``  environment state plus automaton state, no teacher
``crm``      product input; every step is replayed from all automaton states
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ..neural import Batch, DqnConfig, DqnLearner, Td3Config, Td3Learner, encode_product_state
from ..rl import AnnealState, Experience, ReplayBuffer, TabularQ, TeacherTable, crm_experiences

BASELINES = ("none", "vanilla", "product", "crm")


@dataclass
class AgentConfig:
    gamma: float = 0.99
    rho: float = 0.999
    # tabular
    alpha: float = 0.5
    epsilon: float = 0.1
    teacher_init: bool = False  # unseen rows start at the best teacher value of their omega
    # neural
    batch_size: int = 32
    buffer_capacity: int = 100_000
    learning_starts: int = 1_000
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_fraction: float = 0.2
    start_steps: int = 5_000  # uniform random actions before the TD3 actor takes over
    dqn: DqnConfig = field(default_factory=DqnConfig)
    td3: Td3Config = field(default_factory=Td3Config)


class Agent:
    kind = ""

    def __init__(self, env, cfg: AgentConfig, teacher: TeacherTable | None, baseline: str,
                 rng: np.random.Generator):
        if baseline not in BASELINES:
            raise ValueError(f"unknown baseline {baseline!r}")
        self.env, self.cfg, self.rng = env, cfg, rng
        self.baseline = baseline
        self.product = baseline != "vanilla"
        self.teacher = teacher if baseline in ("none", "crm") else None
        self.dfa = env.dfa
        self.n_omega = self.dfa.n_states
        self.n_labels = 1 << len(self.dfa.ap)
        self.anneal = AnnealState(cfg.rho, (self.n_omega, self.n_labels))
        self._T = None if self.teacher is None else self.teacher.dense(self.n_omega, self.n_labels)

    def teacher_value(self, omega: int, sigma: int) -> float:
        return np.nan if self._T is None else self._T[omega, sigma]

    def begin_episode(self) -> None:
        pass

    def act(self, step: int, total: int):
        raise NotImplementedError

    def observe(self, exp: Experience, step: int) -> None:
        raise NotImplementedError


class TabularAgent(Agent):
    """Online blended Q-learning on the current experience."""

    kind = "tabular"

    def __init__(self, env, cfg, teacher, baseline, rng, history: int = 0):
        super().__init__(env, cfg, teacher, baseline, rng)
        self.Q = TabularQ(env.n_actions)
        self._row_init = None
        if self._T is not None and cfg.teacher_init:
            with np.errstate(all="ignore"):
                self._row_init = np.nanmax(np.where(np.isnan(self._T), -np.inf, self._T), axis=1)
        # (state key, omega, action, next label) for dynamic distillation
        self.history = deque(maxlen=history) if history else None

    def key(self, s, omega):
        return (s, omega) if self.product else s

    def row(self, key, omega):
        row = self.Q.table.get(key)
        if row is None:
            row = self.Q[key]
            if self._row_init is not None and np.isfinite(self._row_init[omega]):
                row[:] = self._row_init[omega]
        return row

    def act(self, step, total):
        if self.rng.random() < self.cfg.epsilon:
            return int(self.rng.integers(self.env.n_actions))
        row = self.row(self.key(self.env.key(), self.env.omega), self.env.omega)
        best = np.flatnonzero(row == row.max())
        return int(best[0] if len(best) == 1 else best[self.rng.integers(len(best))])

    def _update(self, e: Experience) -> None:
        cfg = self.cfg
        nxt = 0.0 if e.done else self.row(self.key(e.s_next, e.omega_next), e.omega_next).max()
        target = e.r + cfg.gamma * nxt
        t = self.teacher_value(e.omega, e.label_next)
        if t == t:  # present
            b = self.anneal.beta(e.omega, e.label_next)
            target = b * t + (1.0 - b) * target
        self.anneal.bump(e.omega, e.label_next)
        row = self.row(self.key(e.s, e.omega), e.omega)
        row[e.a] += cfg.alpha * (target - row[e.a])

    def observe(self, e, step):
        if self.history is not None:
            self.history.append((e.s, e.omega, e.a, e.label_next))
        if self.baseline == "crm":
            for c in crm_experiences(e, self.dfa):
                self._update(c)
        else:
            self._update(e)


class _NeuralAgent(Agent):
    """Shared replay and blended-target plumbing of the DQN and TD3 agents."""

    act_dim = 0

    def __init__(self, env, cfg, teacher, baseline, rng):
        super().__init__(env, cfg, teacher, baseline, rng)
        self.obs_dim = env.feature_dim + (self.n_omega if self.product else 0)
        self.buffer = ReplayBuffer(cfg.buffer_capacity, self.obs_dim, self.act_dim)
        self._last_obs = None

    def encode(self, features, omega):
        if self.product:
            return encode_product_state(features, omega, self.n_omega)
        return np.asarray(features, dtype=float)

    def begin_episode(self):
        self._last_obs = None

    def current_obs(self):
        return self.encode(self.env.features(), self.env.omega)

    def observe(self, e, step):
        # e.s / e.s_next carry raw environment features here
        items = crm_experiences(e, self.dfa) if self.baseline == "crm" else [e]
        for c in items:
            self.buffer.add(Experience(self.encode(c.s, c.omega), c.omega, c.a, c.r,
                                       self.encode(c.s_next, c.omega_next), c.omega_next,
                                       c.done, c.label_next))
        if len(self.buffer) >= max(self.cfg.learning_starts, self.cfg.batch_size):
            self.train(step)

    def sample_batch(self):
        buf = self.buffer
        idx, p = buf.sample(self.cfg.batch_size, self.rng)
        w, s = buf.omega[idx], buf.label_next[idx]
        if self._T is None:
            teacher = np.full(len(idx), np.nan)
        else:
            teacher = self._T[w, s]
        beta = self.anneal.betas(w, s)
        mean = p.mean()
        weight = p / mean if mean > 0 else np.ones_like(p)
        batch = Batch(buf.obs[idx], buf.act[idx], buf.rew[idx], buf.next_obs[idx], buf.done[idx],
                      teacher, beta, weight)
        return idx, batch, w, s

    def train(self, step):
        idx, batch, w, s = self.sample_batch()
        err = self.learn(batch, step)
        self.buffer.update_priorities(idx, err)
        self.anneal.count(w, s)

    def learn(self, batch: Batch, step: int) -> np.ndarray:
        raise NotImplementedError


class DqnAgent(_NeuralAgent):
    kind = "dqn"

    def __init__(self, env, cfg, teacher, baseline, rng):
        super().__init__(env, cfg, teacher, baseline, rng)
        self.learner = DqnLearner(self.obs_dim, env.n_actions, cfg.dqn, rng)

    def epsilon(self, step, total):
        c = self.cfg
        frac = min(1.0, step / max(1.0, c.eps_fraction * total))
        return c.eps_start + frac * (c.eps_end - c.eps_start)

    def act(self, step, total):
        if self.rng.random() < self.epsilon(step, total):
            return int(self.rng.integers(self.env.n_actions))
        q = self.learner.act(self.current_obs())
        best = np.flatnonzero(q == q.max())
        return int(best[0] if len(best) == 1 else best[self.rng.integers(len(best))])

    def learn(self, batch, step):
        return self.learner.update(batch)

    def q_values(self, obs: np.ndarray) -> np.ndarray:
        return self.learner.q(obs)


class Td3Agent(_NeuralAgent):
    kind = "td3"
    act_dim = 2

    def __init__(self, env, cfg, teacher, baseline, rng):
        if not getattr(env, "continuous", False):
            raise ValueError("td3 needs a continuous environment")
        super().__init__(env, cfg, teacher, baseline, rng)
        td3 = cfg.td3
        from ..envs.world import ACTION_CAP

        if td3.action_cap != ACTION_CAP:
            td3 = Td3Config(**{**td3.__dict__, "action_cap": ACTION_CAP})
        self.learner = Td3Learner(self.obs_dim, self.act_dim, td3, rng)

    def act(self, step, total):
        cap = self.learner.cfg.action_cap
        if step < self.cfg.start_steps:
            return self.rng.uniform(-cap, cap, size=self.act_dim)
        return self.learner.act(self.current_obs())

    def learn(self, batch, step):
        return self.learner.update(batch, step)


AGENTS = {a.kind: a for a in (TabularAgent, DqnAgent, Td3Agent)}
