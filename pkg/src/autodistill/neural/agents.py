"""Dueling DQN and TD3 learners built on :mod:`autodistill.neural.nets`.

Both learners take a sampled batch plus per-sample teacher values (NaN when
absent), blend weights beta and gradient weights, and return the squared
errors of the step (first critic for TD3) that become the new replay
priorities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rl.targets import dqn_values, td3_values
from ..rl.transfer import blend
from .nets import Adam, DuelingQ, Mlp, polyak


@dataclass
class Batch:
    obs: np.ndarray
    act: np.ndarray
    rew: np.ndarray
    next_obs: np.ndarray
    done: np.ndarray
    teacher: np.ndarray  # NaN where the transition has no teacher entry
    beta: np.ndarray
    weight: np.ndarray  # gradient weight per sample


# -- DQN -------------------------------------------------------------------------


@dataclass
class DqnConfig:
    hidden: tuple[int, ...] = (64, 64)
    lr: float = 1e-3
    gamma: float = 0.99
    sync_period: int = 500
    dtype: str = "float64"


class DqnLearner:
    def __init__(self, obs_dim: int, n_actions: int, cfg: DqnConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.q = DuelingQ(obs_dim, n_actions, cfg.hidden, rng, dtype=np.dtype(cfg.dtype))
        self.target = self.q.copy()
        self.opt = Adam(lr=cfg.lr)
        self.updates = 0

    def act(self, obs: np.ndarray) -> np.ndarray:
        return self.q(obs[None, :])[0]

    def update(self, b: Batch) -> np.ndarray:
        m = len(b.rew)
        next_q = self.target(b.next_obs)
        tgt = blend(dqn_values(b.rew, b.done, next_q, self.cfg.gamma), b.teacher, b.beta)
        q, cache = self.q.forward(b.obs, keep=True)
        rows = np.arange(m)
        err = tgt - q[rows, b.act]
        g = np.zeros_like(q)
        g[rows, b.act] = -2.0 * b.weight * err / m
        self.opt.step(self.q.params, self.q.backward(cache, g))
        self.updates += 1
        if self.updates % self.cfg.sync_period == 0:
            self.sync()
        return err * err

    def sync(self) -> None:
        polyak(self.target.params, self.q.params, 1.0)


# -- TD3 -------------------------------------------------------------------------


@dataclass
class Td3Config:
    hidden: tuple[int, ...] = (64, 64)
    lr_actor: float = 1e-3
    lr_critic: float = 1e-3
    gamma: float = 0.99
    tau: float = 0.005
    action_cap: float = 0.5
    expl_noise: float = 0.1  # fractions of action_cap
    policy_noise: float = 0.2
    noise_clip: float = 0.5
    twin: bool = True
    delay_early: int = 4
    delay_late: int = 2
    delay_switch: int = 20_000
    dtype: str = "float32"


def actor_delay(step: int, cfg: Td3Config | None = None) -> int:
    """Actor/target update period at a given training step."""
    cfg = cfg or Td3Config()
    return cfg.delay_early if step < cfg.delay_switch else cfg.delay_late


class Td3Learner:
    def __init__(self, obs_dim: int, act_dim: int, cfg: Td3Config, rng: np.random.Generator):
        self.cfg = cfg
        self.obs_dim, self.act_dim = obs_dim, act_dim
        dt = np.dtype(cfg.dtype)
        self.actor = Mlp((obs_dim, *cfg.hidden, act_dim), rng, out_scale=0.1, dtype=dt)
        self.critics = [Mlp((obs_dim + act_dim, *cfg.hidden, 1), rng, dtype=dt) for _ in range(2)]
        self.actor_t = self.actor.copy()
        self.critics_t = [c.copy() for c in self.critics]
        self.opt_actor = Adam(lr=cfg.lr_actor)
        self.opt_critic = [Adam(lr=cfg.lr_critic) for _ in range(2)]
        self.rng = rng

    def policy(self, obs: np.ndarray, target: bool = False) -> np.ndarray:
        net = self.actor_t if target else self.actor
        return self.cfg.action_cap * np.tanh(net(np.atleast_2d(obs)))

    def act(self, obs: np.ndarray, explore: bool = True) -> np.ndarray:
        a = self.policy(obs)[0]
        if explore:
            a = a + self.rng.normal(0.0, self.cfg.expl_noise * self.cfg.action_cap, size=a.shape)
        return np.clip(a, -self.cfg.action_cap, self.cfg.action_cap)

    def q_target(self, b: Batch) -> np.ndarray:
        cfg, cap = self.cfg, self.cfg.action_cap
        noise = np.clip(self.rng.normal(0.0, cfg.policy_noise * cap, size=(len(b.rew), self.act_dim)),
                        -cfg.noise_clip * cap, cfg.noise_clip * cap)
        a2 = np.clip(self.policy(b.next_obs, target=True) + noise, -cap, cap)
        x2 = np.hstack([b.next_obs, a2])
        q1 = self.critics_t[0](x2)[:, 0]
        q2 = self.critics_t[1](x2)[:, 0] if cfg.twin else None
        return td3_values(b.rew, b.done, q1, q2, cfg.gamma)

    def update(self, b: Batch, step: int) -> np.ndarray:
        m = len(b.rew)
        tgt = blend(self.q_target(b), b.teacher, b.beta)
        x = np.hstack([b.obs, b.act])
        n_critics = 2 if self.cfg.twin else 1
        err = None
        for c, opt in zip(self.critics[:n_critics], self.opt_critic):
            q, acts = c.forward(x, keep=True)
            e = tgt - q[:, 0]
            err = e if err is None else err
            g = (-2.0 * b.weight * e / m)[:, None]
            opt.step(c.params, c.backward(acts, g))
        if step % actor_delay(step, self.cfg) == 0:
            self._actor_step(b.obs)
            tau = self.cfg.tau
            polyak(self.actor_t.params, self.actor.params, tau)
            for ct, c in zip(self.critics_t, self.critics):
                polyak(ct.params, c.params, tau)
        return (err * err).astype(float)

    def _actor_step(self, obs: np.ndarray) -> None:
        m = len(obs)
        z, acts_a = self.actor.forward(obs, keep=True)
        t = np.tanh(z)
        a = self.cfg.action_cap * t
        _, acts_c = self.critics[0].forward(np.hstack([obs, a]), keep=True)
        _, g_in = self.critics[0].backward(acts_c, np.full((m, 1), 1.0 / m), need_input=True)
        dq_da = g_in[:, self.obs_dim:]
        # ascend Q: minimise -Q
        g_z = -dq_da * self.cfg.action_cap * (1.0 - t * t)
        self.opt_actor.step(self.actor.params, self.actor.backward(acts_a, g_z))
