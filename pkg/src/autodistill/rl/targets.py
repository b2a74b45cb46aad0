"""Bootstrapped one-step targets."""

from __future__ import annotations

from typing import Callable

import numpy as np


def dqn_values(r, done, next_q, gamma: float) -> np.ndarray:
    """r + gamma * max_a' next_q, with the bootstrap dropped at done.

    ``next_q`` has shape (batch, n_actions) and comes from the target network.
    """
    r = np.asarray(r, dtype=float)
    boot = np.max(np.asarray(next_q, dtype=float), axis=-1)
    return r + gamma * np.where(done, 0.0, boot)


def td3_values(r, done, q1_next, q2_next=None, gamma: float = 0.99) -> np.ndarray:
    """r + gamma * min(Q1', Q2'); single-critic when ``q2_next`` is None."""
    q = np.asarray(q1_next, dtype=float)
    if q2_next is not None:
        q = np.minimum(q, np.asarray(q2_next, dtype=float))
    return np.asarray(r, dtype=float) + gamma * np.where(done, 0.0, q.reshape(np.shape(r)))


def dqn_target(exp, student_q: Callable, gamma: float) -> float:
    """Target for one experience; ``student_q(s)`` returns target-network Q values."""
    if exp.done:
        return float(exp.r)
    return float(exp.r + gamma * np.max(student_q(exp.s_next)))


def td3_target(exp, critics, target_actor: Callable, gamma: float,
               noise: np.ndarray | None = None, noise_clip: float = 0.5,
               action_cap: float | None = None) -> float:
    """Target for one experience with twin critics (or one) and smoothing noise."""
    if exp.done:
        return float(exp.r)
    a = np.asarray(target_actor(exp.s_next), dtype=float)
    if noise is not None:
        a = a + np.clip(noise, -noise_clip, noise_clip)
    if action_cap is not None:
        a = np.clip(a, -action_cap, action_cap)
    qs = [float(np.ravel(c(exp.s_next, a))[0]) for c in critics]
    return float(exp.r + gamma * min(qs))
