"""Prioritized replay of automaton-augmented experiences.

Sampling is proportional to the stored priority (no exponent, no
importance-sampling correction).  New entries get priority 1.  Draws are
independent, i.e. always with replacement, so a batch may be larger than
the buffer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np


@dataclass(frozen=True)
class Experience:
    s: Any
    omega: int
    a: Any
    r: float
    s_next: Any
    omega_next: int
    done: bool
    label_next: int


class SumTree:
    """Binary tree of partial sums over a fixed number of leaves.

    Parents are always recomputed from their children, so no rounding error
    accumulates across updates.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        size = 1
        while size < capacity:
            size *= 2
        self.size = size
        self.tree = np.zeros(2 * size)

    @property
    def total(self) -> float:
        return float(self.tree[1])

    def leaves(self) -> np.ndarray:
        return self.tree[self.size:]

    def set(self, i: int, value: float) -> None:
        """Single-leaf update; a scalar walk is much cheaper than array ops here."""
        t = self.tree
        i += self.size
        t[i] = value
        i //= 2
        while i >= 1:
            t[i] = t[2 * i] + t[2 * i + 1]
            i //= 2

    def update(self, idx, values) -> None:
        idx = np.atleast_1d(np.asarray(idx, dtype=np.int64)) + self.size
        self.tree[idx] = values
        # duplicate parents receive identical sums, so no dedup is needed
        while True:
            idx = idx // 2
            self.tree[idx] = self.tree[2 * idx] + self.tree[2 * idx + 1]
            if idx[0] <= 1:
                break

    def find(self, u: np.ndarray) -> np.ndarray:
        """Leaf index for each prefix-sum target in ``u`` (vectorized descent)."""
        node = np.ones(len(u), dtype=np.int64)
        u = u.copy()
        while node[0] < self.size:
            left = 2 * node
            lv = self.tree[left]
            go_right = u >= lv
            u = np.where(go_right, u - lv, u)
            node = np.where(go_right, left + 1, left)
        return node - self.size


class ReplayBuffer:
    """Ring buffer with proportional priorities.

    ``obs_dim`` fixes the row width of the stored state features.  Discrete
    actions are stored as integers (``act_dim=0``), continuous ones as rows.
    """

    def __init__(self, capacity: int, obs_dim: int, act_dim: int = 0, min_priority: float = 1e-8):
        self.capacity = int(capacity)
        self.obs = np.zeros((capacity, obs_dim))
        self.next_obs = np.zeros((capacity, obs_dim))
        self.act = np.zeros((capacity, act_dim)) if act_dim else np.zeros(capacity, dtype=np.int64)
        self.rew = np.zeros(capacity)
        self.done = np.zeros(capacity, dtype=bool)
        self.omega = np.zeros(capacity, dtype=np.int64)
        self.omega_next = np.zeros(capacity, dtype=np.int64)
        self.label_next = np.zeros(capacity, dtype=np.int64)
        self.tree = SumTree(capacity)
        self.min_priority = min_priority
        self.ptr = 0
        self.n = 0
        self.added = 0

    def __len__(self) -> int:
        return self.n

    def add(self, e: Experience, priority: float = 1.0) -> int:
        i = self.ptr
        self.obs[i] = e.s
        self.next_obs[i] = e.s_next
        self.act[i] = e.a
        self.rew[i] = e.r
        self.done[i] = e.done
        self.omega[i] = e.omega
        self.omega_next[i] = e.omega_next
        self.label_next[i] = e.label_next
        self.tree.set(i, priority)
        self.ptr = (i + 1) % self.capacity
        self.n = min(self.n + 1, self.capacity)
        self.added += 1
        return i

    def get(self, i: int) -> Experience:
        a = self.act[i]
        return Experience(self.obs[i].copy(), int(self.omega[i]),
                          a.copy() if a.ndim else int(a), float(self.rew[i]),
                          self.next_obs[i].copy(), int(self.omega_next[i]), bool(self.done[i]),
                          int(self.label_next[i]))

    @property
    def priorities(self) -> np.ndarray:
        return self.tree.leaves()[: self.n]

    def update_priorities(self, idx, priorities) -> None:
        self.tree.update(idx, np.maximum(np.asarray(priorities, dtype=float), self.min_priority))

    def sample(self, m: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Indices drawn proportionally to priority, and their priorities."""
        if self.n == 0:
            raise ValueError("cannot sample from an empty buffer")
        total = self.tree.total
        if total <= 0:
            idx = rng.integers(self.n, size=m)
            return idx, self.tree.leaves()[idx]
        u = rng.random(m) * total
        idx = self.tree.find(u)
        p = self.tree.leaves()
        bad = (idx >= self.n) | (p[np.minimum(idx, len(p) - 1)] <= 0)
        if bad.any():
            # rounding at a subtree boundary; fall back to an exact prefix search
            cum = np.cumsum(p[: self.n])
            idx[bad] = np.minimum(np.searchsorted(cum, u[bad], side="right"), self.n - 1)
        return idx, p[idx]


def prioritized_sample(buffer: ReplayBuffer, m: int, seed: int | np.random.Generator):
    """Sample ``m`` experiences with probability proportional to priority.

    Returns ``(indices, experiences, priorities)``.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    idx, p = buffer.sample(m, rng)
    return idx, [buffer.get(int(i)) for i in idx], p
