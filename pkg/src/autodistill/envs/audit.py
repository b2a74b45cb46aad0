"""Episode traces and an independent reward reconstruction.

A trace is a list of :class:`TraceRecord`, one per step plus the reset
record (step 0, no action).  ``dump_trace`` writes it as JSON lines with the
fields ``step, digest, action, reward, label, omega`` (plus position and
inventory, which the audit needs).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .world import (
    ACTION_CAP,
    BOUNDARY_PENALTY,
    COMPLETION_REWARD,
    ITEM_REWARD,
    STEP_PENALTY,
    Env,
    EnvState,
)

Policy = Callable[[Env, np.random.Generator], object]


@dataclass(frozen=True)
class TraceRecord:
    step: int
    digest: str
    action: object
    reward: float
    label: int
    omega: int
    pos: tuple
    inventory: tuple


def state_digest(s: EnvState) -> str:
    return hashlib.sha1(repr((s.pos, s.inventory, s.step, s.omega)).encode()).hexdigest()[:16]


def random_policy(env: Env, rng: np.random.Generator):
    if env.continuous:
        return rng.uniform(-ACTION_CAP, ACTION_CAP, size=2)
    return int(rng.integers(env.n_actions))


def run_episode(env: Env, policy: Policy = random_policy, rng=None) -> list[TraceRecord]:
    rng = rng if rng is not None else np.random.default_rng(0)
    s, lab, omega = env.reset()
    out = [TraceRecord(0, state_digest(s), None, 0.0, lab, omega, s.pos, s.inventory)]
    done = env.done
    while not done:
        a = policy(env, rng)
        s, r, done = env.step(a)
        act = [float(x) for x in np.ravel(a)] if env.continuous else int(a)
        out.append(TraceRecord(s.step, state_digest(s), act, r, env.last_label, s.omega,
                               s.pos, s.inventory))
    return out


def dump_trace(trace: list[TraceRecord], path: str | Path) -> None:
    with open(path, "w") as fh:
        for rec in trace:
            fh.write(json.dumps(asdict(rec)) + "\n")


def load_trace(path: str | Path) -> list[TraceRecord]:
    out = []
    for line in Path(path).read_text().splitlines():
        d = json.loads(line)
        d["pos"], d["inventory"] = tuple(d["pos"]), tuple(d["inventory"])
        out.append(TraceRecord(**d))
    return out


def reconstruct_rewards(trace: list[TraceRecord], env: Env) -> list[float]:
    """Per-step rewards rebuilt from positions, inventories and automaton
    states only (no use of the environment's own reward bookkeeping)."""
    slots = env.rules.slots
    paid = [slots.index(n) for n in env.rules.rewarded]
    accepting = env.dfa.accepting
    lim = np.array([env.spec.width, env.spec.height], dtype=float)
    out = []
    for prev, cur in zip(trace, trace[1:]):
        r = STEP_PENALTY
        r += ITEM_REWARD * sum(max(0, cur.inventory[i] - prev.inventory[i]) for i in paid)
        if env.continuous:
            want = np.asarray(prev.pos) + np.clip(np.asarray(cur.action, dtype=float), -ACTION_CAP, ACTION_CAP)
            if np.any(want < 0) or np.any(want > lim):
                r += BOUNDARY_PENALTY
        if cur.omega in accepting and prev.omega not in accepting:
            r += COMPLETION_REWARD
        out.append(r)
    return out
