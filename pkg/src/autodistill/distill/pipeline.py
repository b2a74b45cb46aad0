"""Teacher training, dynamic and static distillation, and student training."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..automata import abstract_mdp, abstract_q_learning, env_reward_projection, value_iteration
from ..envs import objective, objective_dfa
from ..ltlf import Dfa
from ..neural import load_into, save_weights
from ..rl import TabularQ, TeacherEntry, TeacherTable
from .loop import EpisodeRecord, StudentResult, TrainConfig, run_training

ARTIFACT_VERSION = 1
TEACHER_KINDS = ("tabular", "dqn")


class DistillationError(RuntimeError):
    pass


@dataclass
class TeacherArtifact:
    """A trained teacher and its final experience buffer.

    ``omega``, ``label`` and ``q`` are aligned per buffered experience:
    automaton state, label of the next state and the final teacher's
    Q(s, a) for that experience.
    """

    kind: str
    ap: tuple[str, ...]
    n_states: int
    omega: np.ndarray
    label: np.ndarray
    q: np.ndarray
    model: object = field(repr=False, default=None)
    curve: list[EpisodeRecord] = field(default_factory=list, repr=False)

    def __len__(self) -> int:
        return len(self.q)

    def save(self, directory: str | Path) -> None:
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        meta = {"version": ARTIFACT_VERSION, "kind": self.kind, "ap": list(self.ap),
                "n_states": self.n_states,
                "curve": [[r.episode, r.env_steps, r.ret] for r in self.curve]}
        (out / "teacher.json").write_text(json.dumps(meta) + "\n")
        np.savez(out / "buffer.npz", omega=self.omega, label=self.label, q=self.q)
        if isinstance(self.model, TabularQ):
            rows = [[_jsonable(k), v.tolist()] for k, v in self.model.table.items()]
            (out / "qtable.json").write_text(json.dumps(rows) + "\n")
        elif self.model is not None:
            save_weights(out / "weights.bin", {"q": self.model.q})

    @classmethod
    def load(cls, directory: str | Path, model=None) -> "TeacherArtifact":
        """Load an artifact; pass a DQN learner of matching shape as ``model``
        to restore network weights."""
        src = Path(directory)
        meta = json.loads((src / "teacher.json").read_text())
        if meta.get("version") != ARTIFACT_VERSION:
            raise DistillationError(f"unsupported teacher artifact version {meta.get('version')}")
        with np.load(src / "buffer.npz") as z:
            omega, label, q = z["omega"], z["label"], z["q"]
        curve = [EpisodeRecord(e, s, r, float("nan"), 0.0) for e, s, r in meta["curve"]]
        if meta["kind"] == "tabular" and (src / "qtable.json").exists():
            rows = json.loads((src / "qtable.json").read_text())
            model = TabularQ(len(rows[0][1]) if rows else 4)
            for k, v in rows:
                model.table[_hashable(k)] = np.array(v, dtype=float)
        elif model is not None and (src / "weights.bin").exists():
            load_into(src / "weights.bin", {"q": model.q})
        return cls(meta["kind"], tuple(meta["ap"]), meta["n_states"], omega, label, q, model, curve)


def _jsonable(k):
    if isinstance(k, tuple):
        return [_jsonable(x) for x in k]
    return k


def _hashable(k):
    if isinstance(k, list):
        return tuple(_hashable(x) for x in k)
    return k


def train_teacher(env, d: Dfa | None, agent_kind: str, cfg: TrainConfig) -> TeacherArtifact:
    """Train a product-state teacher with plain RL and keep its final buffer."""
    if agent_kind not in TEACHER_KINDS:
        raise ValueError(f"teacher agent must be one of {TEACHER_KINDS}")
    d = d or env.dfa
    if agent_kind == "tabular" and cfg.history <= 0:
        cfg = TrainConfig(**{**cfg.__dict__, "history": cfg.agent.buffer_capacity})
    res = run_training(env, cfg, agent_kind, "product")
    agent = res.agent
    if agent_kind == "tabular":
        hist = list(agent.history)
        omega = np.array([h[1] for h in hist], dtype=np.int64)
        label = np.array([h[3] for h in hist], dtype=np.int64)
        q = np.array([agent.Q[(h[0], h[1])][h[2]] for h in hist], dtype=float)
        model = agent.Q
    else:
        buf = agent.buffer
        n = len(buf)
        omega, label = buf.omega[:n].copy(), buf.label_next[:n].copy()
        if n:
            qs = agent.learner.q(buf.obs[:n])
            q = qs[np.arange(n), buf.act[:n]].astype(float)
        else:
            q = np.zeros(0)
        model = agent.learner
    if not np.all(np.isfinite(q)):
        raise FloatingPointError("teacher produced non-finite Q-values")
    return TeacherArtifact(agent_kind, tuple(d.ap), d.n_states, omega, label, q, model, res.curve)


def distill_dynamic(artifact: TeacherArtifact, d: Dfa | None = None) -> TeacherTable:
    """Average teacher Q-value per (omega, next label) over the buffer."""
    if len(artifact) == 0:
        raise DistillationError("teacher buffer is empty; nothing to distill")
    keys = artifact.omega.astype(np.int64) * (1 << 32) + artifact.label.astype(np.int64)
    uniq, inv, counts = np.unique(keys, return_inverse=True, return_counts=True)
    sums = np.zeros(len(uniq))
    np.add.at(sums, inv, artifact.q)
    entries = {(int(u >> 32), int(u & 0xFFFFFFFF)): TeacherEntry(int(c), float(s / c))
               for u, c, s in zip(uniq, counts, sums)}
    n_states = d.n_states if d is not None else artifact.n_states
    ap = tuple(d.ap) if d is not None else artifact.ap
    return TeacherTable("dynamic", entries, ap, n_states)


def distill_static(d: Dfa, reward_projection, gamma: float = 0.99,
                   mode: str = "value_iteration", labels=None, **solver) -> TeacherTable:
    """Teacher table from the abstract MDP of ``d``; eta is 0 everywhere."""
    m = abstract_mdp(d, reward_projection, labels)
    if mode == "value_iteration":
        vt = value_iteration(m, gamma=gamma, **solver)
    elif mode == "q_learning":
        vt = abstract_q_learning(m, gamma=gamma, **solver)
    else:
        raise ValueError(f"unknown static mode {mode!r}")
    entries = {(int(w), int(s)): TeacherEntry(0, float(v)) for (w, s), v in vt.Q.items()}
    return TeacherTable("static", entries, tuple(d.ap), d.n_states)


def train_student(env, d: Dfa | None, teacher: TeacherTable | None, agent_kind: str,
                  baseline: str, cfg: TrainConfig) -> StudentResult:
    """Train a student; ``baseline='none'`` blends in ``teacher`` when given."""
    if d is not None and d.n_states != env.dfa.n_states:
        raise ValueError("automaton does not match the environment objective")
    if teacher is not None and teacher.ap and tuple(teacher.ap) != tuple(env.dfa.ap):
        raise ValueError("teacher table was built for different propositions")
    return run_training(env, cfg, agent_kind, baseline, teacher)


def static_teacher(kind: str, gamma: float = 0.99, mode: str = "value_iteration",
                   **solver) -> TeacherTable:
    """Static table of a task objective with the environment reward projected
    onto its automaton (step penalty, item propositions, completion)."""
    d = objective_dfa(kind)
    obj = objective(kind)
    items = 0
    for p in obj.item_props:
        items |= d.ap.bit(p)
    return distill_static(d, env_reward_projection(d, items), gamma, mode, **solver)
