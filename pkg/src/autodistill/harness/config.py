"""Experiment configuration and its JSON file form.

A config names a student environment, one agent kind and a list of arms.
Each arm is one of

``dynamic``  teacher table distilled from a trained teacher's buffer
``static``   teacher table from value iteration (or Q-learning) on the abstract MDP
``crm``      counterfactual replay from every automaton state
``product``  automaton state in the input, no teacher
``vanilla``  environment state only

Every arm runs ``trials`` trials; trial ``k`` of every arm uses the same
seed, so arms are paired.  Seeds are either listed explicitly or spawned
from ``seed`` with :class:`numpy.random.SeedSequence`.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from ..envs import EnvSpec, SpecError

CONFIG_VERSION = 1
ARMS = {
    # arm -> (transfer, baseline)
    "dynamic": ("dynamic", "none"),
    "static": ("static", "none"),
    "crm": ("none", "crm"),
    "product": ("none", "product"),
    "vanilla": ("none", "vanilla"),
}
AGENT_KINDS = ("tabular", "dqn", "td3")
STOP_RULES = ("none", "threshold", "completion", "convergence")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    name: str
    env: EnvSpec
    agent: str = "tabular"
    arms: tuple[str, ...] = ("dynamic", "vanilla")
    trials: int = 20
    seed: int = 0
    seeds: tuple[int, ...] | None = None
    steps: int = 300_000
    stop: str = "none"
    # a fresh object layout per trial (seeded by the trial seed)
    layout_per_trial: bool = True
    # teacher side (used by the dynamic arm)
    teacher_env: EnvSpec | None = None
    teacher_agent: str = "tabular"
    teacher_steps: int = 200_000
    teacher_seed: int = 0
    static_mode: str = "value_iteration"
    # learner settings shared by all arms
    gamma: float = 0.99
    rho: float = 0.999
    alpha: float = 0.5
    epsilon: float = 0.1
    teacher_init: bool = True
    batch_size: int = 32
    learning_starts: int = 1_000
    start_steps: int = 5_000
    hidden: tuple[int, ...] = ()  # empty selects the learner default
    # reporting
    n_points: int = 100
    workers: int = 1
    out: str = "runs/experiment"

    def __post_init__(self):
        self.arms = tuple(self.arms)
        self.hidden = tuple(self.hidden)
        if self.seeds is not None:
            self.seeds = tuple(int(s) for s in self.seeds)
        if self.teacher_env is None:
            self.teacher_env = EnvSpec(self.env.kind, "grid", 7, 7, seed=self.teacher_seed)

    # -- validation ----------------------------------------------------------------

    def validate(self) -> "ExperimentConfig":
        if not self.name:
            raise ConfigError("name must be non-empty")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.steps < 1:
            raise ConfigError("steps must be positive")
        if self.agent not in AGENT_KINDS:
            raise ConfigError(f"agent must be one of {AGENT_KINDS}")
        if self.agent == "td3" and self.env.geometry != "continuous":
            raise ConfigError("td3 needs a continuous student environment")
        if self.agent != "td3" and self.env.geometry == "continuous":
            raise ConfigError("discrete agents need a grid student environment")
        if not self.arms:
            raise ConfigError("at least one arm is required")
        bad = [a for a in self.arms if a not in ARMS]
        if bad:
            raise ConfigError(f"unknown arms {bad}; expected a subset of {sorted(ARMS)}")
        if len(set(self.arms)) != len(self.arms):
            raise ConfigError("arms must be distinct")
        if self.teacher_env.kind != self.env.kind:
            raise ConfigError("teacher and student must share the task objective")
        if self.teacher_agent not in ("tabular", "dqn"):
            raise ConfigError("teacher_agent must be tabular or dqn")
        if self.teacher_env.geometry != "grid":
            raise ConfigError("teachers train on grids")
        if self.static_mode not in ("value_iteration", "q_learning"):
            raise ConfigError("static_mode must be value_iteration or q_learning")
        if self.stop not in STOP_RULES:
            raise ConfigError(f"stop must be one of {STOP_RULES}")
        if not 0 < self.rho <= 1:
            raise ConfigError("rho must lie in (0, 1]")
        if self.rho == 1:
            warnings.warn("rho = 1 never anneals: students follow teacher targets forever",
                          stacklevel=2)
        if not 0 <= self.gamma < 1:
            raise ConfigError("gamma must lie in [0, 1)")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.n_points < 1:
            raise ConfigError("n_points must be positive")
        if self.seeds is not None:
            if len(self.seeds) != self.trials:
                raise ConfigError("seeds must list one seed per trial")
            if len(set(self.seeds)) != len(self.seeds):
                raise ConfigError("seeds must be distinct")
            if min(self.seeds) < 0:
                raise ConfigError("seeds must be non-negative")
        return self

    def trial_seeds(self) -> list[int]:
        if self.seeds is not None:
            return list(self.seeds)
        children = np.random.SeedSequence(self.seed).spawn(self.trials)
        out = [int(c.generate_state(1, dtype=np.uint32)[0]) for c in children]
        if len(set(out)) != len(out):
            raise ConfigError("spawned seeds collide; pick another root seed")
        return out

    # -- serialization -------------------------------------------------------------

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["env"] = self.env.to_dict()
        d["teacher_env"] = self.teacher_env.to_dict()
        d["arms"] = list(self.arms)
        d["hidden"] = list(self.hidden)
        d["seeds"] = None if self.seeds is None else list(self.seeds)
        return {"version": CONFIG_VERSION, **d}

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        version = data.pop("version", CONFIG_VERSION)
        if version != CONFIG_VERSION:
            raise ConfigError(f"unsupported config version {version}")
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        if "name" not in data or "env" not in data:
            raise ConfigError("config needs at least 'name' and 'env'")
        try:
            data["env"] = EnvSpec.from_dict(data["env"])
            if data.get("teacher_env") is not None:
                data["teacher_env"] = EnvSpec.from_dict(data["teacher_env"])
            return cls(**data)
        except (SpecError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_json(Path(path).read_text())

    def digest(self) -> str:
        """Hash of everything that affects results (``workers`` and ``out`` excluded)."""
        d = self.to_dict()
        d.pop("workers")
        d.pop("out")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()
