"""Training loop shared by teachers and students."""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..rl import Experience, TeacherTable
from .agents import AGENTS, AgentConfig

THRESHOLD = 90.0
WINDOW = 100


@dataclass(frozen=True)
class EpisodeRecord:
    episode: int
    env_steps: int  # cumulative environment steps at episode end
    ret: float
    moving_avg: float
    wall: float  # seconds since the run started; never written to CSV


@dataclass
class TrainConfig:
    steps: int = 300_000
    seed: int = 0
    agent: AgentConfig = field(default_factory=AgentConfig)
    threshold: float = THRESHOLD
    window: int = WINDOW
    stop_at_threshold: bool = False
    stop_at_completion: bool = False
    # "until convergence": moving average within tol of its max for this many steps
    convergence_steps: int = 0
    convergence_tol: float = 0.02
    history: int = 0  # tabular only: experiences kept for distillation

    def __post_init__(self):
        if self.steps < 0:
            raise ValueError("steps must be non-negative")
        if self.window < 1:
            raise ValueError("window must be positive")


@dataclass
class StudentResult:
    curve: list[EpisodeRecord]
    steps: int
    first_completion_step: int | None
    threshold_episode: int | None
    agent: object = field(repr=False, default=None)

    @property
    def returns(self) -> np.ndarray:
        return np.array([r.ret for r in self.curve])

    @property
    def completed(self) -> bool:
        return self.first_completion_step is not None


def moving_average(returns, window: int = WINDOW) -> np.ndarray:
    """Trailing mean over the last ``window`` episodes (shorter at the start)."""
    x = [float(r) for r in returns]
    return np.array([_window_mean(x[: i + 1], window) for i in range(len(x))])


def _window_mean(returns: list[float], window: int) -> float:
    # plain left-to-right sum so the CSV value is recomputable bit for bit
    tail = returns[-window:]
    return sum(tail) / len(tail)


def _observation(env, tabular: bool):
    return env.key() if tabular else env.features()


def run_training(env, cfg: TrainConfig, agent_kind: str, baseline: str,
                 teacher: TeacherTable | None = None) -> StudentResult:
    """Run one agent for ``cfg.steps`` environment steps (or until a stop rule)."""
    if agent_kind not in AGENTS:
        raise ValueError(f"unknown agent kind {agent_kind!r}")
    if baseline == "crm" and teacher is not None:
        warnings.warn("crm baseline combined with a teacher blend", stacklevel=2)
    rng = np.random.default_rng(cfg.seed)
    if agent_kind == "tabular":
        agent = AGENTS[agent_kind](env, cfg.agent, teacher, baseline, rng, history=cfg.history)
    else:
        agent = AGENTS[agent_kind](env, cfg.agent, teacher, baseline, rng)
    tabular = agent_kind == "tabular"
    start = time.perf_counter()
    curve: list[EpisodeRecord] = []
    returns: list[float] = []
    first_done = threshold_ep = None
    best_ma, stable_since = -math.inf, 0
    step = 0
    while step < cfg.steps:
        env.reset()
        agent.begin_episode()
        s = _observation(env, tabular)
        ep_ret = 0.0
        done = env.done
        while not done and step < cfg.steps:
            a = agent.act(step, cfg.steps)
            w = env.omega
            _, r, done = env.step(a)
            s2 = _observation(env, tabular)
            exp = Experience(s, w, a, r, s2, env.omega, bool(env.accepted), env.last_label)
            agent.observe(exp, step)
            step += 1
            ep_ret += r
            s = s2
            if env.accepted and first_done is None:
                first_done = step
        if not done:
            break  # budget ran out mid-episode; the partial episode is not recorded
        returns.append(ep_ret)
        ma = _window_mean(returns, cfg.window)
        curve.append(EpisodeRecord(len(returns), step, ep_ret, ma, time.perf_counter() - start))
        if threshold_ep is None and ma >= cfg.threshold:
            threshold_ep = len(returns)
            if cfg.stop_at_threshold:
                break
        if cfg.stop_at_completion and first_done is not None:
            break
        if cfg.convergence_steps:
            band = cfg.convergence_tol * abs(ma)
            if ma > best_ma + band or ma < best_ma - cfg.convergence_tol * abs(best_ma):
                stable_since = step
            best_ma = max(best_ma, ma)
            if step - stable_since >= cfg.convergence_steps:
                break
    return StudentResult(curve, step, first_done, threshold_ep, agent)
