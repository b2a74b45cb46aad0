"""Multi-trial experiment runner with CSV, SVG and DOT output.

Output layout under ``config.out``::

    config.json                 the validated config
    teacher/                    teacher artifact (dynamic arm only)
    tables/<arm>.qt             teacher tables (dynamic and static arms)
    trials/<arm>/trial_NNN.csv  one file per trial
    aggregate.csv               per-arm statistics on a fixed env-step grid
    curves.svg                  learning curves
    automaton.dot, qvalues.dot  objective automaton and annotated teacher values
    run.json                    digest, timings, versions, failures and summaries
"""

from __future__ import annotations

import json
import platform
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..distill import (
    AgentConfig,
    TrainConfig,
    distill_dynamic,
    static_teacher,
    train_student,
    train_teacher,
)
from ..envs import make_env
from ..ltlf import to_dot
from ..neural import DqnConfig, Td3Config
from ..rl import TeacherTable
from .config import ARMS, ExperimentConfig
from .report import plot_curves, report_qvalues

CSV_HEADER = "trial,episode,env_steps,return,moving_avg"
AGG_HEADER = "arm,env_steps,n,mean,median,q25,q75"
MIN_SUCCESS_FRACTION = 0.5


class PartialFailureError(RuntimeError):
    """Too few trials of some arm finished to aggregate."""


def fmt(x) -> str:
    """Float text with 17 significant digits (round-trips binary64)."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


@dataclass
class TrialResult:
    arm: str
    trial: int
    seed: int
    rows: list[tuple[int, int, float, float]] = field(default_factory=list)
    steps: int = 0
    first_completion_step: int | None = None
    threshold_episode: int | None = None
    wall: float = 0.0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class RunResult:
    config: ExperimentConfig
    trials: dict[str, list[TrialResult]]
    aggregate: dict[str, list[tuple]]
    metadata: dict
    out: Path


# -- trial execution -------------------------------------------------------------


def train_config(cfg: ExperimentConfig, seed: int) -> TrainConfig:
    dqn, td3 = DqnConfig(gamma=cfg.gamma), Td3Config(gamma=cfg.gamma)
    if cfg.hidden:
        dqn.hidden = td3.hidden = tuple(cfg.hidden)
    agent = AgentConfig(gamma=cfg.gamma, rho=cfg.rho, alpha=cfg.alpha, epsilon=cfg.epsilon,
                        teacher_init=cfg.teacher_init, batch_size=cfg.batch_size,
                        learning_starts=cfg.learning_starts, start_steps=cfg.start_steps,
                        dqn=dqn, td3=td3)
    return TrainConfig(steps=cfg.steps, seed=seed, agent=agent,
                       stop_at_threshold=cfg.stop == "threshold",
                       stop_at_completion=cfg.stop == "completion",
                       convergence_steps=20_000 if cfg.stop == "convergence" else 0)


def run_trial(cfg_dict: dict, arm: str, trial: int, seed: int, table_json: str | None) -> TrialResult:
    """One trial of one arm.  Pure function of its arguments."""
    start = time.perf_counter()
    out = TrialResult(arm, trial, seed)
    try:
        cfg = ExperimentConfig.from_dict(cfg_dict)
        spec = cfg.env.with_seed(seed) if cfg.layout_per_trial else cfg.env
        env = make_env(spec)
        teacher = TeacherTable.from_json(table_json) if table_json else None
        _, baseline = ARMS[arm]
        res = train_student(env, env.dfa, teacher, cfg.agent, baseline, train_config(cfg, seed))
        out.rows = [(r.episode, r.env_steps, r.ret, r.moving_avg) for r in res.curve]
        out.steps = res.steps
        out.first_completion_step = res.first_completion_step
        out.threshold_episode = res.threshold_episode
    except Exception:  # recorded, the run decides whether enough trials finished
        out.error = traceback.format_exc()
    out.wall = time.perf_counter() - start
    return out


def _run_trial_args(args):
    return run_trial(*args)


# -- aggregation -----------------------------------------------------------------


def step_grid(steps: int, n_points: int) -> list[int]:
    return sorted({max(1, round(steps * j / n_points)) for j in range(1, n_points + 1)})


def curve_at(env_steps: np.ndarray, values: np.ndarray, xs) -> np.ndarray:
    """Value of the last episode finished at or before each x (NaN before the first)."""
    i = np.searchsorted(env_steps, xs, side="right") - 1
    out = np.full(len(xs), np.nan)
    ok = i >= 0
    out[ok] = values[i[ok]]
    return out


def aggregate_curves(curves: list[tuple[np.ndarray, np.ndarray]], xs) -> list[tuple]:
    """Rows (x, n, mean, median, q25, q75) across trials, ignoring NaN."""
    if not curves:
        return []
    grid = np.vstack([curve_at(s, v, xs) for s, v in curves])
    rows = []
    for j, x in enumerate(xs):
        col = grid[:, j]
        col = col[~np.isnan(col)]
        if len(col) == 0:
            rows.append((x, 0, np.nan, np.nan, np.nan, np.nan))
            continue
        q25, med, q75 = np.percentile(col, [25, 50, 75])
        rows.append((x, len(col), float(np.mean(col)), float(med), float(q25), float(q75)))
    return rows


def read_trial_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(env_steps, return, moving_avg) columns of a per-trial CSV."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: unexpected header")
    rows = [ln.split(",") for ln in lines[1:]]
    steps = np.array([int(r[2]) for r in rows], dtype=np.int64)
    ret = np.array([float(r[3]) for r in rows])
    ma = np.array([float(r[4]) for r in rows])
    return steps, ret, ma


def aggregate_from_dir(out: str | Path, arm: str, xs) -> list[tuple]:
    """Recompute one arm's aggregate rows from its per-trial CSV files."""
    files = sorted((Path(out) / "trials" / arm).glob("trial_*.csv"))
    curves = []
    for f in files:
        s, _, ma = read_trial_csv(f)
        curves.append((s, ma))
    return aggregate_curves(curves, xs)


def write_trial_csv(path: Path, t: TrialResult) -> None:
    lines = [CSV_HEADER]
    for ep, steps, ret, ma in t.rows:
        lines.append(f"{t.trial},{ep},{steps},{fmt(ret)},{fmt(ma)}")
    path.write_text("\n".join(lines) + "\n")


def write_aggregate_csv(path: Path, aggregate: dict[str, list[tuple]]) -> None:
    lines = [AGG_HEADER]
    for arm, rows in aggregate.items():
        for x, n, *stats in rows:
            lines.append(",".join([arm, str(x), str(n), *(fmt(v) for v in stats)]))
    path.write_text("\n".join(lines) + "\n")


# -- run -------------------------------------------------------------------------


def teacher_tables(cfg: ExperimentConfig, out: Path) -> dict[str, TeacherTable]:
    tables = {}
    if "dynamic" in cfg.arms:
        tenv = make_env(cfg.teacher_env)
        tcfg = train_config(cfg, cfg.teacher_seed)
        tcfg.steps = cfg.teacher_steps
        tcfg.stop_at_threshold = tcfg.stop_at_completion = False
        tcfg.convergence_steps = 0
        art = train_teacher(tenv, tenv.dfa, cfg.teacher_agent, tcfg)
        art.save(out / "teacher")
        tables["dynamic"] = distill_dynamic(art, tenv.dfa)
    if "static" in cfg.arms:
        tables["static"] = static_teacher(cfg.env.kind, cfg.gamma, cfg.static_mode)
    return tables


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> RunResult:
    cfg.validate()
    workers = workers or cfg.workers
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg.save(out / "config.json")
    start = time.perf_counter()

    tables = teacher_tables(cfg, out)
    (out / "tables").mkdir(exist_ok=True)
    for arm, t in tables.items():
        t.save(out / "tables" / f"{arm}.qt")

    seeds = cfg.trial_seeds()
    cfg_dict = cfg.to_dict()
    jobs = []
    for arm in cfg.arms:
        table_json = tables[arm].to_json() if arm in tables else None
        jobs += [(cfg_dict, arm, k, s, table_json) for k, s in enumerate(seeds)]
    if workers == 1:
        results = [run_trial(*j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_trial_args, jobs))

    by_arm: dict[str, list[TrialResult]] = {arm: [] for arm in cfg.arms}
    for r in results:
        by_arm[r.arm].append(r)
    failures = [{"arm": r.arm, "trial": r.trial, "seed": r.seed, "error": r.error}
                for r in results if not r.ok]

    xs = step_grid(cfg.steps, cfg.n_points)
    aggregate = {}
    for arm, trials in by_arm.items():
        d = out / "trials" / arm
        d.mkdir(parents=True, exist_ok=True)
        for t in trials:
            if t.ok:
                write_trial_csv(d / f"trial_{t.trial:03d}.csv", t)
        good = [t for t in trials if t.ok]
        curves = [(np.array([r[1] for r in t.rows], dtype=np.int64),
                   np.array([r[3] for r in t.rows])) for t in good]
        aggregate[arm] = aggregate_curves(curves, xs)

    metadata = {
        "name": cfg.name,
        "config_digest": cfg.digest(),
        "wall_clock_s": time.perf_counter() - start,
        "versions": {"autodistill": __version__, "numpy": np.__version__,
                     "python": platform.python_version()},
        "seeds": seeds,
        "failures": failures,
        "summary": {arm: summarize(trials) for arm, trials in by_arm.items()},
    }
    (out / "run.json").write_text(json.dumps(metadata, indent=1) + "\n")

    short = [arm for arm, trials in by_arm.items()
             if sum(t.ok for t in trials) < MIN_SUCCESS_FRACTION * len(trials)]
    if short:
        raise PartialFailureError(
            f"fewer than {MIN_SUCCESS_FRACTION:.0%} of trials finished for arms {short}; "
            f"see {out / 'run.json'}")

    write_aggregate_csv(out / "aggregate.csv", aggregate)
    plot_curves(aggregate, out / "curves.svg", title=cfg.name)
    dfa = make_env(cfg.env).dfa
    (out / "automaton.dot").write_text(to_dot(dfa, cfg.env.kind))
    if tables:
        (out / "qvalues.dot").write_text(report_qvalues(list(tables.values()), dfa))
    return RunResult(cfg, by_arm, aggregate, metadata, out)


def summarize(trials: list[TrialResult]) -> dict:
    good = [t for t in trials if t.ok]

    def med(vals):
        # trials that never got there count as infinitely late; an infinite
        # median is reported as null
        m = float(np.median(vals)) if vals else np.inf
        return m if np.isfinite(m) else None

    return {
        "finished": len(good),
        "failed": len(trials) - len(good),
        "median_threshold_episode": med(
            [t.threshold_episode if t.threshold_episode is not None else np.inf for t in good]),
        "median_first_completion_step": med(
            [t.first_completion_step if t.first_completion_step is not None else np.inf
             for t in good]),
        "threshold_reached": sum(t.threshold_episode is not None for t in good),
        "completed": sum(t.first_completion_step is not None for t in good),
    }
