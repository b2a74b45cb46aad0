"""Command-line interface.

Exit codes: 0 success, 1 invalid input, 2 runtime failure, 3 too many
failed trials to aggregate.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import traceback
from pathlib import Path

from .distill import (
    AgentConfig,
    DistillationError,
    TeacherArtifact,
    TrainConfig,
    distill_dynamic,
    static_teacher,
    train_student,
    train_teacher,
)
from .envs import EnvSpec, SpecError, load_spec, make_env, objective_dfa, parse_geometry
from .harness import ConfigError, ExperimentConfig, PartialFailureError, report_qvalues, run_experiment
from .harness.experiment import TrialResult, write_trial_csv
from .ltlf import (
    AtomicPropositionSet,
    LtlfSyntaxError,
    StateExplosionError,
    UnknownPropositionError,
    compile_formula,
    parse,
    to_dot,
)
from .rl import TeacherTable, TeacherTableError

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME, EXIT_PARTIAL = 0, 1, 2, 3


class UsageError(ValueError):
    pass


def _spec(args, default_geometry: str) -> EnvSpec:
    geometry, w, h = parse_geometry(args.geometry or default_geometry)
    return EnvSpec(args.env, geometry, w, h, obstacles=getattr(args, "obstacles", False),
                   seed=args.seed)


def _text_or_file(value: str) -> str:
    """The contents of ``value`` if it names an existing file, else ``value`` itself."""
    try:
        is_file = Path(value).is_file()
    except OSError:  # e.g. a long formula is not a valid file name
        is_file = False
    return Path(value).read_text().strip() if is_file else value


def cmd_compile(args) -> int:
    if args.env:
        d = objective_dfa(args.env, restrict=not args.unrestricted)
    else:
        if not args.formula or not args.ap:
            raise UsageError("give --env, or both --formula and --ap")
        ap = AtomicPropositionSet(re.findall(r"[^,\s]+", _text_or_file(args.ap)))
        feasible = None
        if args.feasible:
            feasible = [set(label) for label in json.loads(Path(args.feasible).read_text())]
        d = compile_formula(parse(_text_or_file(args.formula), ap), ap, feasible)
    stats = json.dumps(d.stats(), indent=1)
    print(stats)
    if args.stats:
        Path(args.stats).write_text(stats + "\n")
    if args.dot:
        Path(args.dot).write_text(to_dot(d, args.env or "dfa"))
    return EXIT_OK


def cmd_train_teacher(args) -> int:
    spec = load_spec(args.spec) if args.spec else _spec(args, "grid:7x7")
    env = make_env(spec)
    cfg = TrainConfig(steps=args.steps, seed=args.seed)
    art = train_teacher(env, env.dfa, args.agent, cfg)
    out = Path(args.out)
    art.save(out)
    (out / "spec.json").write_text(json.dumps(spec.to_dict(), indent=1) + "\n")
    print(f"teacher: {len(art.curve)} episodes, {len(art)} buffered experiences -> {out}")
    return EXIT_OK


def cmd_distill(args) -> int:
    src = Path(args.teacher)
    if args.mode == "dynamic":
        art = TeacherArtifact.load(src)
        table = distill_dynamic(art)
    else:
        spec = load_spec(src / "spec.json") if (src / "spec.json").exists() else None
        kind = args.env or (spec.kind if spec else None)
        if kind is None:
            raise UsageError("static distillation needs --env or a teacher directory with spec.json")
        table = static_teacher(kind, args.gamma, args.static_mode)
    table.save(args.out)
    print(f"{table.provenance} table with {len(table)} transitions -> {args.out}")
    return EXIT_OK


def cmd_train_student(args) -> int:
    spec = _spec(args, "grid:10x10")
    env = make_env(spec)
    teacher = None if args.transfer in (None, "none") else TeacherTable.load(args.transfer)
    cfg = TrainConfig(steps=args.steps, seed=args.seed,
                      agent=AgentConfig(rho=args.rho, teacher_init=not args.no_teacher_init))
    res = train_student(env, env.dfa, teacher, args.agent, args.baseline, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t = TrialResult("student", 0, args.seed,
                    [(r.episode, r.env_steps, r.ret, r.moving_avg) for r in res.curve])
    write_trial_csv(out / "trial_000.csv", t)
    summary = {"steps": res.steps, "episodes": len(res.curve),
               "first_completion_step": res.first_completion_step,
               "threshold_episode": res.threshold_episode}
    (out / "summary.json").write_text(json.dumps(summary, indent=1) + "\n")
    print(json.dumps(summary))
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    if args.out:
        cfg.out = args.out
    if args.workers:
        cfg.workers = args.workers
    res = run_experiment(cfg)
    print(json.dumps(res.metadata["summary"], indent=1))
    print(f"results in {res.out}")
    return EXIT_OK


def cmd_report(args) -> int:
    tables = [TeacherTable.load(p) for p in args.table]
    d = objective_dfa(args.env)
    text = report_qvalues(tables, d)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="autodistill", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    kinds = ["blind_craftsman", "dungeon_quest", "diamond_mine"]

    c = sub.add_parser("compile", help="compile an objective to a minimized DFA")
    c.add_argument("--env", choices=kinds)
    c.add_argument("--formula", help="formula text, or a file holding it")
    c.add_argument("--ap", help="propositions separated by commas or whitespace, or a file of them")
    c.add_argument("--feasible", help="JSON file with a list of feasible labels (lists of names)")
    c.add_argument("--stats", help="write the size report here as JSON")
    c.add_argument("--unrestricted", action="store_true", help="ignore the feasible-label set")
    c.add_argument("--dot", help="write a DOT rendering here")
    c.set_defaults(func=cmd_compile)

    t = sub.add_parser("train-teacher", help="train a teacher and keep its buffer")
    t.add_argument("--env", choices=kinds, required=True)
    t.add_argument("--geometry", help="grid:WxH (default grid:7x7)")
    t.add_argument("--spec", help="environment spec JSON (overrides --env/--geometry)")
    t.add_argument("--obstacles", action="store_true")
    t.add_argument("--agent", choices=["tabular", "dqn"], default="tabular")
    t.add_argument("--steps", type=int, default=200_000)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_train_teacher)

    d = sub.add_parser("distill", help="build a teacher table")
    d.add_argument("--teacher", required=True, help="teacher directory")
    d.add_argument("--mode", choices=["dynamic", "static"], default="dynamic")
    d.add_argument("--env", choices=kinds, help="task kind for static mode")
    d.add_argument("--gamma", type=float, default=0.99)
    d.add_argument("--static-mode", choices=["value_iteration", "q_learning"],
                   default="value_iteration")
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_distill)

    s = sub.add_parser("train-student", help="train one student")
    s.add_argument("--env", choices=kinds, required=True)
    s.add_argument("--geometry", help="grid:WxH or cont:WxH (default grid:10x10)")
    s.add_argument("--obstacles", action="store_true")
    s.add_argument("--agent", choices=["tabular", "dqn", "td3"], default="tabular")
    s.add_argument("--transfer", default="none", help="teacher table file, or none")
    s.add_argument("--baseline", choices=["none", "vanilla", "product", "crm"], default="none")
    s.add_argument("--rho", type=float, default=0.999)
    s.add_argument("--no-teacher-init", action="store_true")
    s.add_argument("--steps", type=int, default=300_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_train_student)

    r = sub.add_parser("run", help="run a multi-trial experiment from a config file")
    r.add_argument("--config", required=True)
    r.add_argument("--workers", type=int)
    r.add_argument("--out")
    r.set_defaults(func=cmd_run)

    q = sub.add_parser("report", help="render teacher tables onto the objective automaton")
    q.add_argument("--table", action="append", required=True, help="table file (repeatable)")
    q.add_argument("--env", choices=kinds, required=True)
    q.add_argument("--out")
    q.set_defaults(func=cmd_report)
    return p


INVALID = (UsageError, ConfigError, SpecError, LtlfSyntaxError, UnknownPropositionError,
           StateExplosionError, TeacherTableError, DistillationError, FileNotFoundError,
           json.JSONDecodeError)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PartialFailureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    except INVALID as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception:
        traceback.print_exc()
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
