import json
import re

import numpy as np
import pytest

from autodistill.cli import main
from autodistill.envs import EnvSpec, objective_dfa
from autodistill.harness import (
    AGG_HEADER,
    CSV_HEADER,
    ConfigError,
    ExperimentConfig,
    PartialFailureError,
    aggregate_curves,
    aggregate_from_dir,
    read_trial_csv,
    report_qvalues,
    run_experiment,
    step_grid,
)
from autodistill.harness import experiment as ex
from autodistill.rl import TeacherEntry, TeacherTable


def small_config(tmp_path, **kw):
    base = dict(name="small", env=EnvSpec("dungeon_quest", width=5, height=5),
                arms=("dynamic", "static", "vanilla"), trials=3, steps=3000,
                teacher_env=EnvSpec("dungeon_quest", width=5, height=5), teacher_steps=3000,
                n_points=20, out=str(tmp_path / "run"))
    base.update(kw)
    return ExperimentConfig(**base)


# -- config ----------------------------------------------------------------------


def test_config_round_trip(tmp_path):
    cfg = small_config(tmp_path, seeds=(4, 5, 6), hidden=(32, 32))
    cfg.save(tmp_path / "c.json")
    back = ExperimentConfig.load(tmp_path / "c.json")
    assert back == cfg and back.digest() == cfg.digest()


def test_digest_ignores_workers_and_out(tmp_path):
    a = small_config(tmp_path)
    b = small_config(tmp_path, workers=4, out="elsewhere")
    c = small_config(tmp_path, steps=4000)
    assert a.digest() == b.digest() != c.digest()


@pytest.mark.parametrize("change", [
    {"trials": 0},
    {"steps": 0},
    {"agent": "sarsa"},
    {"agent": "td3"},
    {"arms": ()},
    {"arms": ("dynamic", "dynamic")},
    {"arms": ("oracle",)},
    {"stop": "sometimes"},
    {"rho": 0.0},
    {"gamma": 1.0},
    {"workers": 0},
    {"seeds": (1, 2)},
    {"seeds": (1, 1, 2)},
    {"teacher_env": EnvSpec("diamond_mine")},
    {"static_mode": "guess"},
])
def test_config_validation(tmp_path, change):
    with pytest.raises(ConfigError):
        small_config(tmp_path, **change).validate()


def test_rho_one_warns(tmp_path):
    with pytest.warns(UserWarning):
        small_config(tmp_path, rho=1.0).validate()


@pytest.mark.parametrize("text", [
    "[]",
    "{not json",
    '{"name": "x"}',
    '{"name": "x", "env": {"kind": "dungeon_quest"}, "colour": 1}',
    '{"version": 7, "name": "x", "env": {"kind": "dungeon_quest"}}',
    '{"name": "x", "env": {"kind": "nope"}}',
])
def test_config_parse_errors(text):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json(text)


def test_trial_seeds_spawned_and_distinct(tmp_path):
    cfg = small_config(tmp_path, trials=50)
    s = cfg.trial_seeds()
    assert len(set(s)) == 50 and s == small_config(tmp_path, trials=50).trial_seeds()
    assert small_config(tmp_path, seeds=(9, 8, 7)).trial_seeds() == [9, 8, 7]


# -- aggregation -----------------------------------------------------------------


def test_step_grid():
    assert step_grid(100, 4) == [25, 50, 75, 100]
    assert step_grid(3, 10) == [1, 2, 3]


def test_aggregate_curves_hold_last_value():
    a = (np.array([10, 20]), np.array([1.0, 3.0]))
    b = (np.array([5, 30]), np.array([2.0, 4.0]))
    rows = aggregate_curves([a, b], [5, 10, 25, 30])
    assert rows[0][:3] == (5, 1, 2.0)
    assert rows[1][1:3] == (2, 1.5)
    assert rows[2][1:3] == (2, 2.5)
    assert rows[3][1:3] == (2, 3.5)
    assert aggregate_curves([a], [1])[0][1] == 0


# -- runs ------------------------------------------------------------------------


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("harness")
    return run_experiment(small_config(tmp))


def test_run_writes_outputs(small_run):
    out = small_run.out
    for name in ("config.json", "run.json", "aggregate.csv", "curves.svg", "automaton.dot",
                 "qvalues.dot", "tables/dynamic.qt", "tables/static.qt", "teacher/teacher.json"):
        assert (out / name).exists(), name
    for arm in ("dynamic", "static", "vanilla"):
        files = sorted((out / "trials" / arm).glob("trial_*.csv"))
        assert len(files) == 3
        assert files[0].read_text().splitlines()[0] == CSV_HEADER
    meta = json.loads((out / "run.json").read_text())
    assert meta["config_digest"] == small_run.config.digest()
    assert not meta["failures"]
    assert set(meta["summary"]) == {"dynamic", "static", "vanilla"}


def test_aggregate_recomputes_from_trial_files(small_run):
    out = small_run.out
    xs = step_grid(small_run.config.steps, small_run.config.n_points)
    lines = (out / "aggregate.csv").read_text().splitlines()
    assert lines[0] == AGG_HEADER
    for arm in small_run.config.arms:
        rows = aggregate_from_dir(out, arm, xs)
        expected = [",".join([arm, str(x), str(n), *(ex.fmt(v) for v in st)]) for x, n, *st in rows]
        assert [ln for ln in lines[1:] if ln.startswith(arm + ",")] == expected


def test_trial_csv_moving_average_recomputes(small_run):
    f = small_run.out / "trials" / "vanilla" / "trial_000.csv"
    _, ret, ma = read_trial_csv(f)
    from autodistill.distill import moving_average
    assert np.array_equal(moving_average(ret), ma)


def test_arms_are_paired_by_seed(small_run):
    seeds = [[t.seed for t in small_run.trials[a]] for a in small_run.config.arms]
    assert seeds[0] == seeds[1] == seeds[2]


def test_rerun_is_byte_identical(small_run, tmp_path):
    cfg = ExperimentConfig.from_dict(small_run.config.to_dict())
    cfg.out = str(tmp_path / "again")
    again = run_experiment(cfg)
    for f in sorted(small_run.out.glob("trials/*/*.csv")) + [small_run.out / "aggregate.csv",
                                                           small_run.out / "curves.svg"]:
        rel = f.relative_to(small_run.out)
        assert (again.out / rel).read_bytes() == f.read_bytes(), rel


def test_partial_failure(tmp_path, monkeypatch):
    cfg = small_config(tmp_path, arms=("vanilla",), trials=2)
    real = ex.train_student

    def flaky(env, d, teacher, kind, baseline, tcfg):
        raise RuntimeError("boom")

    monkeypatch.setattr(ex, "train_student", flaky)
    with pytest.raises(PartialFailureError):
        run_experiment(cfg)
    meta = json.loads((tmp_path / "run" / "run.json").read_text())
    assert len(meta["failures"]) == 2 and "boom" in meta["failures"][0]["error"]
    monkeypatch.setattr(ex, "train_student", real)


def test_minority_failure_still_aggregates(tmp_path, monkeypatch):
    cfg = small_config(tmp_path, arms=("vanilla",), trials=3)
    real = ex.train_student
    bad_seed = cfg.trial_seeds()[1]

    def flaky(env, d, teacher, kind, baseline, tcfg):
        if tcfg.seed == bad_seed:
            raise RuntimeError("boom")
        return real(env, d, teacher, kind, baseline, tcfg)

    monkeypatch.setattr(ex, "train_student", flaky)
    res = run_experiment(cfg)
    assert res.metadata["summary"]["vanilla"]["failed"] == 1
    assert len(list((res.out / "trials" / "vanilla").glob("*.csv"))) == 2


# -- DOT reports -----------------------------------------------------------------


def test_qvalue_report_single_entry():
    d = objective_dfa("blind_craftsman")
    t = TeacherTable("dynamic", {(d.initial, 1): TeacherEntry(7, 12.5)})
    dot = report_qvalues(t, d)
    annotated = [ln for ln in dot.splitlines() if "Q=" in ln]
    assert len(annotated) == 1
    assert "Q=12.50 n=7" in annotated[0] and "color=red" in annotated[0]


def test_qvalue_report_empty_table_is_all_dashed():
    d = objective_dfa("dungeon_quest")
    dot = report_qvalues(TeacherTable("static"), d)
    edges = [ln for ln in dot.splitlines() if "->" in ln and "__start" not in ln]
    assert edges and all("dashed" in ln and "color=blue" in ln for ln in edges)


def test_qvalue_report_overlays_tables():
    d = objective_dfa("blind_craftsman")
    a = TeacherTable("dynamic", {(d.initial, 1): TeacherEntry(1, 1.0)})
    b = TeacherTable("static", {(d.initial, 1): TeacherEntry(0, 2.0)})
    dot = report_qvalues([a, b], d)
    assert dot.count("Q=") == 2 and dot.startswith("digraph")


# -- command line ----------------------------------------------------------------


def test_cli_compile(capsys, tmp_path):
    assert main(["compile", "--env", "blind_craftsman", "--dot", str(tmp_path / "a.dot")]) == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["states_without_sink"] == 4
    assert (tmp_path / "a.dot").read_text().startswith("digraph")
    assert main(["compile", "--formula", "F(a) & F(b)", "--ap", "a,b"]) == 0


def test_cli_compile_from_files(capsys, tmp_path):
    (tmp_path / "f.ltl").write_text("F(sword) & F(shield)\n")
    (tmp_path / "ap.txt").write_text("sword\nshield\n")
    (tmp_path / "feasible.json").write_text('[[], ["sword"], ["shield"]]')
    argv = ["compile", "--formula", str(tmp_path / "f.ltl"), "--ap", str(tmp_path / "ap.txt"),
            "--stats", str(tmp_path / "s.json")]
    assert main(argv) == 0
    full = json.loads((tmp_path / "s.json").read_text())
    assert main(argv + ["--feasible", str(tmp_path / "feasible.json")]) == 0
    restricted = json.loads((tmp_path / "s.json").read_text())
    assert full["states_without_sink"] == restricted["states_without_sink"] == 4
    assert restricted["transitions_guarded_edges"] <= full["transitions_guarded_edges"]
    capsys.readouterr()


@pytest.mark.parametrize("argv", [
    ["compile"],
    ["compile", "--formula", "F(a", "--ap", "a"],
    ["compile", "--formula", "F(z)", "--ap", "a"],
    ["run", "--config", "/nonexistent.json"],
    ["report", "--table", "/nonexistent.qt", "--env", "dungeon_quest"],
    ["distill", "--teacher", "/nonexistent", "--mode", "dynamic", "--out", "x.qt"],
])
def test_cli_invalid_input_exit_code(argv):
    assert main(argv) == 1


def test_cli_bad_config_file(tmp_path):
    (tmp_path / "c.json").write_text('{"name": "x", "env": {"kind": "dungeon_quest"}, "trials": 0}')
    assert main(["run", "--config", str(tmp_path / "c.json")]) == 1


def test_cli_pipeline(tmp_path, capsys):
    t = tmp_path / "teacher"
    assert main(["train-teacher", "--env", "dungeon_quest", "--geometry", "grid:5x5",
                 "--steps", "3000", "--out", str(t)]) == 0
    assert (t / "spec.json").exists()
    assert main(["distill", "--teacher", str(t), "--out", str(tmp_path / "d.qt")]) == 0
    assert main(["distill", "--teacher", str(t), "--mode", "static",
                 "--out", str(tmp_path / "s.qt")]) == 0
    assert TeacherTable.load(tmp_path / "s.qt").provenance == "static"
    assert main(["train-student", "--env", "dungeon_quest", "--geometry", "grid:5x5",
                 "--transfer", str(tmp_path / "d.qt"), "--steps", "2000",
                 "--out", str(tmp_path / "student")]) == 0
    summary = json.loads((tmp_path / "student" / "summary.json").read_text())
    assert summary["steps"] == 2000
    assert main(["report", "--env", "dungeon_quest", "--table", str(tmp_path / "d.qt"),
                 "--table", str(tmp_path / "s.qt"), "--out", str(tmp_path / "q.dot")]) == 0
    assert re.search(r"color=red", (tmp_path / "q.dot").read_text())


def test_cli_run_and_partial_exit_code(tmp_path, monkeypatch):
    cfg = small_config(tmp_path, arms=("vanilla",), trials=2, steps=1000)
    cfg.save(tmp_path / "c.json")
    assert main(["run", "--config", str(tmp_path / "c.json")]) == 0

    def boom(*a, **k):
        raise RuntimeError("boom")

    monkeypatch.setattr(ex, "train_student", boom)
    assert main(["run", "--config", str(tmp_path / "c.json"), "--out", str(tmp_path / "b")]) == 3


def test_cli_runtime_error_exit_code(tmp_path, monkeypatch):
    import autodistill.cli as cli

    def boom(*a, **k):
        raise RuntimeError("boom")

    monkeypatch.setattr(cli, "compile_formula", boom)
    assert main(["compile", "--formula", "F(a)", "--ap", "a"]) == 2
