import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from autodistill.envs import (
    EnvSpec,
    EpisodeDoneError,
    LayoutError,
    SpecError,
    dump_trace,
    load_spec,
    load_trace,
    make_env,
    make_layout,
    parse_geometry,
    random_policy,
    reconstruct_rewards,
    run_episode,
    save_spec,
)
from autodistill.envs.corridor import TwoTraceCorridor
from autodistill.envs.objectives import REFERENCE_SIZES, objective_dfa
from autodistill.envs.rules import TOOLS_GOAL, WOOD_CAP
from autodistill.envs.world import COMPLETION_REWARD, STEP_PENALTY
from autodistill.ltlf import accepts

KINDS = ["blind_craftsman", "dungeon_quest", "diamond_mine"]


def drive(env, path):
    """Walk a grid env along a list of cells (adjacent moves only)."""
    moves = {(0, 1): 0, (1, 0): 1, (0, -1): 2, (-1, 0): 3}
    total = 0.0
    for cell in path:
        d = (cell[0] - env.pos[0], cell[1] - env.pos[1])
        _, r, _ = env.step(moves[d])
        total += r
    return total


def route(a, b):
    """Cells from a (exclusive) to b (inclusive), x first then y."""
    out = []
    x, y = a
    while x != b[0]:
        x += 1 if b[0] > x else -1
        out.append((x, y))
    while y != b[1]:
        y += 1 if b[1] > y else -1
        out.append((x, y))
    return out


# -- specs ----------------------------------------------------------------------


@pytest.mark.parametrize("text,expected", [
    ("grid:7x7", ("grid", 7, 7)),
    ("grid:10x12", ("grid", 10, 12)),
    ("cont:7x7", ("continuous", 7.0, 7.0)),
    ("cont:2.5x3", ("continuous", 2.5, 3.0)),
])
def test_parse_geometry(text, expected):
    assert parse_geometry(text) == expected


@pytest.mark.parametrize("bad", ["grid", "hex:7x7", "grid:7", "grid:axb"])
def test_parse_geometry_rejects(bad):
    with pytest.raises(SpecError):
        parse_geometry(bad)


@pytest.mark.parametrize("kwargs", [
    {"kind": "nope"},
    {"kind": "dungeon_quest", "geometry": "hex"},
    {"kind": "dungeon_quest", "width": 4},
    {"kind": "dungeon_quest", "width": 7.5},
    {"kind": "dungeon_quest", "geometry": "continuous", "obstacles": True},
    {"kind": "dungeon_quest", "max_steps": -1},
])
def test_spec_validation(kwargs):
    with pytest.raises(SpecError):
        EnvSpec(**kwargs)


def test_spec_round_trip(tmp_path):
    spec = EnvSpec("diamond_mine", "continuous", 7.0, 7.0, seed=3, max_steps=123)
    save_spec(spec, tmp_path / "s.json")
    assert load_spec(tmp_path / "s.json") == spec


def test_spec_rejects_unknown_fields():
    with pytest.raises(SpecError):
        EnvSpec.from_dict({"kind": "dungeon_quest", "colour": "red"})


# -- layouts --------------------------------------------------------------------


@pytest.mark.parametrize("kind", KINDS)
def test_layout_is_seeded(kind):
    spec = EnvSpec(kind, seed=5)
    assert make_layout(spec) == make_layout(spec)
    assert make_layout(spec) != make_layout(spec.with_seed(6))


@pytest.mark.parametrize("kind", KINDS)
def test_grid_layout_cells_distinct(kind):
    lay = make_layout(EnvSpec(kind, width=10, height=10, seed=1))
    cells = [lay.start] + [p for _, p in lay.objects]
    assert len(set(cells)) == len(cells)


@pytest.mark.parametrize("seed", range(5))
def test_continuous_layout_separation(seed):
    lay = make_layout(EnvSpec("blind_craftsman", "continuous", 7.0, 7.0, seed=seed))
    pts = np.array([lay.start] + [p for _, p in lay.objects])
    d = np.hypot(*(pts[:, None, :] - pts[None, :, :]).transpose(2, 0, 1))
    assert d[np.triu_indices(len(pts), 1)].min() >= 1.0


@pytest.mark.parametrize("seed", range(5))
def test_obstacle_layout_keeps_objects_reachable(seed):
    spec = EnvSpec("blind_craftsman", width=10, height=10, obstacles=True, seed=seed)
    lay = make_layout(spec)
    assert lay.obstacles
    assert not lay.obstacles & {p for _, p in lay.objects}
    env = make_env(spec)
    # breadth-first search over free cells reaches every object
    from collections import deque
    seen, todo = {lay.start}, deque([lay.start])
    while todo:
        x, y = todo.popleft()
        for dx, dy in ((0, 1), (1, 0), (0, -1), (-1, 0)):
            c = (x + dx, y + dy)
            if 0 <= c[0] < 10 and 0 <= c[1] < 10 and c not in lay.obstacles and c not in seen:
                seen.add(c)
                todo.append(c)
    assert all(p in seen for _, p in lay.objects)
    assert env.layout == lay


def test_impossible_obstacle_density_raises():
    spec = EnvSpec("blind_craftsman", width=10, height=10, obstacles=True, obstacle_density=1.0)
    with pytest.raises(LayoutError):
        make_layout(spec)


def test_object_counts_scale_with_area():
    small = make_layout(EnvSpec("blind_craftsman", width=7, height=7))
    big = make_layout(EnvSpec("blind_craftsman", width=10, height=10))
    woods = lambda lay: sum(n == "wood" for n, _ in lay.objects)
    assert (woods(small), woods(big)) == (5, 8)


# -- episode protocol ------------------------------------------------------------


def test_step_after_done_raises():
    env = make_env(EnvSpec("dungeon_quest", max_steps=3))
    for _ in range(3):
        env.step(0)
    assert env.done and env.info["truncated"]
    with pytest.raises(EpisodeDoneError):
        env.step(0)


def test_truncation_is_not_acceptance():
    env = make_env(EnvSpec("dungeon_quest", max_steps=5))
    env.reset()
    done = False
    while not done:
        _, _, done = env.step(0)
    assert not env.accepted and env.t == 5


def test_grid_wall_bump_stays_put():
    env = make_env(EnvSpec("dungeon_quest", seed=0))
    env.reset()
    # walk into the south wall
    for _ in range(10):
        env.step(2)
    pos = env.pos
    _, r, _ = env.step(2)
    assert env.pos == pos and r == pytest.approx(STEP_PENALTY)


def test_continuous_boundary_penalty():
    env = make_env(EnvSpec("dungeon_quest", "continuous", 7.0, 7.0, seed=0))
    env.reset()
    for _ in range(30):
        env.step(np.array([-0.5, 0.0]))
    assert env.pos[0] == 0.0
    _, r, _ = env.step(np.array([-0.5, 0.0]))
    assert env.info["boundary"]
    assert r == pytest.approx(-0.2)


def test_continuous_actions_are_clipped():
    env = make_env(EnvSpec("dungeon_quest", "continuous", 7.0, 7.0, seed=0))
    env.reset()
    x0 = env.pos
    env.step(np.array([5.0, 0.0]))
    assert env.pos[0] - x0[0] == pytest.approx(min(0.5, 7.0 - x0[0]))


def test_snapshot_restore_round_trip():
    env = make_env(EnvSpec("diamond_mine", seed=2))
    rng = np.random.default_rng(0)
    for _ in range(20):
        env.step(random_policy(env, rng))
    snap = env.snapshot()
    a = [int(x) for x in rng.integers(4, size=15)]
    outs = []
    for _ in range(2):
        env.restore(snap)
        outs.append([env.step(x)[1:] for x in a])
    assert outs[0] == outs[1]


def test_reset_applies_start_label():
    env = make_env(EnvSpec("blind_craftsman"))
    _, lab, omega = env.reset()
    assert lab == 0
    assert omega == env.dfa.step(env.dfa.initial, 0)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("geometry", ["grid", "continuous"])
def test_features_shape_and_range(kind, geometry):
    env = make_env(EnvSpec(kind, geometry, 7, 7, seed=1))
    rng = np.random.default_rng(1)
    for _ in range(50):
        f = env.features()
        assert f.shape == (env.feature_dim,)
        assert np.all((f >= 0) & (f <= 1))
        _, _, done = env.step(random_policy(env, rng))
        if done:
            env.reset()


# -- task rules ------------------------------------------------------------------


def _layout_env(kind, objects, start=(0, 0), size=7, max_steps=200):
    from autodistill.envs import Env, Layout

    spec = EnvSpec(kind, width=size, height=size, max_steps=max_steps)
    return Env(spec, Layout(start, tuple(objects)))


def test_dungeon_quest_scripted_completion():
    objs = [("key", (1, 0)), ("chest", (2, 0)), ("shield", (3, 0)), ("dragon", (4, 0))]
    env = _layout_env("dungeon_quest", objs)
    env.reset()
    total = drive(env, route((0, 0), (4, 0)))
    assert env.accepted and env.done
    assert total == pytest.approx(4 * STEP_PENALTY + 3 + COMPLETION_REWARD)


def test_dungeon_quest_sword_needs_key():
    objs = [("chest", (1, 0)), ("key", (2, 0)), ("shield", (3, 0)), ("dragon", (4, 0))]
    env = _layout_env("dungeon_quest", objs)
    env.reset()
    drive(env, route((0, 0), (4, 0)))
    assert not env.accepted
    drive(env, route((4, 0), (1, 0)))  # back to the chest with the key
    drive(env, route((1, 0), (4, 0)))
    assert env.accepted


def test_dragon_without_shield_does_not_complete():
    objs = [("key", (1, 0)), ("chest", (2, 0)), ("dragon", (3, 0)), ("shield", (6, 6))]
    env = _layout_env("dungeon_quest", objs)
    env.reset()
    drive(env, route((0, 0), (3, 0)))
    assert not env.accepted and env.inv[3] == 0


def test_blind_craftsman_cycle():
    objs = [("wood", (1, 0)), ("factory", (2, 0)), ("home", (6, 6))]
    env = _layout_env("blind_craftsman", objs)
    env.reset()
    for _ in range(4):
        drive(env, [(1, 0), (2, 0), (1, 0), (0, 0)])
        assert env.inv[0] <= WOOD_CAP
    assert env.inv[1] == TOOLS_GOAL
    drive(env, route((0, 0), (6, 6)))
    assert env.accepted


def test_blind_craftsman_home_with_pending_wood_does_not_complete():
    objs = [("wood", (1, 0)), ("factory", (2, 0)), ("home", (3, 0))]
    env = _layout_env("blind_craftsman", objs)
    env.reset()
    for _ in range(3):
        drive(env, [(1, 0), (2, 0), (1, 0), (0, 0)])
    drive(env, [(1, 0), (2, 0), (3, 0)])  # wood, factory (goal met), home
    assert env.accepted
    env.reset()
    for _ in range(3):
        drive(env, [(1, 0), (2, 0), (1, 0), (0, 0)])
    drive(env, [(1, 0)])  # extra wood, not converted
    env.inv[0] = 1  # carrying
    # going home through the factory converts nothing more but clears the obligation
    drive(env, [(2, 0), (3, 0)])
    assert env.accepted


def test_blind_craftsman_wood_cap():
    objs = [("wood", (1, 0)), ("wood", (2, 0)), ("wood", (3, 0)), ("factory", (6, 6)),
            ("home", (6, 5))]
    env = _layout_env("blind_craftsman", objs)
    env.reset()
    total = drive(env, route((0, 0), (3, 0)))
    assert env.inv[0] == WOOD_CAP
    assert total == pytest.approx(3 * STEP_PENALTY + WOOD_CAP)


def test_diamond_mine_gold_route():
    objs = [("gold", (1, 0)), ("home", (2, 0)), ("wood", (6, 6)), ("diamond", (6, 5)),
            ("iron", (6, 4))]
    env = _layout_env("diamond_mine", objs, max_steps=500)
    env.reset()
    for i in range(10):
        drive(env, [(1, 0), (0, 0)])
        assert env.inv[2] == i + 1
    drive(env, [(1, 0), (2, 0)])
    assert env.accepted


def test_diamond_mine_home_needs_prize():
    objs = [("home", (1, 0)), ("gold", (6, 6)), ("wood", (6, 5)), ("diamond", (6, 4)),
            ("iron", (6, 3))]
    env = _layout_env("diamond_mine", objs)
    env.reset()
    drive(env, [(1, 0)])
    assert not env.accepted and env.last_label == 0


def test_diamond_mine_pickaxe_route():
    objs = [("wood", (1, 0)), ("iron", (2, 0)), ("diamond", (3, 0)), ("home", (4, 0)),
            ("gold", (6, 6))]
    env = _layout_env("diamond_mine", objs, max_steps=500)
    env.reset()
    drive(env, [(1, 0), (2, 0)])
    for _ in range(29):
        drive(env, [(1, 0), (2, 0)])
    assert env.inv[1] == 30 and env.inv[4] == 1
    drive(env, [(3, 0), (4, 0)])
    assert env.inv[3] == 1 and env.accepted


def test_diamond_mine_gold_blocks_diamond():
    objs = [("gold", (1, 0)), ("diamond", (2, 0)), ("home", (6, 6)), ("wood", (6, 5)),
            ("iron", (6, 4))]
    env = _layout_env("diamond_mine", objs)
    env.reset()
    env.inv[4] = 1  # pretend the pickaxe is crafted
    drive(env, [(1, 0), (2, 0)])
    assert env.inv[2] == 1 and env.inv[3] == 0


# -- audits ---------------------------------------------------------------------


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("geometry", ["grid", "continuous"])
def test_reward_reconstruction_random_episodes(kind, geometry):
    env = make_env(EnvSpec(kind, geometry, 7, 7, seed=4))
    rng = np.random.default_rng(4)
    for _ in range(20):
        trace = run_episode(env, random_policy, rng)
        assert reconstruct_rewards(trace, env) == [r.reward for r in trace[1:]]
        labels = [r.label for r in trace]
        assert env.accepted == accepts(env.dfa, labels)


def test_trace_round_trip(tmp_path):
    env = make_env(EnvSpec("dungeon_quest", "continuous", 7, 7))
    trace = run_episode(env, random_policy, np.random.default_rng(0))
    dump_trace(trace, tmp_path / "t.jsonl")
    assert load_trace(tmp_path / "t.jsonl") == trace


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(KINDS))
def test_invariants_under_random_play(seed, kind):
    env = make_env(EnvSpec(kind, seed=seed % 7))
    rng = np.random.default_rng(seed)
    done = env.done
    while not done:
        _, _, done = env.step(random_policy(env, rng))
        if kind == "blind_craftsman":
            assert 0 <= env.inv[0] <= WOOD_CAP
        if kind == "diamond_mine":
            assert not (env.inv[2] and env.inv[3])


# -- objectives and corridor -----------------------------------------------------


@pytest.mark.parametrize("kind", KINDS)
def test_reference_automaton_sizes(kind):
    st_ = objective_dfa(kind, restrict=False).stats()
    assert (st_["states_without_sink"], st_["transitions_guarded_edges_without_sink"]) == REFERENCE_SIZES[kind]


def test_corridor_branch_lengths():
    env = TwoTraceCorridor(len_a=30, len_c=6)
    env.reset()
    steps = 0
    while not env.done:
        env.step(0)
        steps += 1
    assert env.accepted and steps == 30
    env.reset()
    env.step(1)
    steps = 1
    while not env.done:
        env.step(0)
        steps += 1
    assert env.accepted and steps == 6


def test_corridor_rejects_short_branches():
    with pytest.raises(ValueError):
        TwoTraceCorridor(len_a=1)
