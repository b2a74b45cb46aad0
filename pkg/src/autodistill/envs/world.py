"""Grid and continuous worlds with automaton tracking.

An :class:`Env` owns a fixed layout (drawn from ``spec.seed``), the agent's
position and inventory, and the objective automaton state.  ``reset``
starts a new episode on the same layout; ``reset(relayout_seed=...)`` draws
a new one.

Feature vectors (``Env.features``) are, in order: agent position divided by
the arena size, inventory counters divided by their natural scale (clipped
to 1), and every object's position divided by the arena size.  Layouts are
fixed within a trial, so the object block is constant but keeps the encoding
meaningful across layouts.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .objectives import objective, objective_dfa
from .rules import rules_for
from .spec import EnvSpec

MOVES = ((0, 1), (1, 0), (0, -1), (-1, 0))  # N, E, S, W
STEP_PENALTY = -0.1
BOUNDARY_PENALTY = -0.1
ITEM_REWARD = 1.0
COMPLETION_REWARD = 100.0
REACH = 0.4  # cm, continuous pickup distance
ACTION_CAP = 0.5  # cm per axis per step
MIN_SEPARATION = 1.0  # cm between objects (and the agent start)
MAX_LAYOUT_TRIES = 200


class LayoutError(RuntimeError):
    """Raised when no layout satisfying the placement rules can be drawn."""


class EpisodeDoneError(RuntimeError):
    pass


@dataclass(frozen=True)
class EnvState:
    pos: tuple
    inventory: tuple[int, ...]
    step: int
    omega: int


@dataclass(frozen=True)
class Layout:
    start: tuple
    objects: tuple[tuple[str, tuple], ...]
    obstacles: frozenset = frozenset()


def _grid_layout(spec: EnvSpec, names: list[str], rng: np.random.Generator) -> Layout:
    w, h = int(spec.width), int(spec.height)
    n = len(names) + 1
    if n > w * h:
        raise LayoutError(f"{n} objects do not fit on a {w}x{h} grid")
    for _ in range(MAX_LAYOUT_TRIES):
        idx = rng.choice(w * h, size=n, replace=False)
        cells = [(int(i % w), int(i // w)) for i in idx]
        start, placed = cells[0], cells[1:]
        blocked: frozenset = frozenset()
        if spec.obstacles:
            free = sorted(set((x, y) for x in range(w) for y in range(h)) - set(cells))
            k = int(round(spec.obstacle_density * len(free)))
            if k:
                pick = rng.choice(len(free), size=k, replace=False)
                blocked = frozenset(free[i] for i in pick)
            if not _connected(start, placed, blocked, w, h):
                continue
        return Layout(start, tuple(zip(names, placed)), blocked)
    raise LayoutError(f"no connected layout after {MAX_LAYOUT_TRIES} tries")


def _connected(start, targets, blocked, w, h) -> bool:
    seen, todo = {start}, deque([start])
    while todo:
        x, y = todo.popleft()
        for dx, dy in MOVES:
            c = (x + dx, y + dy)
            if 0 <= c[0] < w and 0 <= c[1] < h and c not in blocked and c not in seen:
                seen.add(c)
                todo.append(c)
    return all(t in seen for t in targets)


def _continuous_layout(spec: EnvSpec, names: list[str], rng: np.random.Generator) -> Layout:
    pts: list[tuple[float, float]] = []
    budget = MAX_LAYOUT_TRIES * (len(names) + 1)
    while len(pts) < len(names) + 1:
        budget -= 1
        if budget < 0:
            raise LayoutError("could not separate objects in the arena")
        p = (float(rng.uniform(0, spec.width)), float(rng.uniform(0, spec.height)))
        if all((p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2 >= MIN_SEPARATION**2 for q in pts):
            pts.append(p)
    return Layout(pts[0], tuple(zip(names, pts[1:])))


def make_layout(spec: EnvSpec, seed: int | None = None) -> Layout:
    rules = rules_for(spec.kind)
    area = spec.width * spec.height
    names = rules.objects(area)
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    if spec.geometry == "grid":
        return _grid_layout(spec, names, rng)
    return _continuous_layout(spec, names, rng)


class Env:
    """One task instance.  Not thread-safe; one owner per trial."""

    def __init__(self, spec: EnvSpec, layout: Layout | None = None):
        self.spec = spec
        self.rules = rules_for(spec.kind)
        self.objective = objective(spec.kind)
        self.ap = self.objective.ap
        self.dfa = objective_dfa(spec.kind)
        self._delta = self.dfa.table()
        self.continuous = spec.geometry == "continuous"
        self.max_steps = spec.steps_cap
        self.layout = layout or make_layout(spec)
        self._index_layout()
        self.done = True
        self.reset()

    # -- layout ------------------------------------------------------------------

    def _index_layout(self):
        self.objects = list(self.layout.objects)
        self._at = {pos: name for name, pos in self.objects}
        self._obj_xy = np.array([p for _, p in self.objects], dtype=float).reshape(-1, 2)
        self._obj_names = [n for n, _ in self.objects]
        scale = (self.spec.width, self.spec.height) if self.continuous else (
            max(self.spec.width - 1, 1), max(self.spec.height - 1, 1))
        self._scale = np.array(scale, dtype=float)
        self._obj_features = (self._obj_xy / self._scale).ravel()

    @property
    def n_actions(self) -> int:
        return 4

    @property
    def action_dim(self) -> int:
        return 2

    @property
    def feature_dim(self) -> int:
        return 2 + len(self.rules.slots) + self._obj_features.size

    # -- episode protocol ----------------------------------------------------------

    def reset(self, relayout_seed: int | None = None) -> tuple[EnvState, int, int]:
        """Start an episode.  The label of the start state is applied to the
        automaton, so the returned omega is delta(omega0, L(s0))."""
        if relayout_seed is not None:
            self.layout = make_layout(self.spec, relayout_seed)
            self._index_layout()
        self.pos = tuple(self.layout.start)
        self.inv = self.rules.fresh()
        self.t = 0
        self.done = False
        self.accepted = False
        # the start cell never holds an object, so only level propositions apply
        bits = self.rules.level(self.inv)
        self.last_label = bits
        self.omega = self.dfa.step(self.dfa.initial, bits)
        self.accepted = self.omega in self.dfa.accepting
        self.done = self.accepted
        self.info = {"label": bits, "omega": self.omega, "items": 0, "boundary": False,
                     "accepted": self.accepted, "truncated": False}
        return self.state(), bits, self.omega

    def state(self) -> EnvState:
        return EnvState(self.pos, tuple(self.inv), self.t, self.omega)

    def key(self) -> tuple:
        """Hashable environment state (position and inventory), without omega."""
        return (self.pos, tuple(self.inv))

    def snapshot(self) -> tuple:
        """Markov state of the product: (position, inventory, omega)."""
        return (self.pos, tuple(self.inv), self.omega)

    def restore(self, snap: tuple) -> None:
        """Put the environment in ``snap`` at step 0 of a live episode."""
        self.pos, inv, self.omega = snap
        self.inv = list(inv)
        self.t = 0
        self.accepted = self.omega in self.dfa.accepting
        self.done = self.accepted

    def label(self, state: EnvState | None = None) -> int:
        """Label of the most recent step (``state`` must be the current state)."""
        if state is not None and state != self.state():
            raise ValueError("labels are only available for the current state")
        return self.last_label

    def step(self, action) -> tuple[EnvState, float, bool]:
        if self.done:
            raise EpisodeDoneError("episode is over; call reset()")
        if self.continuous:
            arrived, boundary = self._move_continuous(action)
        else:
            arrived, boundary = self._move_grid(int(action)), False
        bits, items = 0, 0
        for name in arrived:
            b, k = self.rules.arrive(name, self.inv)
            bits |= b
            items += k
        bits |= self.rules.level(self.inv)
        self.t += 1
        prev = self.omega
        nxt = self._delta[prev].get(bits)
        # infeasible labels indicate a rules bug; dfa.step raises a precise error
        self.omega = self.dfa.step(prev, bits) if nxt is None else nxt
        self.last_label = bits
        reward = STEP_PENALTY + ITEM_REWARD * items
        if boundary:
            reward += BOUNDARY_PENALTY
        self.accepted = self.omega in self.dfa.accepting
        if self.accepted and prev not in self.dfa.accepting:
            reward += COMPLETION_REWARD
        truncated = not self.accepted and self.t >= self.max_steps
        self.done = self.accepted or truncated
        self.info = {"label": bits, "omega": self.omega, "items": items, "boundary": boundary,
                     "accepted": self.accepted, "truncated": truncated}
        return self.state(), reward, self.done

    def _move_grid(self, a: int) -> list[str]:
        dx, dy = MOVES[a]
        x, y = self.pos[0] + dx, self.pos[1] + dy
        if not (0 <= x < self.spec.width and 0 <= y < self.spec.height):
            return []
        if (x, y) in self.layout.obstacles:
            return []
        self.pos = (x, y)
        name = self._at.get(self.pos)
        return [name] if name is not None else []

    def _move_continuous(self, action) -> tuple[list[str], bool]:
        a = np.clip(np.asarray(action, dtype=float).reshape(2), -ACTION_CAP, ACTION_CAP)
        old = np.array(self.pos)
        new = old + a
        lim = np.array([self.spec.width, self.spec.height])
        clamped = np.clip(new, 0.0, lim)
        boundary = bool(np.any(clamped != new))
        self.pos = (float(clamped[0]), float(clamped[1]))
        if not len(self._obj_names):
            return [], boundary
        before = np.hypot(*(self._obj_xy - old).T) < REACH
        after = np.hypot(*(self._obj_xy - clamped).T) < REACH
        return [self._obj_names[i] for i in np.flatnonzero(after & ~before)], boundary

    # -- encodings ---------------------------------------------------------------

    def features(self) -> np.ndarray:
        pos = np.asarray(self.pos, dtype=float) / self._scale
        inv = self.rules.features(self.inv)
        return np.concatenate([pos, inv, self._obj_features])


def make_env(spec: EnvSpec) -> Env:
    return Env(spec)
