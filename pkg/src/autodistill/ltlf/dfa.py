"""Deterministic finite automata over ``2^AP`` with cube-guarded edges."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Collection, Iterable, Sequence

from . import formula as fm
from .labels import (
    AtomicPropositionSet,
    Cube,
    TOP,
    cube_contains,
    cube_intersect,
    cube_matches,
    format_guard,
)
from .progression import holds_on_empty, successors

DEFAULT_MAX_STATES = 10_000
EXPLICIT_LABEL_LIMIT = 16


class StateExplosionError(RuntimeError):
    pass


class InfeasibleLabelError(ValueError):
    """A label outside the automaton's feasible set was fed to it."""

    def __init__(self, state: int, label: int, ap: AtomicPropositionSet):
        super().__init__(
            f"label {ap.format_label(label)} is not feasible (state {state}); "
            "labeling function and automaton disagree"
        )
        self.state = state
        self.label = label


@dataclass(frozen=True)
class Edge:
    guard: tuple[Cube, ...]
    target: int

    def matches(self, label: int) -> bool:
        return any(cube_matches(c, label) for c in self.guard)


@dataclass(frozen=True)
class Dfa:
    """Immutable DFA.  States are ``0..n_states-1``; edges are per state.

    ``feasible`` optionally restricts the alphabet to the labels an
    environment can actually emit; guards are only meaningful on it.
    ``names`` carries a printable description of each state (its residual
    formula when built by :func:`compile_formula`).
    """

    ap: AtomicPropositionSet
    n_states: int
    initial: int
    accepting: frozenset[int]
    edges: tuple[tuple[Edge, ...], ...]
    feasible: frozenset[int] | None = None
    names: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not isinstance(self.ap, AtomicPropositionSet):
            object.__setattr__(self, "ap", AtomicPropositionSet(self.ap))

    @property
    def states(self) -> range:
        return range(self.n_states)

    def is_feasible(self, label: int) -> bool:
        return self.feasible is None or label in self.feasible

    def step(self, state: int, label: "int | Iterable[str]") -> int:
        lab = self.ap.encode(label)
        if not self.is_feasible(lab):
            raise InfeasibleLabelError(state, lab, self.ap)
        for e in self.edges[state]:
            if e.matches(lab):
                return e.target
        raise InfeasibleLabelError(state, lab, self.ap)

    def alphabet(self) -> list[int]:
        """Explicit label list (feasible set, or all of ``2^AP``)."""
        if self.feasible is not None:
            return sorted(self.feasible)
        if len(self.ap) > EXPLICIT_LABEL_LIMIT:
            raise ValueError(
                f"{len(self.ap)} propositions: explicit alphabet too large, "
                "supply a feasible label set"
            )
        return list(self.ap.all_labels())

    def table(self) -> list[dict[int, int]]:
        """Explicit transition table over :meth:`alphabet`."""
        labels = self.alphabet()
        return [{l: self.step(q, l) for l in labels} for q in self.states]

    def is_sink(self, state: int) -> bool:
        return state not in self.accepting and all(
            e.target == state for e in self.edges[state]
        )

    def dead_states(self) -> set[int]:
        """Non-accepting states from which no accepting state is reachable."""
        rev: dict[int, set[int]] = {q: set() for q in self.states}
        for q in self.states:
            for e in self.edges[q]:
                rev[e.target].add(q)
        live = set(self.accepting)
        todo = deque(live)
        while todo:
            q = todo.popleft()
            for p in rev[q]:
                if p not in live:
                    live.add(p)
                    todo.append(p)
        return set(self.states) - live

    def guard_text(self, state: int, target: int) -> str:
        for e in self.edges[state]:
            if e.target == target:
                return format_guard(self.ap, e.guard)
        return "false"

    def stats(self) -> dict:
        """State and transition counts under the usual counting conventions."""
        n_edges = sum(len(es) for es in self.edges)
        loops = sum(1 for q in self.states for e in self.edges[q] if e.target == q)
        dead = self.dead_states()
        live_edges = sum(
            1 for q in self.states if q not in dead
            for e in self.edges[q] if e.target not in dead
        )
        try:
            n_labels = len(self.alphabet())
        except ValueError:
            n_labels = None
        return {
            "states": self.n_states,
            "states_without_sink": self.n_states - len(dead),
            "accepting_states": len(self.accepting),
            "transitions_guarded_edges": n_edges,
            "transitions_guarded_edges_without_self_loops": n_edges - loops,
            "transitions_guarded_edges_without_sink": live_edges,
            "transitions_label_pairs": None if n_labels is None else n_labels * self.n_states,
            "guard_cubes": sum(len(e.guard) for es in self.edges for e in es),
            "alphabet_size": n_labels,
        }


def accepts(d: Dfa, trace: Sequence["int | Iterable[str]"]) -> bool:
    """Run ``d`` over ``trace``; the empty trace is accepted iff the initial
    state is accepting."""
    q = d.initial
    for label in trace:
        q = d.step(q, label)
    return q in d.accepting


# -- construction ----------------------------------------------------------

def _normalise_feasible(ap: AtomicPropositionSet, feasible) -> frozenset[int] | None:
    if feasible is None:
        return None
    return frozenset(ap.encode(l) for l in feasible)


def compile_formula(
    f: fm.Formula,
    ap: Sequence[str],
    feasible: Collection | None = None,
    *,
    minimize: bool = True,
    max_states: int = DEFAULT_MAX_STATES,
) -> Dfa:
    """Build a DFA for ``f`` by exploring progression residuals.

    ``feasible`` (labels as ints or name sets) restricts the alphabet.
    Raises :class:`StateExplosionError` past ``max_states`` residuals.
    """
    ap = AtomicPropositionSet(ap)
    fm.check_props(f, ap)
    feas = _normalise_feasible(ap, feasible)
    start = fm.simplify(f)
    index = {start: 0}
    order = [start]
    rows: list[list[tuple[Cube, int]]] = []
    i = 0
    while i < len(order):
        r = order[i]
        row = []
        for cube, nxt in successors(r, ap):
            if feas is not None and not any(cube_matches(cube, l) for l in feas):
                continue
            if nxt not in index:
                if len(order) >= max_states:
                    raise StateExplosionError(
                        f"more than {max_states} progression states; raise the cap "
                        "or restrict the feasible labels"
                    )
                index[nxt] = len(order)
                order.append(nxt)
            row.append((cube, index[nxt]))
        rows.append(row)
        i += 1
    edges = tuple(
        tuple(Edge((c,), t) for c, t in row) for row in rows
    )
    d = Dfa(
        ap=ap,
        n_states=len(order),
        initial=0,
        accepting=frozenset(k for k, r in enumerate(order) if holds_on_empty(r)),
        edges=edges,
        feasible=feas,
        names=tuple(str(r) for r in order),
    )
    return minimize_dfa(d) if minimize else d


# -- minimisation ----------------------------------------------------------

def _letter_classes(d: Dfa) -> list[Cube]:
    """Disjoint cubes refining every state's guard partition.

    With a feasible set each feasible label is its own class.
    """
    full = (1 << len(d.ap)) - 1
    if d.feasible is not None:
        return [(full, l) for l in sorted(d.feasible)]
    classes: list[Cube] = [TOP]
    for q in d.states:
        cubes = [c for e in d.edges[q] for c in e.guard]
        refined = []
        for a in classes:
            for b in cubes:
                c = cube_intersect(a, b)
                if c is not None:
                    refined.append(c)
        classes = refined
    return sorted(set(classes))


def _class_target(d: Dfa, q: int, cls: Cube) -> int:
    for e in d.edges[q]:
        for c in e.guard:
            if cube_contains(c, cls):
                return e.target
    raise ValueError(f"state {q} has no edge covering class {cls}")


def _hopcroft(n: int, n_letters: int, delta: list[list[int]], accepting: set[int]) -> list[int]:
    """Return the block id of every state in the coarsest stable partition."""
    inverse = [[[] for _ in range(n)] for _ in range(n_letters)]
    for q in range(n):
        for a in range(n_letters):
            inverse[a][delta[q][a]].append(q)
    blocks = [b for b in (set(accepting), set(range(n)) - set(accepting)) if b]
    block_of = [0] * n
    for i, b in enumerate(blocks):
        for q in b:
            block_of[q] = i
    work = deque()
    if len(blocks) == 2:
        work.append(0 if len(blocks[0]) <= len(blocks[1]) else 1)
    elif blocks:
        work.append(0)
    queued = set(work)
    while work:
        idx = work.popleft()
        queued.discard(idx)
        splitter = set(blocks[idx])
        for a in range(n_letters):
            pre = set()
            for q in splitter:
                pre.update(inverse[a][q])
            touched: dict[int, set[int]] = {}
            for q in pre:
                touched.setdefault(block_of[q], set()).add(q)
            for bi, inside in touched.items():
                block = blocks[bi]
                if len(inside) == len(block):
                    continue
                outside = block - inside
                blocks[bi] = inside
                blocks.append(outside)
                new = len(blocks) - 1
                for q in outside:
                    block_of[q] = new
                if bi in queued:
                    queued.add(new)
                    work.append(new)
                else:
                    pick = bi if len(inside) <= len(outside) else new
                    queued.add(pick)
                    work.append(pick)
    return block_of


def _reachable(initial: int, delta: list[list[int]]) -> list[int]:
    seen = {initial}
    order = [initial]
    i = 0
    while i < len(order):
        for t in delta[order[i]]:
            if t not in seen:
                seen.add(t)
                order.append(t)
        i += 1
    return order


def _expand(cube: Cube, off: list[Cube], width: int) -> Cube:
    mask, value = cube
    for i in range(width):
        bit = 1 << i
        if not mask & bit:
            continue
        cand = (mask & ~bit, value & ~bit)
        if all(cube_intersect(cand, o) is None for o in off):
            mask, value = cand
    return mask, value


def synthesize_guard(on: list[Cube], off: list[Cube], width: int) -> tuple[Cube, ...]:
    """Irredundant cover of the ``on`` classes by prime cubes avoiding ``off``.

    Each on-class is expanded literal by literal (in proposition order) while
    the cube stays disjoint from every off-class; a greedy pass then keeps
    only cubes that cover a class not covered yet, largest cubes first.
    """
    expanded: list[Cube] = []
    for c in sorted(on, key=lambda c: (bin(c[0]).count("1"), c)):
        if not any(cube_contains(e, c) for e in expanded):
            expanded.append(_expand(c, off, width))
    ranked = sorted(set(expanded), key=lambda c: (bin(c[0]).count("1"), c))
    uncovered = set(on)
    kept = []
    for c in ranked:
        hit = {k for k in uncovered if cube_contains(c, k)}
        if hit:
            kept.append(c)
            uncovered -= hit
    # drop cubes made redundant by later picks
    for c in list(kept):
        rest = [k for k in kept if k != c]
        if all(any(cube_contains(k, x) for k in rest) for x in on if cube_contains(c, x)):
            kept.remove(c)
    return tuple(sorted(kept))


def minimize_dfa(d: Dfa) -> Dfa:
    """Drop unreachable states, merge equivalent ones (Hopcroft) and
    re-synthesize one guard per (state, target) pair."""
    classes = _letter_classes(d)
    delta = [[_class_target(d, q, c) for c in classes] for q in d.states]
    reach = _reachable(d.initial, delta)
    remap = {q: i for i, q in enumerate(reach)}
    delta = [[remap[t] for t in delta[q]] for q in reach]
    acc = {remap[q] for q in d.accepting if q in remap}
    block_of = _hopcroft(len(reach), len(classes), delta, acc)

    # renumber blocks in breadth-first order from the initial state
    order: list[int] = []
    seen: dict[int, int] = {}
    rep: dict[int, int] = {}
    for q in range(len(reach)):
        rep.setdefault(block_of[q], q)
    todo = deque([block_of[0]])
    seen[block_of[0]] = 0
    while todo:
        b = todo.popleft()
        order.append(b)
        for t in delta[rep[b]]:
            tb = block_of[t]
            if tb not in seen:
                seen[tb] = len(seen)
                todo.append(tb)

    width = len(d.ap)
    edges = []
    for b in order:
        q = rep[b]
        by_target: dict[int, list[Cube]] = {}
        for ci, t in enumerate(delta[q]):
            by_target.setdefault(seen[block_of[t]], []).append(classes[ci])
        row = []
        for tgt in sorted(by_target):
            off = [c for t2, cs in by_target.items() if t2 != tgt for c in cs]
            row.append(Edge(synthesize_guard(by_target[tgt], off, width), tgt))
        edges.append(tuple(row))
    names = ()
    if d.names:
        names = tuple(d.names[reach[rep[b]]] for b in order)
    return Dfa(
        ap=d.ap,
        n_states=len(order),
        initial=0,
        accepting=frozenset(seen[block_of[q]] for q in acc),
        edges=tuple(edges),
        feasible=d.feasible,
        names=names,
    )


# -- rendering -------------------------------------------------------------

def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def to_dot(d: Dfa, name: str = "dfa", edge_attrs: dict | None = None) -> str:
    """DOT rendering with stable state numbering.

    Accepting states are double circles; dead sinks are drawn dashed and
    grey.  ``edge_attrs`` maps ``(state, target)`` to extra attribute text.
    """
    dead = d.dead_states()
    lines = [f'digraph "{_dot_escape(name)}" {{', "  rankdir=LR;", '  __start [shape=point, label=""];']
    for q in d.states:
        shape = "doublecircle" if q in d.accepting else "circle"
        extra = ', style=dashed, color=gray50, sink=true' if q in dead else ""
        lines.append(f'  q{q} [shape={shape}, label="{q}"{extra}];')
    lines.append(f"  __start -> q{d.initial};")
    for q in d.states:
        for e in d.edges[q]:
            label = _dot_escape(format_guard(d.ap, e.guard))
            extra = ""
            if edge_attrs and (q, e.target) in edge_attrs:
                extra = ", " + edge_attrs[(q, e.target)]
            lines.append(f'  q{q} -> q{e.target} [label="{label}"{extra}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
