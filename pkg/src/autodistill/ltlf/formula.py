"""LTL_f abstract syntax.

Nodes are immutable, hashable and compare structurally, so they can be used
directly as automaton-state keys.  ``And``/``Or`` are n-ary; the parser only
ever builds binary ones, :func:`simplify` flattens them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence


class Formula:
    """Base class for formula nodes."""

    __slots__ = ()

    def children(self) -> tuple["Formula", ...]:
        return ()

    def __str__(self) -> str:
        from .printer import to_text

        return to_text(self)

    def __and__(self, other: "Formula") -> "Formula":
        return And((self, other))

    def __or__(self, other: "Formula") -> "Formula":
        return Or((self, other))

    def __invert__(self) -> "Formula":
        return Not(self)

    def walk(self) -> Iterator["Formula"]:
        yield self
        for c in self.children():
            yield from c.walk()

    def props(self) -> frozenset[str]:
        return frozenset(n.name for n in self.walk() if isinstance(n, Prop))


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class FalseF(Formula):
    pass


TRUE = TrueF()
FALSE = FalseF()


@dataclass(frozen=True)
class Ended(Formula):
    """Marker that holds exactly on the empty remainder of a trace.

    Only produced by progression; never written by users.
    """


END = Ended()


@dataclass(frozen=True)
class Prop(Formula):
    name: str


@dataclass(frozen=True)
class Now(Formula):
    """A proposition of the label currently being consumed (progression only)."""

    name: str


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))

    def children(self):
        return self.args


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))

    def children(self):
        return self.args


@dataclass(frozen=True)
class Next(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Eventually(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Always(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Release(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


TEMPORAL = (Next, Eventually, Always, Until, Release)


def sort_key(f: Formula) -> tuple[int, str]:
    return (_RANK[type(f)], str(f))


_RANK = {
    TrueF: 0, FalseF: 0, Ended: 1, Prop: 2, Now: 2, Not: 3, Next: 4,
    Eventually: 5, Always: 6, Until: 7, Release: 8, And: 9, Or: 10,
}


def implies(a: Formula, b: Formula) -> Formula:
    return Or((Not(a), b))


def simplify(f: Formula) -> Formula:
    """Boolean normalisation used for state deduplication.

    Rules: constant folding, double negation, flattening of nested
    ``And``/``Or``, idempotence, complementary literals and sorted operands.
    Temporal nodes are only simplified inside; they are never folded, since
    e.g. a pending ``G false`` still holds on the empty remainder of a trace.
    """
    if isinstance(f, Not):
        a = simplify(f.arg)
        if a == TRUE:
            return FALSE
        if a == FALSE:
            return TRUE
        if isinstance(a, Not):
            return a.arg
        return Not(a)
    if isinstance(f, (And, Or)):
        is_and = isinstance(f, And)
        unit, zero = (TRUE, FALSE) if is_and else (FALSE, TRUE)
        out: dict[Formula, None] = {}
        stack = list(f.args)
        while stack:
            a = simplify(stack.pop(0))
            if a == zero:
                return zero
            if a == unit:
                continue
            if type(a) is type(f):
                stack[:0] = list(a.args)
                continue
            out[a] = None
        for a in out:
            neg = a.arg if isinstance(a, Not) else Not(a)
            if neg in out:
                return zero
        if not out:
            return unit
        if len(out) == 1:
            return next(iter(out))
        return type(f)(tuple(sorted(out, key=sort_key)))
    if isinstance(f, (Next, Eventually, Always)):
        return type(f)(simplify(f.arg))
    if isinstance(f, (Until, Release)):
        return type(f)(simplify(f.left), simplify(f.right))
    return f


def conj(args: Iterable[Formula]) -> Formula:
    args = tuple(args)
    if not args:
        return TRUE
    return args[0] if len(args) == 1 else And(args)


def disj(args: Iterable[Formula]) -> Formula:
    args = tuple(args)
    if not args:
        return FALSE
    return args[0] if len(args) == 1 else Or(args)


def check_props(f: Formula, names: Sequence[str]) -> None:
    unknown = sorted(f.props() - set(names))
    if unknown:
        raise UnknownPropositionError(unknown[0])


class UnknownPropositionError(ValueError):
    def __init__(self, name: str):
        super().__init__(f"unknown proposition {name!r}")
        self.name = name
