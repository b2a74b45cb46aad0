"""Formula progression over finite traces.

A *residual* ``r`` describes what the rest of the trace ``u`` must satisfy:
when ``u`` is nonempty, ``r`` is read at ``u[0]``; when ``u`` is empty its
value is :func:`holds_on_empty`.  Strong next is encoded as ``f & !$end`` so
that its obligation fails if the trace stops, which also makes progression
commute with negation.

Residuals are kept in a canonical DNF over literals (temporal subformulas,
propositions left by ``X``, and the ``$end`` marker).  Literals come from the
finite closure of the input, so only finitely many residuals exist.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Collection, Iterator, Sequence

from . import formula as fm
from .labels import Cube

Literal = tuple[fm.Formula, bool]
Dnf = frozenset  # frozenset[frozenset[Literal]]


@lru_cache(maxsize=None)
def _prog(f: fm.Formula) -> fm.Formula:
    """Symbolic progression: propositions of the consumed label become ``Now``."""
    if isinstance(f, (fm.TrueF, fm.FalseF)):
        return f
    if isinstance(f, fm.Ended):
        return fm.FALSE
    if isinstance(f, fm.Prop):
        return fm.Now(f.name)
    if isinstance(f, fm.Not):
        return fm.Not(_prog(f.arg))
    if isinstance(f, (fm.And, fm.Or)):
        return type(f)(tuple(_prog(a) for a in f.args))
    if isinstance(f, fm.Next):
        return fm.And((f.arg, fm.Not(fm.END)))
    if isinstance(f, fm.Eventually):
        return fm.Or((_prog(f.arg), f))
    if isinstance(f, fm.Always):
        return fm.And((_prog(f.arg), f))
    if isinstance(f, fm.Until):
        return fm.Or((_prog(f.right), fm.And((_prog(f.left), f))))
    if isinstance(f, fm.Release):
        return fm.And((_prog(f.right), fm.Or((_prog(f.left), f))))
    raise TypeError(f"cannot progress {f!r}")


def _subst(f: fm.Formula, values: dict[str, bool]) -> fm.Formula:
    """Replace ``Now`` atoms found in ``values`` by constants."""
    if isinstance(f, fm.Now):
        if f.name in values:
            return fm.TRUE if values[f.name] else fm.FALSE
        return f
    if isinstance(f, fm.Not):
        return fm.Not(_subst(f.arg, values))
    if isinstance(f, (fm.And, fm.Or)):
        return type(f)(tuple(_subst(a, values) for a in f.args))
    return f


def _now_names(f: fm.Formula, out: set[str]) -> set[str]:
    if isinstance(f, fm.Now):
        out.add(f.name)
    elif isinstance(f, (fm.Not, fm.And, fm.Or)):
        for c in f.children():
            _now_names(c, out)
    return out


def holds_on_empty(f: fm.Formula) -> bool:
    """Value of a residual on the empty remainder (acceptance test)."""
    if isinstance(f, (fm.TrueF, fm.Ended, fm.Always, fm.Release)):
        return True
    if isinstance(f, fm.Not):
        return not holds_on_empty(f.arg)
    if isinstance(f, fm.And):
        return all(holds_on_empty(a) for a in f.args)
    if isinstance(f, fm.Or):
        return any(holds_on_empty(a) for a in f.args)
    # false, propositions, X, F, U all need at least one more position
    return False


# -- canonical DNF ---------------------------------------------------------

def _absorb(cubes: set[frozenset]) -> frozenset:
    kept: list[frozenset] = []
    for c in sorted(cubes, key=len):
        if not any(k <= c for k in kept):
            kept.append(c)
    return frozenset(kept)


def _consistent(cube: frozenset) -> bool:
    return not any((t, not p) in cube for t, p in cube)


def _dnf(f: fm.Formula, pos: bool = True) -> Dnf:
    if isinstance(f, fm.TrueF):
        return frozenset([frozenset()]) if pos else frozenset()
    if isinstance(f, fm.FalseF):
        return frozenset() if pos else frozenset([frozenset()])
    if isinstance(f, fm.Not):
        return _dnf(f.arg, not pos)
    if isinstance(f, (fm.And, fm.Or)):
        product = isinstance(f, fm.And) == pos
        parts = [_dnf(a, pos) for a in f.args]
        if not product:
            return _absorb(set().union(*parts))
        acc: set[frozenset] = {frozenset()}
        for part in parts:
            acc = {a | b for a in acc for b in part}
            acc = {c for c in acc if _consistent(c)}
            acc = set(_absorb(acc))
            if not acc:
                break
        return frozenset(acc)
    if isinstance(f, fm.Now):
        raise ValueError("unresolved current-label proposition")
    return frozenset([frozenset([(f, pos)])])


def _lit_key(lit: Literal):
    return (fm.sort_key(lit[0]), lit[1])


def _dnf_to_formula(d: Dnf) -> fm.Formula:
    cubes = []
    for cube in d:
        lits = [t if p else fm.Not(t) for t, p in sorted(cube, key=_lit_key)]
        cubes.append(fm.conj(lits))
    cubes.sort(key=fm.sort_key)
    return fm.disj(cubes)


def canonical(f: fm.Formula) -> fm.Formula:
    """Canonical DNF form of a residual without ``Now`` atoms."""
    return _dnf_to_formula(_dnf(f))


# -- public operations -----------------------------------------------------

def progress(f: fm.Formula, sigma: Collection[str]) -> fm.Formula:
    """Residual of ``f`` after consuming the label ``sigma`` (a set of names)."""
    g = _prog(f)
    names = _now_names(g, set())
    g = fm.simplify(_subst(g, {n: n in sigma for n in names}))
    return canonical(g)


def successors(f: fm.Formula, ap: Sequence[str]) -> Iterator[tuple[Cube, fm.Formula]]:
    """Split the progression of ``f`` into disjoint label cubes.

    Yields ``(cube, residual)`` pairs whose cubes partition ``2^ap``;
    propositions are branched on in ``ap`` order and only while the partial
    result still depends on them.
    """
    index = {n: i for i, n in enumerate(ap)}
    start = fm.simplify(_prog(f))
    unknown = _now_names(start, set()) - set(index)
    if unknown:
        raise fm.UnknownPropositionError(sorted(unknown)[0])

    def branch(g: fm.Formula, mask: int, value: int):
        names = _now_names(g, set())
        if not names:
            yield (mask, value), canonical(g)
            return
        name = min(names, key=index.__getitem__)
        bit = 1 << index[name]
        for val in (False, True):
            h = fm.simplify(_subst(g, {name: val}))
            yield from branch(h, mask | bit, value | (bit if val else 0))

    yield from branch(start, 0, 0)
