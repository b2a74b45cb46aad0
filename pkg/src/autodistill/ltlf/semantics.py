"""Direct recursive LTL_f evaluation on explicit traces.

Kept deliberately naive and independent of progression: it is the oracle the
automaton construction is checked against.
"""

from __future__ import annotations

from typing import Collection, Sequence

from . import formula as fm


def holds(f: fm.Formula, trace: Sequence[Collection[str]], i: int = 0) -> bool:
    """Does ``f`` hold at position ``i`` of the (nonempty) ``trace``?

    ``X`` is the strong next: it is false at the last position.
    """
    n = len(trace)
    if i >= n:
        raise IndexError("position outside trace")
    if isinstance(f, fm.TrueF):
        return True
    if isinstance(f, fm.FalseF):
        return False
    if isinstance(f, fm.Prop):
        return f.name in trace[i]
    if isinstance(f, fm.Not):
        return not holds(f.arg, trace, i)
    if isinstance(f, fm.And):
        return all(holds(a, trace, i) for a in f.args)
    if isinstance(f, fm.Or):
        return any(holds(a, trace, i) for a in f.args)
    if isinstance(f, fm.Next):
        return i + 1 < n and holds(f.arg, trace, i + 1)
    if isinstance(f, fm.Eventually):
        return any(holds(f.arg, trace, j) for j in range(i, n))
    if isinstance(f, fm.Always):
        return all(holds(f.arg, trace, j) for j in range(i, n))
    if isinstance(f, fm.Until):
        for j in range(i, n):
            if holds(f.right, trace, j):
                return True
            if not holds(f.left, trace, j):
                return False
        return False
    if isinstance(f, fm.Release):
        for j in range(i, n):
            if not holds(f.right, trace, j):
                return False
            if holds(f.left, trace, j):
                return True
        return True
    raise TypeError(f"cannot evaluate {f!r}")


def satisfies(trace: Sequence[Collection[str]], f: fm.Formula) -> bool:
    return bool(trace) and holds(f, trace, 0)
