"""Render formulas back into the textual grammar accepted by the parser."""

from __future__ import annotations

from . import formula as fm

# binding strength, higher binds tighter
_OR, _AND, _BIN, _UNARY, _ATOM = 1, 2, 3, 4, 5
_UNARY_OPS = {fm.Next: "X", fm.Eventually: "F", fm.Always: "G"}


def _level(f: fm.Formula) -> int:
    if isinstance(f, fm.Or):
        return _OR
    if isinstance(f, fm.And):
        return _AND
    if isinstance(f, (fm.Until, fm.Release)):
        return _BIN
    if isinstance(f, fm.Not):
        return _UNARY
    return _ATOM


def _wrap(f: fm.Formula, need: int) -> str:
    s = to_text(f)
    return f"({s})" if _level(f) < need else s


def to_text(f: fm.Formula) -> str:
    if isinstance(f, fm.TrueF):
        return "true"
    if isinstance(f, fm.FalseF):
        return "false"
    if isinstance(f, fm.Ended):
        return "$end"
    if isinstance(f, fm.Prop):
        return f.name
    if isinstance(f, fm.Now):
        return "@" + f.name
    if isinstance(f, fm.Not):
        return "!" + _wrap(f.arg, _UNARY)
    if type(f) in _UNARY_OPS:
        return f"{_UNARY_OPS[type(f)]}({to_text(f.arg)})"
    if isinstance(f, (fm.Until, fm.Release)):
        op = "U" if isinstance(f, fm.Until) else "R"
        # right associative: the left operand needs parens at equal level
        return f"{_wrap(f.left, _BIN + 1)} {op} {_wrap(f.right, _BIN)}"
    if isinstance(f, (fm.And, fm.Or)):
        lvl = _level(f)
        op = " & " if lvl == _AND else " | "
        first, rest = f.args[0], f.args[1:]
        # left associative: only the first operand may sit at equal level
        parts = [_wrap(first, lvl)] + [_wrap(a, lvl + 1) for a in rest]
        return op.join(parts)
    raise TypeError(f"not a formula: {f!r}")
