"""Atomic propositions, labels (bitsets) and label cubes.

A label is an ``int`` whose bit ``i`` is set when proposition ``ap[i]`` holds.
A cube is a pair ``(mask, value)`` denoting every label ``l`` with
``l & mask == value``; ``(0, 0)`` is the whole alphabet.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence

Cube = tuple[int, int]
TOP: Cube = (0, 0)


class AtomicPropositionSet(tuple):
    """Ordered, duplicate-free tuple of proposition names."""

    def __new__(cls, names: Iterable[str]):
        names = tuple(names)
        seen = set()
        for n in names:
            if not isinstance(n, str) or not n:
                raise ValueError(f"bad proposition name {n!r}")
            if n in seen:
                raise ValueError(f"duplicate proposition {n!r}")
            seen.add(n)
        return super().__new__(cls, names)

    @property
    def size(self) -> int:
        return len(self)

    def bit(self, name: str) -> int:
        try:
            return 1 << self.index(name)
        except ValueError:
            raise KeyError(f"unknown proposition {name!r}") from None

    def encode(self, label: "Iterable[str] | int") -> int:
        if isinstance(label, int):
            if label < 0 or label >> len(self):
                raise ValueError(f"label {label} wider than {len(self)} bits")
            return label
        out = 0
        for n in label:
            out |= self.bit(n)
        return out

    def decode(self, label: int) -> frozenset[str]:
        return frozenset(n for i, n in enumerate(self) if label >> i & 1)

    def all_labels(self) -> range:
        return range(1 << len(self))

    def format_label(self, label: int) -> str:
        return "{" + ", ".join(n for i, n in enumerate(self) if label >> i & 1) + "}"

    def format_cube(self, cube: Cube) -> str:
        mask, value = cube
        lits = []
        for i, n in enumerate(self):
            if mask >> i & 1:
                lits.append(n if value >> i & 1 else "!" + n)
        return " & ".join(lits) if lits else "true"


def cube_matches(cube: Cube, label: int) -> bool:
    return label & cube[0] == cube[1]


def cube_intersect(a: Cube, b: Cube) -> Cube | None:
    if (a[1] ^ b[1]) & a[0] & b[0]:
        return None
    return (a[0] | b[0], a[1] | b[1])


def cube_contains(outer: Cube, inner: Cube) -> bool:
    """True when every label of ``inner`` is in ``outer``."""
    return outer[0] & ~inner[0] == 0 and inner[1] & outer[0] == outer[1]


def cube_labels(cube: Cube, width: int) -> Iterator[int]:
    mask, value = cube
    free = [i for i in range(width) if not mask >> i & 1]
    for k in range(1 << len(free)):
        lab = value
        for j, i in enumerate(free):
            if k >> j & 1:
                lab |= 1 << i
        yield lab


def format_guard(ap: Sequence[str], cubes: Sequence[Cube]) -> str:
    aps = ap if isinstance(ap, AtomicPropositionSet) else AtomicPropositionSet(ap)
    if not cubes:
        return "false"
    parts = [aps.format_cube(c) for c in cubes]
    if len(parts) == 1:
        return parts[0]
    return " | ".join(f"({p})" if " & " in p else p for p in parts)
