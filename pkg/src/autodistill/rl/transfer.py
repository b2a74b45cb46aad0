"""Per-transition statistics, teacher tables and the annealed target blend.

A transition is a pair ``(omega, sigma)``: automaton state and the label of
the next environment state.  Labels are bitsets over the task's
propositions.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import mpmath
import numpy as np

Transition = tuple[int, int]
TABLE_VERSION = 1
DEFAULT_RHO = 0.999


class TeacherTableError(ValueError):
    pass


class TransitionStats:
    """Visit counts and running Q sums per transition."""

    def __init__(self):
        self.eta: dict[Transition, int] = defaultdict(int)
        self.q_sum: dict[Transition, float] = defaultdict(float)

    def record(self, omega: int, sigma: int, q: float) -> None:
        self.eta[(omega, sigma)] += 1
        self.q_sum[(omega, sigma)] += q

    def q_avg(self, omega: int, sigma: int) -> float | None:
        n = self.eta.get((omega, sigma), 0)
        return self.q_sum[(omega, sigma)] / n if n else None

    def transitions(self) -> list[Transition]:
        return sorted(k for k, n in self.eta.items() if n > 0)


def q_avg(stats: TransitionStats, omega: int, sigma: int) -> float | None:
    return stats.q_avg(omega, sigma)


@dataclass(frozen=True)
class TeacherEntry:
    eta: int
    q_avg: float


@dataclass
class TeacherTable:
    """Teacher estimates per transition.  Missing transitions are absent."""

    provenance: str
    entries: dict[Transition, TeacherEntry] = field(default_factory=dict)
    ap: tuple[str, ...] = ()
    n_states: int = 0

    def __post_init__(self):
        if self.provenance not in ("dynamic", "static"):
            raise TeacherTableError(f"unknown provenance {self.provenance!r}")
        for k, e in self.entries.items():
            if not math.isfinite(e.q_avg):
                raise TeacherTableError(f"non-finite teacher value at {k}")

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, key: Transition) -> bool:
        return key in self.entries

    def get(self, omega: int, sigma: int) -> float | None:
        e = self.entries.get((omega, sigma))
        return None if e is None else e.q_avg

    def dense(self, n_states: int, n_labels: int) -> np.ndarray:
        """Array [omega, label] of teacher values, NaN where absent."""
        out = np.full((n_states, n_labels), np.nan)
        for (w, s), e in self.entries.items():
            if w < n_states and s < n_labels:
                out[w, s] = e.q_avg
        return out

    def lookup(self, omega: np.ndarray, sigma: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`get`; absent entries are NaN."""
        return np.array([self.get(int(w), int(s)) if (int(w), int(s)) in self.entries
                         else np.nan for w, s in zip(omega, sigma)], dtype=float)

    # -- persistence -------------------------------------------------------------
    # JSON floats are written with repr, which round-trips binary64 exactly.

    def to_json(self) -> str:
        rows = [
            {"omega": w, "label": s, "eta": e.eta, "q_avg": e.q_avg}
            for (w, s), e in sorted(self.entries.items())
        ]
        doc = {"version": TABLE_VERSION, "provenance": self.provenance, "ap": list(self.ap),
               "n_states": self.n_states, "entries": rows}
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "TeacherTable":
        doc = json.loads(text)
        if doc.get("version") != TABLE_VERSION:
            raise TeacherTableError(f"unsupported teacher table version {doc.get('version')}")
        entries = {(int(r["omega"]), int(r["label"])): TeacherEntry(int(r["eta"]), float(r["q_avg"]))
                   for r in doc["entries"]}
        return cls(doc["provenance"], entries, tuple(doc.get("ap", ())), int(doc.get("n_states", 0)))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "TeacherTable":
        return cls.from_json(Path(path).read_text())


# rho ** k for k = 0, 1, ... per rho, grown on demand; see beta_table
_BETA_TABLES: dict[float, tuple[np.ndarray, mpmath.mpf]] = {}
_BETA_PREC = 160


def beta_table(rho: float, n: int) -> np.ndarray:
    """Correctly rounded ``rho ** k`` for ``k < n`` (shorter once it hits zero).

    Libm ``pow`` is off by an ulp for some large exponents, so the powers
    are accumulated in 160-bit arithmetic and rounded once.
    """
    table, last = _BETA_TABLES.get(rho, (np.ones(1), None))
    if len(table) >= n or table[-1] == 0.0:
        return table
    with mpmath.workprec(_BETA_PREC):
        r = mpmath.mpf(rho)
        x = r ** (len(table) - 1) if last is None else last
        size = max(n, 2 * len(table))
        out = [float(x)]
        for _ in range(size - len(table)):
            x *= r
            v = float(x)
            out.append(v)
            if v == 0.0:
                break
    table = np.concatenate([table, out[1:]])
    _BETA_TABLES[rho] = (table, x)
    return table


def rho_powers(rho: float, k) -> np.ndarray:
    """Vectorized correctly rounded ``rho ** k`` for non-negative integer ``k``."""
    k = np.asarray(k, dtype=np.int64)
    if k.size == 0:
        return np.zeros(k.shape)
    table = beta_table(rho, int(k.max()) + 1)
    return np.where(k < len(table), table[np.minimum(k, len(table) - 1)], 0.0)


class AnnealState:
    """Student-side sample counts; beta = rho ** eta.

    With ``shape=(n_states, n_labels)`` the counts live in a dense array,
    which keeps batched lookups vectorized.
    """

    def __init__(self, rho: float = DEFAULT_RHO, shape: tuple[int, int] | None = None):
        if not 0 < rho <= 1:
            raise ValueError("rho must lie in (0, 1]")
        self.rho = rho
        self.dense = shape is not None
        self.eta = np.zeros(shape, dtype=np.int64) if self.dense else defaultdict(int)

    def count_of(self, omega: int, sigma: int) -> int:
        if self.dense:
            return int(self.eta[omega, sigma])
        return self.eta.get((omega, sigma), 0)

    def beta(self, omega: int, sigma: int) -> float:
        return float(rho_powers(self.rho, self.count_of(omega, sigma)))

    def betas(self, omega, sigma) -> np.ndarray:
        if self.dense:
            return rho_powers(self.rho, np.ravel(self.eta[omega, sigma]))
        return rho_powers(self.rho, [self.count_of(int(w), int(s)) for w, s in zip(omega, sigma)])

    def count(self, omega, sigma) -> None:
        """One increment per sampled element (duplicates count twice)."""
        if self.dense:
            np.add.at(self.eta, (np.asarray(omega), np.asarray(sigma)), 1)
            return
        for w, s in zip(omega, sigma):
            self.eta[(int(w), int(s))] += 1

    def bump(self, omega: int, sigma: int) -> None:
        if self.dense:
            self.eta[omega, sigma] += 1
        else:
            self.eta[(omega, sigma)] += 1


def beta(anneal: AnnealState, omega: int, sigma: int) -> float:
    return anneal.beta(omega, sigma)


def blend(q_target, teacher, beta):
    """beta * teacher + (1 - beta) * q_target, with NaN teacher meaning absent."""
    q_target = np.asarray(q_target, dtype=float)
    teacher = np.asarray(teacher, dtype=float)
    beta = np.asarray(beta, dtype=float)
    out = beta * teacher + (1.0 - beta) * q_target
    return np.where(np.isnan(teacher), q_target, out)


def student_target(exp, teacher: TeacherTable | None, anneal: AnnealState, q_target: float) -> float:
    """Blended learning target for one experience."""
    if teacher is None:
        return float(q_target)
    t = teacher.get(exp.omega, exp.label_next)
    if t is None:
        return float(q_target)
    b = anneal.beta(exp.omega, exp.label_next)
    return b * t + (1.0 - b) * q_target
