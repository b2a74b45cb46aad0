"""Learning-curve plots and teacher-value automaton renderings."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

from ..ltlf import Dfa
from ..rl import TeacherTable

# dynamic red, static blue, as in the usual two-table overlay
PROVENANCE_COLORS = {"dynamic": "red", "static": "blue"}
ARM_COLORS = {"dynamic": "tab:blue", "static": "tab:orange", "crm": "tab:green",
              "product": "tab:red", "vanilla": "tab:purple"}


def plot_curves(aggregate: dict[str, list[tuple]], path: str | Path, title: str = "") -> None:
    """Mean moving-average return per arm with the interquartile band."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    # fixed hash salt and no date keep the SVG deterministic
    with matplotlib.rc_context({"svg.hashsalt": "autodistill", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(7, 4))
        for arm, rows in aggregate.items():
            if not rows:
                continue
            arr = np.array([r[:1] + r[2:] for r in rows], dtype=float)
            x, mean, _, q25, q75 = arr.T
            color = ARM_COLORS.get(arm)
            ax.plot(x, mean, label=arm, color=color, linewidth=1.2)
            ax.fill_between(x, q25, q75, color=color, alpha=0.15, linewidth=0)
        ax.set_xlabel("environment steps")
        ax.set_ylabel("return (moving average, 100 episodes)")
        if title:
            ax.set_title(title)
        ax.legend(loc="lower right", frameon=False)
        ax.grid(alpha=0.3)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def _esc(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def report_qvalues(tables: TeacherTable | Sequence[TeacherTable], d: Dfa, name: str = "qvalues") -> str:
    """DOT graph with one edge per (automaton state, label) and table.

    Each table draws its own edges, colored by provenance.  Edges with an
    entry carry ``Q^avg`` and ``eta``; edges the table has no entry for are
    dashed.  Transitions out of accepting states are omitted (episodes end
    there).
    """
    if isinstance(tables, TeacherTable):
        tables = [tables]
    lines = [f'digraph "{_esc(name)}" {{', "  rankdir=LR;", '  __start [shape=point, label=""];']
    for q in d.states:
        shape = "doublecircle" if q in d.accepting else "circle"
        lines.append(f'  q{q} [shape={shape}, label="{q}"];')
    lines.append(f"  __start -> q{d.initial};")
    for t in tables:
        color = PROVENANCE_COLORS.get(t.provenance, "black")
        for q in d.states:
            if q in d.accepting:
                continue
            for sigma in d.alphabet():
                target = d.step(q, sigma)
                text = d.ap.format_label(sigma)
                e = t.entries.get((q, sigma))
                if e is None:
                    attrs = f'label="{_esc(text)}", style=dashed'
                else:
                    attrs = f'label="{_esc(text)}\\nQ={e.q_avg:.2f} n={e.eta}"'
                lines.append(f"  q{q} -> q{target} [{attrs}, color={color}, fontcolor={color}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
