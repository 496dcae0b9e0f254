"""Presentation helpers: DOT text, matplotlib figures, CSV tables.

The DOT output is a collage of the chain against the site: stage nodes in
one cluster, site objects in the other, dotted edges tying each stage to
the object it sits over.  Figures are rendered with the Agg backend so
everything works headless; the file format follows the path suffix.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .enough import EnoughReport
from .fincat import Cochain, FinCategory
from .improve import SynthesisResult
from .sites import Warp


def _stage_names(cat: FinCategory, chain: Cochain) -> list[str]:
    names = [cat.obj_names[chain.start]]
    for m in chain.steps:
        names.append(cat.obj_names[cat.dom(m)])
    return names


def chain_dot(cat: FinCategory, chain: Cochain, warp: Warp | None = None) -> str:
    """Deterministic DOT collage of a chain over its site."""
    lines = ["digraph chain {", "  rankdir=LR;", "  node [shape=box, fontsize=10];"]
    lines.append("  subgraph cluster_chain {")
    lines.append('    label="chain";')
    stages = _stage_names(cat, chain)
    for i, s in enumerate(stages):
        lines.append(f'    s{i} [label="{i}: {s}"];')
    for i, m in enumerate(chain.steps):
        lines.append(f'    s{i + 1} -> s{i} [label="{cat.mor_names[m]}"];')
    n = len(chain.steps)
    for j in range(1, len(chain.cycle)):
        s = cat.obj_names[cat.cod(chain.cycle[j])]
        lines.append(f'    p{j} [label="+{j}: {s}", style=dashed];')
    for j, m in enumerate(chain.cycle):
        src = f"p{j + 1}" if j + 1 < len(chain.cycle) else f"s{n}"
        dst = f"s{n}" if j == 0 else f"p{j}"
        lines.append(f'    {src} -> {dst} [label="{cat.mor_names[m]}", style=dashed];')
    lines.append("  }")
    lines.append("  subgraph cluster_site {")
    lines.append('    label="site";')
    for o in cat.objects():
        extra = ""
        if warp is not None and warp.at(o):
            extra = f" ({len(warp.at(o))} presieves)"
        lines.append(f'    o{o} [label="{cat.obj_names[o]}{extra}"];')
    lines.append("  }")
    for i, s in enumerate(stages):
        lines.append(f"  s{i} -> o{cat.obj_index(s)} [style=dotted, arrowhead=none];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def synthesis_figure(cat: FinCategory, result: SynthesisResult, path: str | Path) -> None:
    """Two-column summary figure: chain stages left, trace right."""
    left: list[str] = []
    if result.point is not None:
        stages = _stage_names(cat, result.point)
        left = [f"{i}: {s}" for i, s in enumerate(stages)]
        for j, m in enumerate(reversed(result.point.cycle)):
            left.append(f"+{j + 1}: {cat.mor_names[m]}")
    else:
        left = ["(no point)"]
    right = [f"{'ok' if result.ok else 'failed'}: {result.reason or 'separated'}"]
    for r in result.trace:
        presieve = "pad" if r.presieve_index is None else f"#{r.presieve_index}"
        right.append(
            f"k={r.k} stage {r.stage} {presieve} via {cat.mor_names[r.member]}"
        )

    rows = max(len(left), len(right), 1)
    fig, ax = plt.subplots(figsize=(6.4, 0.9 + 0.32 * rows))
    ax.set_axis_off()
    for i, text in enumerate(left):
        ax.text(0.03, 1 - (i + 1) / (rows + 1), text, fontsize=9, family="monospace")
    for i, text in enumerate(right):
        ax.text(0.55, 1 - (i + 1) / (rows + 1), text, fontsize=9, family="monospace")
    ax.axvline(x=0.5, linestyle="--", linewidth=0.8, color="grey")
    ax.set_title("chain synthesis")
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)


def enough_figure(cat: FinCategory, report: EnoughReport, path: str | Path) -> None:
    """One bar per section pair: steps taken, hatched when not separated."""
    labels, widths, hatches = [], [], []
    for out in report.outcomes:
        labels.append(
            f"{out.presheaf}@{cat.obj_names[out.obj]} [{out.x_elem},{out.y_elem}]"
        )
        widths.append(len(out.result.trace))
        hatches.append("" if out.result.ok else "//")
    if not labels:
        labels, widths, hatches = ["(no pairs)"], [0], [""]

    fig, ax = plt.subplots(figsize=(6.4, 0.7 + 0.3 * len(labels)))
    bars = ax.barh(range(len(labels)), widths, color="#4878a8")
    for bar, hatch in zip(bars, hatches):
        bar.set_hatch(hatch)
    ax.set_yticks(range(len(labels)))
    ax.set_yticklabels(labels, fontsize=8)
    ax.invert_yaxis()
    ax.set_xlabel("improvement steps")
    ax.set_title("separating points" + ("" if report.ok else " (with failures)"))
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)


def enough_csv(cat: FinCategory, report: EnoughReport) -> str:
    """Delimited table with one row per checked pair."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["presheaf", "object", "x", "y", "ok", "steps", "reason"])
    for out in report.outcomes:
        writer.writerow(
            [
                out.presheaf,
                cat.obj_names[out.obj],
                out.x_elem,
                out.y_elem,
                out.result.ok,
                len(out.result.trace),
                out.result.reason,
            ]
        )
    for name, why in report.skipped:
        writer.writerow([name, "", "", "", "skipped", 0, why])
    return buf.getvalue()
