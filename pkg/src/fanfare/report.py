"""Figure and text rendering for evaluation reports and run summaries.

Figures are written next to the delimited report output: an nDCG-versus-depth
curve, a precision/recall bar chart per depth, and (for curation runs) a
stacked component breakdown of the top highlights showing how much each
excitement marker contributed to the fused score.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .engine import FusionWeights, Highlight

_COMPONENT_COLORS = {
    "cheer": "#2a6fbb",
    "tone": "#e8a33d",
    "text": "#54a868",
    "action": "#c25454",
}


def render_eval_figures(report: dict, out_stem) -> list:
    """Write evaluation figures derived from a cmd_eval report dict.

    Returns the paths written: `<stem>_pr.png` always, `<stem>_ndcg.png`
    when the report carries nDCG values.
    """
    out_stem = Path(out_stem)
    written = []

    depths = report["depths"]
    precision = [report["results"][str(d)]["precision"] for d in depths]
    recall = [report["results"][str(d)]["recall"] for d in depths]

    fig, ax = plt.subplots(figsize=(6, 4))
    x = range(len(depths))
    width = 0.38
    ax.bar([i - width / 2 for i in x], precision, width, label="precision", color="#2a6fbb")
    ax.bar([i + width / 2 for i in x], recall, width, label="recall", color="#54a868")
    ax.set_xticks(list(x), [str(d) for d in depths])
    ax.set_xlabel("depth")
    ax.set_ylim(0, 1.05)
    ax.set_title("Reference match by depth")
    ax.legend()
    fig.tight_layout()
    pr_path = out_stem.with_name(out_stem.name + "_pr.png")
    fig.savefig(pr_path, dpi=120)
    plt.close(fig)
    written.append(pr_path)

    ndcg_values = report.get("ndcg")
    if ndcg_values:
        fig, ax = plt.subplots(figsize=(6, 4))
        pairs = sorted(((int(d), v) for d, v in ndcg_values.items()))
        ax.plot([d for d, _ in pairs], [v for _, v in pairs],
                marker="o", color="#2a6fbb")
        ax.set_xlabel("rank depth")
        ax.set_ylabel("nDCG")
        ax.set_ylim(0, 1.05)
        ax.set_title("Ranking quality by depth")
        ax.grid(alpha=0.3)
        fig.tight_layout()
        ndcg_path = out_stem.with_name(out_stem.name + "_ndcg.png")
        fig.savefig(ndcg_path, dpi=120)
        plt.close(fig)
        written.append(ndcg_path)
    return written


def render_component_figure(highlights: Sequence[Highlight], weights: FusionWeights,
                            path, top: int = 10):
    """Stacked weighted-component bars for the top highlights of a run."""
    path = Path(path)
    shown = list(highlights[:top])
    fig, ax = plt.subplots(figsize=(7, max(2.5, 0.5 * len(shown) + 1.5)))
    labels = []
    for rank, h in enumerate(shown):
        left = 0.0
        parts = (("cheer", weights.w_cheer * h.components.cheer),
                 ("tone", weights.w_tone * h.components.tone),
                 ("text", weights.w_text * h.components.text),
                 ("action", weights.w_action * h.components.action))
        for name, value in parts:
            ax.barh(rank, value, left=left, color=_COMPONENT_COLORS[name],
                    label=name if rank == 0 else None)
            left += value
        who = h.player or "?"
        hole = f" h{h.hole}" if h.hole else ""
        labels.append(f"#{rank + 1} {who}{hole} @{h.t_start // 1000}s")
    ax.set_yticks(range(len(shown)), labels)
    ax.invert_yaxis()
    ax.set_xlim(0, 1.0)
    ax.set_xlabel("weighted contribution to fused score")
    ax.set_title("Top highlights: excitement breakdown")
    if shown:
        ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def format_eval_summary(report: dict) -> str:
    """Plain-text table mirroring the JSON report."""
    lines = ["evaluation summary", "==================", ""]
    header = f"{'depth':>8} {'precision':>10} {'recall':>10}"
    ndcg_values = report.get("ndcg") or {}
    if ndcg_values:
        header += f" {'nDCG':>10}"
    lines.append(header)
    for d in report["depths"]:
        row = (f"{d:>8} {report['results'][str(d)]['precision']:>10.4f} "
               f"{report['results'][str(d)]['recall']:>10.4f}")
        if str(d) in ndcg_values:
            row += f" {ndcg_values[str(d)]:>10.5f}"
        lines.append(row)
    lines.append("")
    lines.append(f"produced: {report['produced']}  reference: {report['reference']}")
    return "\n".join(lines) + "\n"


def format_run_summary(highlights: Sequence[Highlight], top: int = 5) -> str:
    lines = [f"{len(highlights)} highlight(s)"]
    for rank, h in enumerate(highlights[:top], start=1):
        who = h.player or "(unknown player)"
        hole = f", hole {h.hole}" if h.hole else ""
        lines.append(
            f"  {rank}. [{h.t_start / 1000:.1f}s - {h.t_end / 1000:.1f}s] "
            f"fused={h.fused_score:.3f} {who}{hole}")
    return "\n".join(lines)
