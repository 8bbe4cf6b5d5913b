"""Per-turn metric figures rendered next to the delimited report output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluation import RunReport
from .simulate import SIMBASE

METRICS = ("sr1", "ndcg10", "mrr10")
LABELS = {"sr1": "SR@1", "ndcg10": "NDCG@10", "mrr10": "MRR@10"}


def _ordered(reports: list[RunReport]) -> list[RunReport]:
    base = [r for r in reports if r.simulator_spec == SIMBASE]
    rest = sorted((r for r in reports if r.simulator_spec != SIMBASE), key=lambda r: r.simulator_spec)
    return base + rest


def render_metric_figures(reports: list[RunReport], out_dir, slug: str) -> list[Path]:
    """One PNG per metric: turn on x, per-simulator mean on y."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for metric in METRICS:
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        for report in _ordered(reports):
            turns = [row.turn for row in report.per_turn]
            values = [getattr(row, metric) for row in report.per_turn]
            style = "--" if report.simulator_spec == SIMBASE else "-"
            ax.plot(turns, values, style, marker="o", markersize=3, label=report.simulator_spec)
        ax.set_xlabel("turn")
        ax.set_ylabel(LABELS[metric])
        ax.set_ylim(0.0, 1.02)
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=7, loc="lower right")
        ax.set_title(f"{LABELS[metric]} per turn ({reports[0].sut_spec})", fontsize=10)
        fig.tight_layout()
        path = out_dir / f"fig_{slug}_{metric}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        paths.append(path)
    return paths
