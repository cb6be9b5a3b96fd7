"""Matplotlib rendering of ranking and coverage results to image files.

Figures are written straight to disk (Agg backend); the CSV/JSON emitted by
the CLI stays the canonical machine-readable output, these are the
human-facing companions.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib import cm, colors

from .checker import RankReport
from .logs import CoverageReport


def save_ranking_figure(report: RankReport, path: str, title: str | None = None) -> None:
    """Horizontal bar chart of situation criticality, most critical on top.

    Bars fade from red (critical) to green (safer), mirroring the usual
    traffic-light presentation of verification results.
    """
    codes = [code for code, _ in report.entries]
    probs = [p for _, p in report.entries]
    n = len(codes)
    cmap = cm.get_cmap("RdYlGn")
    norm = colors.Normalize(vmin=0.0, vmax=max(n - 1, 1))
    bar_colors = [cmap(norm(i)) for i in range(n)]

    fig, ax = plt.subplots(figsize=(7, max(2.5, 0.38 * n + 1.2)))
    ypos = range(n)
    ax.barh(ypos, probs, color=bar_colors, edgecolor="black", linewidth=0.4)
    ax.set_yticks(list(ypos))
    ax.set_yticklabels(codes, fontfamily="monospace")
    ax.invert_yaxis()  # most critical at the top
    ax.set_xlabel(f"probability of {report.provenance}")
    ax.set_xlim(0, 1.0)
    ax.set_title(title or "situation criticality ranking")
    for y, p in zip(ypos, probs):
        ax.text(min(p + 0.01, 0.99), y, f"{p:.3f}", va="center", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_coverage_figure(report: CoverageReport, path: str, title: str | None = None) -> None:
    """One tile per situation code, green when observed, grey when not."""
    codes = list(report.observed) + list(report.unobserved)
    codes.sort()
    observed = set(report.observed)
    ncols = max(1, round(len(codes) ** 0.5))
    nrows = -(-len(codes) // ncols)

    fig, ax = plt.subplots(figsize=(1.2 * ncols + 1, 0.9 * nrows + 1))
    for i, code in enumerate(codes):
        r, c = divmod(i, ncols)
        color = "#7fc97f" if code in observed else "#d9d9d9"
        ax.add_patch(plt.Rectangle((c, nrows - 1 - r), 0.94, 0.94, facecolor=color, edgecolor="black", linewidth=0.5))
        ax.text(c + 0.47, nrows - 1 - r + 0.47, code, ha="center", va="center", fontsize=9, fontfamily="monospace")
    ax.set_xlim(0, ncols)
    ax.set_ylim(0, nrows)
    ax.set_aspect("equal")
    ax.axis("off")
    pct = 100.0 * report.ratio
    ax.set_title(title or f"situation coverage ({len(observed)}/{len(codes)}, {pct:.0f}%)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
