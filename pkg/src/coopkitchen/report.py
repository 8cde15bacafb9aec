"""Figure rendering for cross-play summaries.

One heatmap per layout (player-0 policy rows, player-1 policy columns, cell
mean reward) plus an overview bar chart of per-seat means, written as PNG
files next to the delimited output.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .harness import Summary


def render_heatmaps(summary: Summary, out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for layout, data in summary.heatmaps.items():
        policies = data["policies"]
        grid = [[v if v is not None else float("nan") for v in row]
                for row in data["grid"]]
        fig, ax = plt.subplots(figsize=(1.6 + 0.9 * len(policies),
                                        1.4 + 0.9 * len(policies)))
        im = ax.imshow(grid, cmap="viridis")
        ax.set_xticks(range(len(policies)), policies, rotation=30, ha="right")
        ax.set_yticks(range(len(policies)), policies)
        ax.set_xlabel("player 1 policy")
        ax.set_ylabel("player 0 policy")
        ax.set_title(f"mean reward: {layout}")
        for y, row in enumerate(grid):
            for x, value in enumerate(row):
                if value == value:  # skip NaN
                    ax.text(x, y, f"{value:.0f}", ha="center", va="center",
                            color="white", fontsize=9)
        fig.colorbar(im, ax=ax, shrink=0.8)
        fig.tight_layout()
        path = out_dir / f"heatmap_{layout}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)
    return paths


def render_seat_chart(summary: Summary, out_dir: str | Path) -> Path | None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = [r for r in summary.seats if r["episodes"] > 0]
    if not rows:
        return None
    labels = [f"{r['policy']}\n{r['layout']} seat {r['seat']}" for r in rows]
    means = [r["mean"] for r in rows]
    errs = [r["se"] for r in rows]
    fig, ax = plt.subplots(figsize=(max(6.0, 0.7 * len(rows)), 4.0))
    ax.bar(range(len(rows)), means, yerr=errs, capsize=3, color="#31688e")
    ax.set_xticks(range(len(rows)), labels, rotation=45, ha="right", fontsize=7)
    ax.set_ylabel("mean reward vs. other policies")
    ax.set_title("per-seat cross-play means (self-pairs excluded)")
    fig.tight_layout()
    path = out_dir / "seat_means.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
