"""Static figures of rate regions, written to files (never shown)."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .regions import RateRegion, boundary_order, vertices  # noqa: E402

_STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "savefig.dpi": 150,
}

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def plot_regions(
    regions: Sequence[tuple[str, RateRegion]],
    path: str | Path,
    title: str | None = None,
) -> Path:
    """Draw each region as a filled polygon in the (R1, R2) plane."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(4.2, 4.0))
        top = 0.0
        for i, (name, region) in enumerate(regions):
            pts = boundary_order(v.point for v in vertices(region))
            if not pts:
                continue
            xs = [float(p.r1) for p in pts]
            ys = [float(p.r2) for p in pts]
            top = max(top, *xs, *ys)
            color = _COLORS[i % len(_COLORS)]
            if len(pts) >= 3:
                ax.fill(xs, ys, color=color, alpha=0.25, lw=0)
                ax.plot(xs + xs[:1], ys + ys[:1], color=color, lw=1.5, label=name)
            else:
                ax.plot(xs, ys, "o-", color=color, lw=1.5, label=name)
        pad = max(top, 1.0) * 0.08
        ax.set_xlim(-pad, max(top, 1.0) + pad)
        ax.set_ylim(-pad, max(top, 1.0) + pad)
        ax.set_xlabel("$R_1$")
        ax.set_ylabel("$R_2$")
        ax.set_aspect("equal")
        ax.grid(True, lw=0.4, alpha=0.5)
        if title:
            ax.set_title(title)
        ax.legend(loc="best")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path
