"""Figures written next to the JSON reports of the command-line tool."""

from __future__ import annotations

import math
from collections import Counter

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# fixed metadata keeps repeated runs byte-identical
_META = {"Software": None}


def _save(fig, path):
    fig.savefig(path, dpi=120, bbox_inches="tight", metadata=_META)
    plt.close(fig)
    return path


def connectivity_figure(flows: dict[int, int], target: int, path, title: str = ""):
    """Histogram of the flow values from the fixed terminal to every other terminal."""
    counts = Counter(flows.values())
    xs = sorted(counts)
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar([str(x) for x in xs], [counts[x] for x in xs], color="0.55", edgecolor="k", lw=0.6)
    ax.set_xlabel("max flow from the fixed terminal")
    ax.set_ylabel("terminals")
    ax.set_title(title or f"target {target}")
    for lab in ax.get_xticklabels():
        if lab.get_text() == str(target):
            lab.set_fontweight("bold")
    return _save(fig, path)


def audit_figure(audit, k: int, path, title: str = ""):
    """Edge counts of Q on basic cuts and aligned sets against the bound ``2k``."""
    kinds = [("basic-cut", "basic cuts (= 2k)"), ("aligned-set", "aligned sets (>= 2k)")]
    fig, axes = plt.subplots(1, 2, figsize=(8, 3.2))
    for ax, (kind, label) in zip(axes, kinds):
        vals = [c.observed for c in audit.checks if c.kind == kind]
        if vals:
            top = max(vals + [2 * k])
            ax.hist(vals, bins=range(0, top + 2), color="0.55", edgecolor="k", lw=0.6, align="left")
        ax.axvline(2 * k, color="k", ls="--", lw=1)
        ax.set_xlabel("|Q ∩ cut|")
        ax.set_title(label, fontsize=10)
    axes[0].set_ylabel("count")
    if title:
        fig.suptitle(title)
    return _save(fig, path)


def base_figure(N, highlight=(), path=None, title: str = "", colouring=None):
    """The base graph on a circle, ``highlight`` edges drawn bold."""
    n = N.n
    pos = [(math.cos(2 * math.pi * v / n), math.sin(2 * math.pi * v / n)) for v in range(n)]
    hl = set(highlight)
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    for e, (a, b) in enumerate(N.edges):
        (x0, y0), (x1, y1) = pos[a], pos[b]
        if e in hl:
            ax.plot([x0, x1], [y0, y1], color="k", lw=2.2, zorder=2)
        else:
            ax.plot([x0, x1], [y0, y1], color="0.75", lw=0.7, zorder=1)
    face = ["k" if colouring and colouring[v] == 0 else "w" for v in range(n)]
    ax.scatter([p[0] for p in pos], [p[1] for p in pos], c=face, edgecolors="k", s=28, zorder=3)
    ax.set_aspect("equal")
    ax.axis("off")
    if title:
        ax.set_title(title)
    return _save(fig, path)
