"""Matplotlib renderings of features, navigation traces and flow fields.

Figures are conveniences; the CSV files written next to them carry the data.
"""
from __future__ import annotations

from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .envsim.geometry import Environment2D  # noqa: E402

# fixed metadata keeps re-rendered PNGs identical
_PNG_META = {"Software": None}


def _save(fig, path) -> None:
    fig.savefig(path, dpi=100, metadata=_PNG_META)
    plt.close(fig)


def draw_environment(ax, env: Environment2D, color: str = "k") -> None:
    for x0, y0, x1, y1 in env.segments:
        ax.plot([x0, x1], [y0, y1], color=color, lw=1.5)
    xmin, ymin, xmax, ymax = env.bounds
    ax.set_xlim(xmin - 0.02, xmax + 0.02)
    ax.set_ylim(ymin - 0.02, ymax + 0.02)
    ax.set_aspect("equal")
    ax.set_xticks([])
    ax.set_yticks([])


def plot_feature_grid(env: Environment2D, n: int, mask, values, path,
                      titles: Optional[Sequence[str]] = None) -> None:
    """One heat map per component over an n×n lattice; exterior cells blank."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    k = values.shape[1]
    cols = min(k, 4)
    rows = -(-k // cols)
    fig, axes = plt.subplots(rows, cols, figsize=(3 * cols, 3 * rows), squeeze=False)
    xmin, ymin, xmax, ymax = env.bounds
    for i, ax in enumerate(axes.ravel()):
        if i >= k:
            ax.axis("off")
            continue
        img = np.full(n * n, np.nan)
        img[np.asarray(mask)] = values[:, i]
        ax.imshow(img.reshape(n, n), origin="lower", extent=(xmin, xmax, ymin, ymax),
                  cmap="viridis", interpolation="nearest")
        draw_environment(ax, env)
        ax.set_title(titles[i] if titles else f"component {i + 1}", fontsize=9)
    fig.tight_layout()
    _save(fig, path)


def plot_traces(env: Environment2D, traces, path, goal=None) -> None:
    """Agent paths; each trace is an array of positions."""
    fig, ax = plt.subplots(figsize=(4, 4))
    draw_environment(ax, env)
    for states in traces:
        s = np.asarray(states)
        ax.plot(s[:, 0], s[:, 1], lw=0.8)
        ax.plot(s[0, 0], s[0, 1], "o", ms=3, color="tab:green")
    if goal is not None:
        ax.plot(goal[0], goal[1], "*", ms=10, color="tab:red")
    _save(fig, path)


def plot_flow(env: Environment2D, points, vectors, path, goal=None) -> None:
    fig, ax = plt.subplots(figsize=(4, 4))
    draw_environment(ax, env)
    ok = np.all(np.isfinite(vectors), axis=1)
    ax.quiver(points[ok, 0], points[ok, 1], vectors[ok, 0], vectors[ok, 1],
              angles="xy", scale_units="xy", scale=1.0, width=0.004)
    if goal is not None:
        ax.plot(goal[0], goal[1], "*", ms=10, color="tab:red")
    _save(fig, path)


def plot_curves(x, curves: dict, path, xlabel: str = "x", refs: Optional[dict] = None) -> None:
    """Line plot of named curves over ``x``; ``refs`` are drawn dashed."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for name, y in curves.items():
        ax.plot(x, y, label=name, lw=1.2)
    for name, y in (refs or {}).items():
        ax.plot(x, y, "--", label=name, lw=0.8)
    ax.set_xlabel(xlabel)
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    _save(fig, path)


def plot_histogram(edges, counts, path, xlabel: str = "x") -> None:
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.stairs(counts, edges, fill=True)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("visits")
    fig.tight_layout()
    _save(fig, path)


def plot_phase(traces, path) -> None:
    """Pendulum trajectories in the (velocity, amplitude) plane."""
    fig, ax = plt.subplots(figsize=(4, 4))
    for phase in traces:
        ph = np.asarray(phase)
        ax.plot(ph[:, 0], ph[:, 1], ".", ms=1)
    ax.set_xlabel("velocity")
    ax.set_ylabel("amplitude")
    _save(fig, path)
