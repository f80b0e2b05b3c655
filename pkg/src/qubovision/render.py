"""Figure rendering: keypoint overlays, match visualizations, kernel heatmaps.

All figures are written straight to files with the Agg backend so the
package stays headless.  Heatmaps use the fixed ``viridis`` ramp with the
color scale pinned to [0, 1] so side-by-side kernel comparisons stay
visually stable across runs.
"""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

HEATMAP_CMAP = "viridis"


def save_keypoint_overlay(grid: np.ndarray, keypoints, path: str) -> None:
    """Draw keypoints as crosses on top of the image."""
    fig, ax = plt.subplots(figsize=(8, 8 * grid.shape[0] / max(grid.shape[1], 1)))
    ax.imshow(grid, interpolation="nearest")
    if keypoints:
        cols = [kp.col for kp in keypoints]
        rows = [kp.row for kp in keypoints]
        ax.scatter(cols, rows, marker="+", c="red", s=60, linewidths=1.2)
    ax.set_axis_off()
    fig.savefig(path, bbox_inches="tight", pad_inches=0.05, dpi=120)
    plt.close(fig)


def save_match_figure(grid_a: np.ndarray, grid_b: np.ndarray, keypoints_a, keypoints_b,
                      pairs: Sequence[tuple[int, int]], path: str,
                      title: str | None = None) -> None:
    """Side-by-side images with a line per matched keypoint pair."""
    ha, wa = grid_a.shape[:2]
    hb, wb = grid_b.shape[:2]
    gap = max(4, wa // 10)
    canvas = np.ones((max(ha, hb), wa + gap + wb, 3))
    canvas[:ha, :wa] = grid_a
    canvas[:hb, wa + gap:] = grid_b

    fig, ax = plt.subplots(figsize=(10, 10 * canvas.shape[0] / canvas.shape[1]))
    ax.imshow(canvas, interpolation="nearest")
    ax.scatter([kp.col for kp in keypoints_a], [kp.row for kp in keypoints_a],
               marker="+", c="red", s=50, linewidths=1.0)
    ax.scatter([kp.col + wa + gap for kp in keypoints_b], [kp.row for kp in keypoints_b],
               marker="+", c="red", s=50, linewidths=1.0)
    for i, j in pairs:
        a, b = keypoints_a[i], keypoints_b[j]
        ax.plot([a.col, b.col + wa + gap], [a.row, b.row], c="lime", linewidth=1.0)
    if title:
        ax.set_title(title)
    ax.set_axis_off()
    fig.savefig(path, bbox_inches="tight", pad_inches=0.05, dpi=120)
    plt.close(fig)


def save_heatmap(matrix: np.ndarray, path: str, title: str | None = None,
                 vmin: float = 0.0, vmax: float = 1.0) -> None:
    """Kernel/distance matrix heatmap with a fixed color ramp."""
    fig, ax = plt.subplots(figsize=(6, 5))
    im = ax.imshow(matrix, cmap=HEATMAP_CMAP, vmin=vmin, vmax=vmax,
                   interpolation="nearest")
    fig.colorbar(im, ax=ax)
    if title:
        ax.set_title(title)
    fig.savefig(path, bbox_inches="tight", dpi=120)
    plt.close(fig)
