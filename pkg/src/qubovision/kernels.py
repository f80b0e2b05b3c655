"""Distance and kernel matrices feeding the clustering and matching builders.

All kernels used here map into [0, 1]; the matching formulation assumes
kernel values never exceed 1, and the cosine kernel clamps accordingly.
Kernel functions are plain ``f(x, y) -> float`` callables so that the exact
quantum kernel plugs into the same matrix builder as the classical ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.spatial.distance import cdist

Kernel = Callable[[np.ndarray, np.ndarray], float]


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric pairwise Euclidean distances with a zero diagonal."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"distance matrix must be square, got {m.shape}")
        if np.any(m < 0) or np.any(np.diag(m) != 0) or not np.array_equal(m, m.T):
            raise ValueError("distance matrix must be symmetric, non-negative, zero-diagonal")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def to_csv(self) -> str:
        return matrix_to_csv(self.entries)


@dataclass(frozen=True)
class KernelMatrix:
    """Dense kernel values; ``symmetric`` marks single-point-set matrices."""

    entries: np.ndarray
    symmetric: bool = False

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=np.float64)
        if m.ndim != 2:
            raise ValueError(f"kernel matrix must be 2-D, got {m.shape}")
        if self.symmetric and (m.shape[0] != m.shape[1] or not np.array_equal(m, m.T)):
            raise ValueError("matrix flagged symmetric is not")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def m(self) -> int:
        return self.entries.shape[1]

    def to_csv(self) -> str:
        return matrix_to_csv(self.entries)


def matrix_to_csv(entries: np.ndarray) -> str:
    """Row-major full-matrix CSV with shortest-roundtrip float formatting."""
    return "\n".join(",".join(repr(float(v)) for v in row) for row in entries) + "\n"


def matrix_from_csv(text: str) -> np.ndarray:
    rows = [line.split(",") for line in text.strip().splitlines()]
    return np.array([[float(v) for v in row] for row in rows], dtype=np.float64)


def _check_pair(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return x, y


def gaussian_kernel(x: Sequence[float], y: Sequence[float], gamma: float = 1.0) -> float:
    """exp(-gamma * ||x - y||^2), in (0, 1]."""
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    x, y = _check_pair(x, y)
    d = x - y
    return float(np.exp(-gamma * np.dot(d, d)))


def normalized_inner_product_kernel(x: Sequence[float], y: Sequence[float]) -> float:
    """Cosine similarity clamped to [0, 1].

    Negative similarities map to 0 so that every kernel value satisfies the
    0 <= K <= 1 regime the matching builder assumes; the upper clamp only
    absorbs last-ulp rounding of the norm product.
    """
    x, y = _check_pair(x, y)
    nx = float(np.linalg.norm(x))
    ny = float(np.linalg.norm(y))
    if nx == 0.0 or ny == 0.0:
        raise ValueError("normalized inner product undefined for zero vectors")
    return min(1.0, max(0.0, float(np.dot(x, y)) / (nx * ny)))


def make_gaussian_kernel(gamma: float) -> Kernel:
    return lambda x, y: gaussian_kernel(x, y, gamma)


def build_distance_matrix(points: Sequence[Sequence[float]]) -> DistanceMatrix:
    """Pairwise Euclidean distances over one point set."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(len(points), -1)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ValueError("points must be a non-empty list of equal-length vectors")
    d = cdist(pts, pts)
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(entries=np.maximum(d, d.T))


def build_kernel_matrix(points_a: Sequence[Sequence[float]],
                        points_b: Sequence[Sequence[float]] | None,
                        kernel: Kernel) -> KernelMatrix:
    """Apply ``kernel`` to all cross pairs.

    Passing ``points_b=None`` (or the identical list object) marks the result
    symmetric; only the upper triangle is evaluated and mirrored, which both
    halves the work and guarantees exact entry-wise symmetry.
    """
    symmetric = points_b is None or points_b is points_a
    a = [np.asarray(p, dtype=np.float64) for p in points_a]
    b = a if symmetric else [np.asarray(p, dtype=np.float64) for p in points_b]
    out = np.zeros((len(a), len(b)))
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            if symmetric and j < i:
                continue
            try:
                out[i, j] = kernel(x, y)
            except Exception as exc:
                raise ValueError(f"kernel evaluation failed at entry ({i},{j}): {exc}") from exc
            if symmetric:
                out[j, i] = out[i, j]
    return KernelMatrix(entries=out, symmetric=symmetric)
