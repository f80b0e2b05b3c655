"""Keypoint extraction as clustering, compiled to QUBO form.

Two formulations over a set of n points, both with one binary variable per
point (1 = selected as a centroid):

* medoid selection balances picking mutually far-apart points against
  picking centrally located ones, with a squared cardinality penalty;
* kernel-density selection matches the mean feature embedding of the
  selected points to that of the full set, preferring dense regions.

Both builders keep the penalty constant (gamma*k^2 resp. lambda*k^2) in the
problem offset so reported energies are the full penalized objectives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import DistanceMatrix, Kernel, KernelMatrix, build_distance_matrix, build_kernel_matrix
from .qubo import BitstringSample, QuboProblem, evaluate_energy
from .solvers import SolverConfig, solve


@dataclass(frozen=True)
class ClusteringSpec:
    """Number of centroids plus penalty multipliers.

    Unset multipliers resolve to the scale-balancing defaults
    alpha = 1/k, beta = 1/n, gamma = 1/k, lam = 1/k^2 at build time
    (n = number of points).
    """

    k: int
    alpha: float | None = None
    beta: float | None = None
    gamma: float | None = None
    lam: float | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        for name in ("alpha", "beta", "gamma", "lam"):
            v = getattr(self, name)
            if v is not None and (not np.isfinite(v) or v < 0):
                raise ValueError(f"{name} must be a finite non-negative real, got {v}")

    def resolved(self, n: int) -> "ClusteringSpec":
        """Fill unset multipliers with the defaults for an n-point problem."""
        if self.k > n:
            raise ValueError(f"k={self.k} exceeds number of points n={n}")
        return ClusteringSpec(
            k=self.k,
            alpha=1.0 / self.k if self.alpha is None else self.alpha,
            beta=1.0 / n if self.beta is None else self.beta,
            gamma=1.0 / self.k if self.gamma is None else self.gamma,
            lam=1.0 / self.k**2 if self.lam is None else self.lam,
        )


def build_kmedoids_qubo(distances: DistanceMatrix, spec: ClusteringSpec) -> QuboProblem:
    """Medoid-selection QUBO over a distance matrix.

    Q = gamma * ones - alpha * D, q = beta * D.1 - 2*gamma*k, offset = gamma*k^2,
    so the cardinality penalty gamma * (sum(z) - k)^2 is represented exactly.
    """
    n = distances.n
    s = spec.resolved(n)
    ones = np.ones((n, n))
    Q = s.gamma * ones - s.alpha * distances.entries
    q = s.beta * (distances.entries @ np.ones(n)) - 2.0 * s.gamma * s.k * np.ones(n)
    return QuboProblem(Q=Q, q=q, offset=s.gamma * s.k**2)


def build_kdc_qubo(kernel_matrix: KernelMatrix, spec: ClusteringSpec) -> QuboProblem:
    """Density-matching QUBO over a symmetric kernel matrix.

    Q = (1/k^2) K + lam * ones, q = -2 ((1/(k n)) K.1 + lam * k),
    offset = lam * k^2; n is the point count.
    """
    if not kernel_matrix.symmetric:
        raise ValueError("density clustering requires a symmetric single-point-set kernel matrix")
    n = kernel_matrix.n
    s = spec.resolved(n)
    K = kernel_matrix.entries
    Q = K / s.k**2 + s.lam * np.ones((n, n))
    q = -2.0 * ((K @ np.ones(n)) / (s.k * n) + s.lam * s.k * np.ones(n))
    return QuboProblem(Q=Q, q=q, offset=s.lam * s.k**2)


def decode_selection(sample: BitstringSample) -> list[int]:
    """Indices of set bits, ascending."""
    return [int(i) for i in np.flatnonzero(sample.bits)]


@dataclass(frozen=True)
class SelectionResult:
    indices: list[int]
    repaired: bool
    sample: BitstringSample

    def to_json_obj(self, points) -> list[dict]:
        """Selected points as {index, x, y}; callers add provenance fields."""
        return [
            {"index": i, "x": float(points[i][0]), "y": float(points[i][1])}
            for i in self.indices
        ]


def repair_selection(problem: QuboProblem, bits: np.ndarray, k: int) -> np.ndarray:
    """Force a selection to exactly k set bits by greedy marginal-energy flips.

    Oversized selections drop the set bit whose removal improves the energy
    most; undersized ones add the unset bit with the best marginal decrease.
    Ties go to the lowest index, making the repair deterministic.
    """
    z = np.array(bits, dtype=np.float64)
    Q, q = problem.Q, problem.q
    diag = np.diag(Q)
    row = Q @ z  # row[i] = sum_j Q[i, j] z[j], updated incrementally per flip
    while int(z.sum()) != k:
        too_many = z.sum() > k
        delta_sign = 1.0 - 2.0 * z
        deltas = delta_sign * (diag + 2.0 * (row - diag * z) + q)
        deltas[z == (0.0 if too_many else 1.0)] = np.inf
        i = int(np.argmin(deltas))
        row += delta_sign[i] * Q[:, i]
        z[i] = 1.0 - z[i]
    return z.astype(np.int8)


def extract_keypoints(points, method: str, kernel: Kernel | None,
                      spec: ClusteringSpec, solver_config: SolverConfig) -> SelectionResult:
    """Cluster a point set and return the selected indices.

    Builds the distance or kernel matrix, compiles the QUBO, solves it with
    the configured solver, and decodes.  A solution with the wrong number of
    set bits is repaired to exactly k and flagged.
    """
    n = len(points)
    if spec.k > n:
        raise ValueError(f"k={spec.k} exceeds number of points n={n}")
    if method == "kmedoids":
        problem = build_kmedoids_qubo(build_distance_matrix(points), spec)
    elif method == "kdc":
        if kernel is None:
            raise ValueError("kdc extraction requires a kernel function")
        problem = build_kdc_qubo(build_kernel_matrix(points, None, kernel), spec)
    else:
        raise ValueError(f"unknown extraction method {method!r}, expected 'kmedoids' or 'kdc'")

    result = solve(problem, solver_config)
    sample = result.best
    repaired = False
    if int(sample.bits.sum()) != spec.k:
        bits = repair_selection(problem, sample.bits, spec.k)
        sample = BitstringSample(bits=bits, energy=evaluate_energy(problem, bits),
                                 shot_index=sample.shot_index,
                                 solver_id=sample.solver_id + "+repair")
        repaired = True
    return SelectionResult(indices=decode_selection(sample), repaired=repaired, sample=sample)
