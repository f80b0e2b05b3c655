"""Keypoint matching compiled to a QUBO over match and slack variables.

Variable layout for matching n left keypoints against m right keypoints with
at most ``k_max`` matches per left keypoint:

    z = (v, s_0, ..., s_{n-1})

``v`` holds the n*m match indicators in row-major order (index i*m + j means
"left i matched to right j"); each slack register ``s_i`` holds
l = ceil(log2(k_max + 1)) bits with weights 2^0 .. 2^{l-1}, turning the
per-row inequality "at most k_max matches" into the equality
``row_count + slack_value == k_max`` inside a squared penalty.

Energy terms, all expanded directly into Q/q:

* linear reward per selected match: (1 - alpha) - K[i, j];
* beta-penalty coupling any two matches that share a right keypoint;
* gamma-penalty expanding sum_i (row_count_i + slack_i - k_max)^2, whose
  constant gamma*n*k_max^2 lives in the offset.

This index arithmetic is the single source of truth for the layout; no
projection matrices are ever materialized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import Kernel, KernelMatrix, build_kernel_matrix
from .qubo import BitstringSample, QuboProblem
from .solvers import SolveResult, SolverConfig, solve


@dataclass(frozen=True)
class MatchingSpec:
    k_max: int = 1
    alpha: float = 0.2
    beta: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if self.k_max < 1:
            raise ValueError("k_max must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.beta < 0 or self.gamma < 0:
            raise ValueError("beta and gamma must be non-negative")

    @property
    def slack_bits(self) -> int:
        """l = ceil(log2(k_max + 1)), the width of each slack register."""
        return math.ceil(math.log2(self.k_max + 1))

    def dimension(self, n: int, m: int) -> int:
        """Total variable count n * (m + l)."""
        return n * (m + self.slack_bits)

    def slack_weights(self) -> np.ndarray:
        return 2 ** np.arange(self.slack_bits)


def _match_index(i: int, j: int, m: int) -> int:
    return i * m + j


def _slack_index(i: int, b: int, n: int, m: int, l: int) -> int:
    return n * m + i * l + b


def build_matching_qubo(kernel_matrix: KernelMatrix, spec: MatchingSpec) -> QuboProblem:
    """Compile an n x m kernel matrix into the matching QUBO."""
    K = kernel_matrix.entries
    if np.any(K < 0) or np.any(K > 1):
        raise ValueError(
            "kernel entries must lie in [0, 1]; the match reward assumes K <= 1 "
            f"(found range [{K.min()}, {K.max()}])"
        )
    n, m = K.shape
    l = spec.slack_bits
    dim = spec.dimension(n, m)
    d = spec.slack_weights().astype(np.float64)
    k = float(spec.k_max)

    Q = np.zeros((dim, dim))
    q = np.zeros(dim)

    for i in range(n):
        vs = [_match_index(i, j, m) for j in range(m)]
        ss = [_slack_index(i, b, n, m, l) for b in range(l)]
        # (row count)^2 couples every pair of match variables in row i.
        for a in vs:
            for b in vs:
                Q[a, b] += spec.gamma
        # (slack value)^2 couples the slack bits with their weights.
        for bi, a in enumerate(ss):
            for bj, b in enumerate(ss):
                Q[a, b] += spec.gamma * d[bi] * d[bj]
        # 2 * (row count) * (slack value) cross terms.
        for a in vs:
            for bi, b in enumerate(ss):
                Q[a, b] += spec.gamma * d[bi]
                Q[b, a] += spec.gamma * d[bi]
        # -2k * (row count + slack value) linear part.
        for j, a in enumerate(vs):
            q[a] += (1.0 - spec.alpha) - K[i, j] - 2.0 * spec.gamma * k
        for bi, a in enumerate(ss):
            q[a] += -2.0 * spec.gamma * k * d[bi]

    # Two matches sharing a right keypoint j: beta per ordered pair, so the
    # energy cost of one duplicate is 2*beta.
    for j in range(m):
        for i1 in range(n):
            for i2 in range(n):
                if i1 != i2:
                    Q[_match_index(i1, j, m), _match_index(i2, j, m)] += spec.beta

    return QuboProblem(Q=Q, q=q, offset=spec.gamma * n * k * k)


@dataclass(frozen=True)
class FeasibilityReport:
    """Constraint check of a decoded matching solution."""

    duplicate_targets: list[int] = field(default_factory=list)
    overfull_sources: list[int] = field(default_factory=list)
    slack_mismatches: list[int] = field(default_factory=list)

    @property
    def no_duplicates(self) -> bool:
        return not self.duplicate_targets

    @property
    def within_budget(self) -> bool:
        return not self.overfull_sources

    @property
    def slack_consistent(self) -> bool:
        return not self.slack_mismatches

    @property
    def feasible(self) -> bool:
        return self.no_duplicates and self.within_budget

    @property
    def violations(self) -> list[str]:
        out = []
        if self.duplicate_targets:
            out.append(f"right keypoints matched more than once: {self.duplicate_targets}")
        if self.overfull_sources:
            out.append(f"left keypoints over their match budget: {self.overfull_sources}")
        if self.slack_mismatches:
            out.append(f"slack registers inconsistent with row counts: {self.slack_mismatches}")
        return out


@dataclass(frozen=True)
class MatchSet:
    """Decoded matches with their kernel values."""

    pairs: list[tuple[int, int]]
    kernel_values: list[float]

    def __len__(self) -> int:
        return len(self.pairs)

    def to_json_obj(self) -> list[dict]:
        return [
            {"i": i, "j": j, "kernel": k}
            for (i, j), k in zip(self.pairs, self.kernel_values)
        ]


def decode_matching(sample: BitstringSample, n: int, m: int, spec: MatchingSpec,
                    kernel_matrix: KernelMatrix | None = None
                    ) -> tuple[MatchSet, FeasibilityReport]:
    """Extract match pairs from a solver sample and check the constraints.

    Infeasibility is reported, never repaired: a duplicate match is
    semantically meaningful damage downstream, unlike a miscounted
    clustering selection.
    """
    l = spec.slack_bits
    if sample.bits.shape[0] != spec.dimension(n, m):
        raise ValueError(
            f"sample has {sample.bits.shape[0]} bits, matching layout needs {spec.dimension(n, m)}"
        )
    v = np.asarray(sample.bits[: n * m]).reshape(n, m)
    weights = spec.slack_weights()

    pairs = [(int(i), int(j)) for i, j in np.argwhere(v == 1)]
    values = [float(kernel_matrix.entries[i, j]) if kernel_matrix is not None else float("nan")
              for i, j in pairs]

    duplicate_targets = [int(j) for j in range(m) if int(v[:, j].sum()) > 1]
    overfull_sources = [int(i) for i in range(n) if int(v[i].sum()) > spec.k_max]
    slack_mismatches = []
    for i in range(n):
        slack_value = int(weights @ sample.bits[n * m + i * l: n * m + (i + 1) * l])
        if int(v[i].sum()) + slack_value != spec.k_max:
            slack_mismatches.append(i)

    report = FeasibilityReport(duplicate_targets=duplicate_targets,
                               overfull_sources=overfull_sources,
                               slack_mismatches=slack_mismatches)
    return MatchSet(pairs=pairs, kernel_values=values), report


@dataclass(frozen=True)
class MatchOutcome:
    matches: MatchSet
    report: FeasibilityReport
    solve_result: SolveResult
    kernel_matrix: KernelMatrix


def match_keypoints(descriptors_a, descriptors_b, kernel: Kernel,
                    spec: MatchingSpec, solver_config: SolverConfig) -> MatchOutcome:
    """Build the cross kernel matrix, compile, solve, and decode."""
    if len(descriptors_a) == 0 or len(descriptors_b) == 0:
        raise ValueError("descriptor lists must be non-empty")
    kernel_matrix = build_kernel_matrix(descriptors_a, descriptors_b, kernel)
    problem = build_matching_qubo(kernel_matrix, spec)
    result = solve(problem, solver_config)
    matches, report = decode_matching(result.best, len(descriptors_a), len(descriptors_b),
                                      spec, kernel_matrix)
    return MatchOutcome(matches=matches, report=report, solve_result=result,
                        kernel_matrix=kernel_matrix)
