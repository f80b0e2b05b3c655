"""Classical QUBO solvers and the multi-shot harness.

Three solver kinds share one result shape:

* ``exhaustive`` - full enumeration, the correctness oracle for everything
  else (refuses dimensions above 24).
* ``simulated_annealing`` - per-shot Metropolis chains with single-bit-flip
  proposals and a geometric temperature schedule.
* ``tabu`` - steepest-descent bit-flip search with a recency tabu list and
  an aspiration rule.

Every stochastic shot is an independent chain seeded with ``seed XOR shot``,
so results are reproducible given (problem, config).  A run keeps all shot
samples and reports the lowest-energy one as ``best``, mirroring the
submit-many-reads-keep-the-minimum protocol of annealing hardware.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from numba import njit

from .qubo import BitstringSample, QuboProblem, _energy_scalar, _enumerate_argmin, bits_from_index

MAX_EXHAUSTIVE_BITS = 24

SOLVER_KINDS = ("exhaustive", "simulated_annealing", "tabu")


class SolverError(RuntimeError):
    """Raised when a solver refuses or fails an instance."""


@dataclass(frozen=True)
class SolverConfig:
    solver_kind: str = "simulated_annealing"
    shots: int = 10
    seed: int = 0
    sa_sweeps: int = 1000
    sa_temp_initial: float = 10.0
    sa_temp_final: float = 0.05
    tabu_tenure: int = 10
    tabu_iterations: int = 100

    def __post_init__(self):
        if self.solver_kind not in SOLVER_KINDS:
            raise ValueError(f"unknown solver_kind {self.solver_kind!r}, expected one of {SOLVER_KINDS}")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if not (self.sa_temp_initial > self.sa_temp_final > 0):
            raise ValueError(
                f"temperature schedule must satisfy initial > final > 0, "
                f"got {self.sa_temp_initial} -> {self.sa_temp_final}"
            )
        if self.sa_sweeps < 1 or self.tabu_tenure < 1 or self.tabu_iterations < 1:
            raise ValueError("sweep/tenure/iteration counts must be positive")

    def to_dict(self) -> dict:
        return {
            "solver_kind": self.solver_kind,
            "shots": self.shots,
            "seed": self.seed,
            "sa_sweeps": self.sa_sweeps,
            "sa_temp_initial": self.sa_temp_initial,
            "sa_temp_final": self.sa_temp_final,
            "tabu_tenure": self.tabu_tenure,
            "tabu_iterations": self.tabu_iterations,
        }


# Named presets.  "digital" stands in for proprietary digital-annealer
# appliances: same algorithm, generous sweep budget.  "sa_short" is the
# deliberately under-budgeted baseline used in solver comparisons.
SOLVER_PRESETS: dict[str, SolverConfig] = {
    "exhaustive": SolverConfig(solver_kind="exhaustive", shots=1),
    "sa": SolverConfig(solver_kind="simulated_annealing"),
    "digital": SolverConfig(solver_kind="simulated_annealing", sa_sweeps=10000, shots=10),
    "sa_short": SolverConfig(solver_kind="simulated_annealing", sa_sweeps=20, shots=10),
    "tabu": SolverConfig(solver_kind="tabu"),
}


def preset(name: str, **overrides) -> SolverConfig:
    """Look up a named preset, optionally overriding fields."""
    try:
        base = SOLVER_PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown solver preset {name!r}, expected one of {sorted(SOLVER_PRESETS)}")
    return replace(base, **overrides) if overrides else base


@dataclass(frozen=True)
class SolveResult:
    best: BitstringSample
    all_samples: list[BitstringSample] = field(default_factory=list)
    shot_seconds: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "best": self.best.to_dict(),
            "samples": [s.to_dict() for s in self.all_samples],
            "shot_seconds": self.shot_seconds,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _mix_seed(seed: int, shot: int) -> int:
    # splitmix64 step folds the 64-bit (seed XOR shot) contract value into
    # the 32-bit range the underlying generator accepts.
    x = (int(seed) ^ int(shot)) & 0xFFFFFFFFFFFFFFFF
    x = (x + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return (x ^ (x >> 31)) & 0xFFFFFFFF


@njit(cache=True, nogil=True)
def _sa_chain(Q, q, sweeps, t_initial, t_final, seed):
    n = Q.shape[0]
    np.random.seed(seed)
    z = np.empty(n, dtype=np.int8)
    for i in range(n):
        z[i] = 1 if np.random.random() < 0.5 else 0

    # s[j] = sum_k Q[j, k] * z[k], maintained incrementally so a bit-flip
    # energy delta costs O(n) instead of a full re-evaluation.
    s = np.zeros(n)
    for j in range(n):
        acc = 0.0
        for k in range(n):
            if z[k] != 0:
                acc += Q[j, k]
        s[j] = acc

    energy = 0.0
    for i in range(n):
        if z[i] != 0:
            energy += q[i] + s[i]

    best = z.copy()
    best_energy = energy
    ratio = 1.0 if sweeps == 1 else (t_final / t_initial) ** (1.0 / (sweeps - 1))
    temp = t_initial
    for _ in range(sweeps):
        for i in range(n):
            delta = 1.0 - 2.0 * z[i]
            d_energy = delta * (Q[i, i] + 2.0 * (s[i] - Q[i, i] * z[i]) + q[i])
            if d_energy < 0.0 or np.random.random() < np.exp(-d_energy / temp):
                z[i] = 1 - z[i]
                energy += d_energy
                for j in range(n):
                    s[j] += delta * Q[j, i]
                if energy < best_energy:
                    best_energy = energy
                    best[:] = z
        temp *= ratio
    return best


@njit(cache=True, nogil=True)
def _tabu_chain(Q, q, offset, tenure, max_stale, seed):
    n = Q.shape[0]
    np.random.seed(seed)
    z = np.empty(n, dtype=np.int8)
    for i in range(n):
        z[i] = 1 if np.random.random() < 0.5 else 0

    s = np.zeros(n)
    for j in range(n):
        acc = 0.0
        for k in range(n):
            if z[k] != 0:
                acc += Q[j, k]
        s[j] = acc

    energy = _energy_scalar(Q, q, offset, z)
    best = z.copy()
    best_energy = energy
    tabu_until = np.full(n, -1, dtype=np.int64)
    stale = 0
    step = 0
    while stale < max_stale:
        chosen = -1
        chosen_delta = 0.0
        fallback = -1
        fallback_delta = 0.0
        for i in range(n):
            delta = 1.0 - 2.0 * z[i]
            d_energy = delta * (Q[i, i] + 2.0 * (s[i] - Q[i, i] * z[i]) + q[i])
            if fallback < 0 or d_energy < fallback_delta:
                fallback = i
                fallback_delta = d_energy
            # Aspiration: a tabu move is allowed when it beats the best so far.
            allowed = step >= tabu_until[i] or energy + d_energy < best_energy
            if allowed and (chosen < 0 or d_energy < chosen_delta):
                chosen = i
                chosen_delta = d_energy
        if chosen < 0:
            chosen = fallback
            chosen_delta = fallback_delta
        delta = 1.0 - 2.0 * z[chosen]
        z[chosen] = 1 - z[chosen]
        energy += chosen_delta
        for j in range(n):
            s[j] += delta * Q[j, chosen]
        tabu_until[chosen] = step + tenure
        if energy < best_energy:
            # Re-derive the exact energy before counting an improvement, so
            # incremental-update drift can never feign progress and stall
            # termination on ulp-sized "gains".
            energy = _energy_scalar(Q, q, offset, z)
            if energy < best_energy:
                best_energy = energy
                best[:] = z
                stale = 0
            else:
                stale += 1
        else:
            stale += 1
        step += 1
    return best


def solve_exhaustive(problem: QuboProblem, config: SolverConfig | None = None) -> SolveResult:
    """Global optimum by enumeration; ties go to the smallest encoded integer."""
    if problem.dim > MAX_EXHAUSTIVE_BITS:
        raise SolverError(
            f"dim {problem.dim} exceeds exhaustive-enumeration limit {MAX_EXHAUSTIVE_BITS}"
        )
    start = time.perf_counter()
    best_idx, _ = _enumerate_argmin(problem.Q, problem.q, problem.offset)
    bits = bits_from_index(best_idx, problem.dim)
    energy = float(_energy_scalar(problem.Q, problem.q, problem.offset, bits))
    sample = BitstringSample(bits=bits, energy=energy, shot_index=0, solver_id="exhaustive")
    return SolveResult(best=sample, all_samples=[sample],
                       shot_seconds=[time.perf_counter() - start])


def _run_shots(problem: QuboProblem, config: SolverConfig, solver_id: str,
               chain: Callable[[int], np.ndarray]) -> SolveResult:
    samples = []
    times = []
    for shot in range(config.shots):
        start = time.perf_counter()
        bits = chain(_mix_seed(config.seed, shot))
        times.append(time.perf_counter() - start)
        energy = float(_energy_scalar(problem.Q, problem.q, problem.offset, bits))
        samples.append(BitstringSample(bits=bits, energy=energy,
                                       shot_index=shot, solver_id=solver_id))
    best = min(samples, key=lambda s: s.energy)
    return SolveResult(best=best, all_samples=samples, shot_seconds=times)


def solve_simulated_annealing(problem: QuboProblem, config: SolverConfig) -> SolveResult:
    """Multi-shot Metropolis annealing with a geometric cooling schedule."""
    return _run_shots(
        problem, config, "simulated_annealing",
        lambda seed: _sa_chain(problem.Q, problem.q, config.sa_sweeps,
                               config.sa_temp_initial, config.sa_temp_final, seed),
    )


def solve_tabu(problem: QuboProblem, config: SolverConfig) -> SolveResult:
    """Multi-shot tabu search; each shot stops after a run of non-improving moves."""
    return _run_shots(
        problem, config, "tabu",
        lambda seed: _tabu_chain(problem.Q, problem.q, problem.offset,
                                 config.tabu_tenure, config.tabu_iterations, seed),
    )


def solve(problem: QuboProblem, config: SolverConfig) -> SolveResult:
    """Dispatch on ``config.solver_kind``."""
    if config.solver_kind == "exhaustive":
        return solve_exhaustive(problem, config)
    if config.solver_kind == "simulated_annealing":
        return solve_simulated_annealing(problem, config)
    return solve_tabu(problem, config)
