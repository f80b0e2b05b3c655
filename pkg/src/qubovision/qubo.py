"""QUBO problem representation, energy evaluation, and the diagonal-Hamiltonian view.

A QUBO instance asks for the binary vector ``z`` minimizing

    F(z) = z^T Q z + <q, z> + offset

with ``Q`` symmetric.  Because the corresponding Ising-style Hamiltonian is
built solely from sigma_z and identity factors, it is diagonal in the
computational basis; :func:`hamiltonian_diagonal` materializes that diagonal
so small instances can be checked spectrally against any solver.

Bit-order convention used throughout the package: bit ``i`` of an integer
index is ``(index >> i) & 1``, i.e. ``bits[0]`` is the least significant bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

SYMMETRY_TOL = 1e-12

#: Memory guard for materializing a 2^N Hamiltonian diagonal.
MAX_DIAGONAL_QUBITS = 20


@njit(cache=True, nogil=True)
def _energy_scalar(Q: np.ndarray, q: np.ndarray, offset: float, z: np.ndarray) -> float:
    # Single source of truth for F(z).  All enumeration and solver code paths
    # call this exact routine so that energies are bit-for-bit reproducible.
    n = Q.shape[0]
    acc = offset
    for i in range(n):
        if z[i] != 0:
            row = 0.0
            for j in range(n):
                if z[j] != 0:
                    row += Q[i, j]
            acc += q[i] + row
    return acc


@njit(cache=True, nogil=True)
def _enumerate_diagonal(Q: np.ndarray, q: np.ndarray, offset: float) -> np.ndarray:
    n = Q.shape[0]
    out = np.empty(2**n)
    z = np.zeros(n, dtype=np.int8)
    for idx in range(2**n):
        for b in range(n):
            z[b] = (idx >> b) & 1
        out[idx] = _energy_scalar(Q, q, offset, z)
    return out


@njit(cache=True, nogil=True)
def _enumerate_argmin(Q: np.ndarray, q: np.ndarray, offset: float) -> tuple:
    # Streaming argmin over all 2^n states; strict < keeps the smallest index
    # on ties, which is the documented deterministic tie-break.
    n = Q.shape[0]
    z = np.zeros(n, dtype=np.int8)
    best_idx = 0
    best_energy = _energy_scalar(Q, q, offset, z)
    for idx in range(1, 2**n):
        for b in range(n):
            z[b] = (idx >> b) & 1
        e = _energy_scalar(Q, q, offset, z)
        if e < best_energy:
            best_energy = e
            best_idx = idx
    return best_idx, best_energy


def bits_from_index(index: int, dim: int) -> np.ndarray:
    """Binary vector for an integer index (bit i = (index >> i) & 1)."""
    return np.array([(index >> b) & 1 for b in range(dim)], dtype=np.int8)


def index_from_bits(bits: Sequence[int]) -> int:
    """Integer value of a bit vector under the package-wide bit order."""
    return int(sum(int(b) << i for i, b in enumerate(bits)))


@dataclass(frozen=True)
class QuboProblem:
    """Immutable QUBO instance.

    Attributes
    ----------
    Q : np.ndarray
        Symmetric (N, N) coefficient matrix.  Constructors symmetrize their
        input as (Q + Q^T)/2 before storing, which never changes energies.
    q : np.ndarray
        Linear coefficient vector of length N.
    offset : float
        Constant term.  Excluded from the argmin but tracked so that energies
        of penalty formulations stay comparable across problem builders.
    """

    Q: np.ndarray
    q: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=np.float64)
        q = np.asarray(self.q, dtype=np.float64)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ValueError(f"Q must be square, got shape {Q.shape}")
        if q.ndim != 1 or q.shape[0] != Q.shape[0]:
            raise ValueError(
                f"dimension mismatch: Q is {Q.shape[0]}x{Q.shape[1]} but q has length {q.shape[0]}"
            )
        if not (np.all(np.isfinite(Q)) and np.all(np.isfinite(q)) and np.isfinite(self.offset)):
            raise ValueError("QUBO coefficients must be finite")
        sym = (Q + Q.T) / 2.0
        if np.max(np.abs(Q - sym), initial=0.0) > SYMMETRY_TOL:
            Q = sym
        Q.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self) -> int:
        return self.Q.shape[0]

    def to_json(self) -> str:
        """Lossless JSON form: {"dim": N, "Q": [[...]], "q": [...], "offset": x}."""
        return json.dumps(
            {
                "dim": self.dim,
                "Q": self.Q.tolist(),
                "q": self.q.tolist(),
                "offset": self.offset,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "QuboProblem":
        data = json.loads(text)
        problem = cls(Q=np.array(data["Q"], dtype=np.float64),
                      q=np.array(data["q"], dtype=np.float64),
                      offset=float(data.get("offset", 0.0)))
        if "dim" in data and int(data["dim"]) != problem.dim:
            raise ValueError(
                f"declared dim {data['dim']} does not match matrix dimension {problem.dim}"
            )
        return problem


@dataclass(frozen=True)
class BitstringSample:
    """One solver readout: a binary assignment with its exact energy."""

    bits: np.ndarray
    energy: float
    shot_index: int = 0
    solver_id: str = ""

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.int8)
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    def to_dict(self) -> dict:
        return {
            "bits": [int(b) for b in self.bits],
            "energy": self.energy,
            "shot_index": self.shot_index,
            "solver_id": self.solver_id,
        }


def _check_bits(problem: QuboProblem, bits: Sequence[int]) -> np.ndarray:
    z = np.asarray(bits)
    if z.ndim != 1 or z.shape[0] != problem.dim:
        raise ValueError(
            f"dimension mismatch: problem has dim {problem.dim}, bit vector has length "
            f"{z.shape[0] if z.ndim == 1 else z.shape}"
        )
    return z.astype(np.int8)


def evaluate_energy(problem: QuboProblem, bits: Sequence[int]) -> float:
    """Exact energy F(bits) = bits^T Q bits + q . bits + offset."""
    z = _check_bits(problem, bits)
    return float(_energy_scalar(problem.Q, problem.q, problem.offset, z))


def hamiltonian_diagonal(problem: QuboProblem) -> np.ndarray:
    """Diagonal of the sigma_z-product Hamiltonian equivalent to the QUBO.

    Entry ``i`` equals ``evaluate_energy`` on the bit vector encoding ``i``
    (least-significant bit first), so the minimum entry is the QUBO optimum
    and its argmin index encodes the optimal assignment.  Refuses dimensions
    above ``MAX_DIAGONAL_QUBITS`` to guard against memory blowup.
    """
    if problem.dim > MAX_DIAGONAL_QUBITS:
        raise ValueError(
            f"dim {problem.dim} exceeds diagonal materialization limit {MAX_DIAGONAL_QUBITS}"
        )
    return _enumerate_diagonal(problem.Q, problem.q, problem.offset)
