"""Exact statevector simulation of the data-encoding kernel circuit.

The kernel circuit alternates full Hadamard layers with diagonal phase
unitaries whose angles are data-dependent.  Operator order convention: the
encoding evolution applies, in time order, a Hadamard layer, a phase layer,
a second Hadamard layer, and a second phase layer (as an operator product it
reads ``U . H . U . H`` acting on the all-zeros state, rightmost factor
first).  The kernel value of two data vectors is the squared overlap of
their encoded states.

The phase unitaries are generated purely by sigma_z products, so they are
diagonal in the computational basis and are applied as per-amplitude phase
multiplication rather than as gate matrices.  On 2-qubit-gate hardware each
pair phase would transpile to a CNOT-Rz-CNOT sandwich; that decomposition is
documentation only, the numerics never materialize gates.

Indexing is little-endian throughout: qubit ``i`` is bit ``(index >> i) & 1``
of an amplitude index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

MAX_QUBITS = 20

_INV_SQRT2 = 1.0 / np.sqrt(2.0)


def default_phi_single(x: np.ndarray, i: int) -> float:
    """Default single-qubit feature angle: the i-th data component."""
    return float(x[i])


def default_phi_pair(x: np.ndarray, i: int, j: int) -> float:
    """Default pair feature angle: (pi - x_i) * (pi - x_j)."""
    return float((np.pi - x[i]) * (np.pi - x[j]))


def all_pairs(num_qubits: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, j) for i in range(num_qubits) for j in range(i + 1, num_qubits))


@dataclass(frozen=True)
class FeatureMapSpec:
    """Configuration of the data-encoding phase layer.

    Only singleton and pair generators are permitted (deeper products would
    transpile to prohibitively deep circuits on near-term hardware).  Inputs
    are rescaled as ``x <- input_scale * x`` before any feature function is
    evaluated.
    """

    num_qubits: int
    pair_set: tuple[tuple[int, int], ...] | None = None
    phi_single: Callable[[np.ndarray, int], float] = default_phi_single
    phi_pair: Callable[[np.ndarray, int, int], float] = default_phi_pair
    input_scale: float = 1.0

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be positive")
        if self.input_scale < 0:
            raise ValueError("input_scale must be non-negative")
        pairs = all_pairs(self.num_qubits) if self.pair_set is None else tuple(
            (int(i), int(j)) for i, j in self.pair_set
        )
        seen = set()
        for i, j in pairs:
            if i == j:
                raise ValueError(f"pair ({i},{j}) is not a two-qubit subset")
            if not (0 <= i < self.num_qubits and 0 <= j < self.num_qubits):
                raise ValueError(f"pair ({i},{j}) out of range for {self.num_qubits} qubits")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate pair ({i},{j})")
            seen.add(key)
        object.__setattr__(self, "pair_set", pairs)

    def phase_angles(self, x: Sequence[float]) -> np.ndarray:
        """Total phase angle theta(b) for every basis index b."""
        scaled = self.input_scale * np.asarray(x, dtype=np.float64)
        dim = 1 << self.num_qubits
        idx = np.arange(dim)
        # sign_i = (-1)^{b_i}, the sigma_z eigenvalue on qubit i.
        signs = 1.0 - 2.0 * ((idx[:, None] >> np.arange(self.num_qubits)) & 1)
        theta = np.zeros(dim)
        for i in range(self.num_qubits):
            theta += self.phi_single(scaled, i) * signs[:, i]
        for i, j in self.pair_set:
            theta += self.phi_pair(scaled, i, j) * signs[:, i] * signs[:, j]
        return theta


@dataclass(frozen=True)
class Statevector:
    """Normalized complex amplitude vector over 2^n basis states."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=np.complex128)
        if amp.ndim != 1 or amp.shape[0] & (amp.shape[0] - 1) != 0 or amp.shape[0] == 0:
            raise ValueError(f"amplitude vector length {amp.shape} is not a power of two")
        norm = float(np.vdot(amp, amp).real)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"statevector not normalized: |amp|^2 = {norm}")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def num_qubits(self) -> int:
        return self.amplitudes.shape[0].bit_length() - 1

    @classmethod
    def zero(cls, num_qubits: int) -> "Statevector":
        amp = np.zeros(1 << num_qubits, dtype=np.complex128)
        amp[0] = 1.0
        return cls(amp)

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> "Statevector":
        amp = np.zeros(1 << num_qubits, dtype=np.complex128)
        amp[index] = 1.0
        return cls(amp)


def _hadamard_all(amp: np.ndarray, num_qubits: int) -> np.ndarray:
    """Hadamard on every qubit (normalized Walsh-Hadamard butterfly)."""
    out = amp.copy()
    for qubit in range(num_qubits):
        view = out.reshape(-1, 2, 1 << qubit)
        lo = view[:, 0, :].copy()
        hi = view[:, 1, :].copy()
        view[:, 0, :] = (lo + hi) * _INV_SQRT2
        view[:, 1, :] = (lo - hi) * _INV_SQRT2
    return out


def apply_feature_unitary(state: Statevector, x: Sequence[float], spec: FeatureMapSpec,
                          conjugate: bool = False) -> Statevector:
    """Apply the diagonal data-encoding phase layer (or its adjoint)."""
    if state.num_qubits != spec.num_qubits:
        raise ValueError(
            f"dimension mismatch: state has {state.num_qubits} qubits, spec expects {spec.num_qubits}"
        )
    theta = spec.phase_angles(x)
    phases = np.exp(1j * theta) if conjugate else np.exp(-1j * theta)
    return Statevector(state.amplitudes * phases)


def encode_state(x: Sequence[float], spec: FeatureMapSpec) -> Statevector:
    """Full encoding evolution applied to |0...0>: H, phases, H, phases."""
    state = _hadamard_all(Statevector.zero(spec.num_qubits).amplitudes, spec.num_qubits)
    state = state * np.exp(-1j * spec.phase_angles(x))
    state = _hadamard_all(state, spec.num_qubits)
    state = state * np.exp(-1j * spec.phase_angles(x))
    return Statevector(state)


def sample_counts(state: Statevector, shots: int, seed: int = 0) -> np.ndarray:
    """Sample basis-state outcomes by inverse CDF over the exact distribution."""
    probs = np.abs(state.amplitudes) ** 2
    cdf = np.cumsum(probs)
    cdf[-1] = max(cdf[-1], 1.0)
    rng = np.random.default_rng(seed)
    outcomes = np.searchsorted(cdf, rng.random(shots), side="right")
    return np.bincount(outcomes, minlength=probs.shape[0])


def _normalized_overlap(psi_x: Statevector, psi_y: Statevector) -> float:
    # Dividing out the state norms cancels accumulated rounding drift, so
    # identical inputs give exactly 1.0; the min() guards the <= 1 contract
    # against a final ulp of the quotient.
    overlap = np.vdot(psi_y.amplitudes, psi_x.amplitudes)
    norm_x = np.vdot(psi_x.amplitudes, psi_x.amplitudes).real
    norm_y = np.vdot(psi_y.amplitudes, psi_y.amplitudes).real
    return min(1.0, float((overlap.real**2 + overlap.imag**2) / (norm_x * norm_y)))


def quantum_kernel_value(x: Sequence[float], y: Sequence[float], spec: FeatureMapSpec,
                         shots: int | str = "exact", seed: int = 0) -> float:
    """Squared overlap of the encoded states of ``x`` and ``y``.

    Exact mode computes |<psi_y|psi_x>|^2 with both state norms divided out,
    which cancels accumulated rounding drift: identical inputs give exactly
    1.0.  Shot mode prepares the composed circuit state (encode ``x``, then
    the adjoint encoding of ``y``) and returns the fraction of all-zeros
    outcomes among ``shots`` seeded samples.
    """
    if spec.num_qubits > MAX_QUBITS:
        raise ValueError(f"{spec.num_qubits} qubits exceeds statevector limit {MAX_QUBITS}")
    psi_x = encode_state(x, spec)
    if shots == "exact":
        psi_y = encode_state(y, spec)
        return _normalized_overlap(psi_x, psi_y)
    shots = int(shots)
    if shots < 1:
        raise ValueError("shots must be >= 1 or 'exact'")
    # Undo the encoding of y on the encoded x: adjoint layers in reverse order.
    amp = psi_x.amplitudes * np.exp(1j * spec.phase_angles(y))
    amp = _hadamard_all(amp, spec.num_qubits)
    amp = amp * np.exp(1j * spec.phase_angles(y))
    amp = _hadamard_all(amp, spec.num_qubits)
    counts = sample_counts(Statevector(amp), shots, seed=seed)
    return float(counts[0] / shots)


def make_quantum_kernel(spec: FeatureMapSpec, shots: int | str = "exact", seed: int = 0):
    """Kernel handle for the matrix builder, with per-point state caching."""
    cache: dict[bytes, Statevector] = {}

    def encoded(v: np.ndarray) -> Statevector:
        key = v.tobytes()
        if key not in cache:
            cache[key] = encode_state(v, spec)
        return cache[key]

    if shots == "exact":
        def kernel(x, y):
            psi_x = encoded(np.asarray(x, dtype=np.float64))
            psi_y = encoded(np.asarray(y, dtype=np.float64))
            return _normalized_overlap(psi_x, psi_y)
        return kernel

    def sampled_kernel(x, y):
        return quantum_kernel_value(x, y, spec, shots=shots, seed=seed)

    return sampled_kernel


def _apply_mcx(amp: np.ndarray, target: int, positive: Sequence[int],
               negative: Sequence[int]) -> None:
    """In-place multi-controlled X with positive and negative controls."""
    idx = np.arange(amp.shape[0])
    mask = np.ones(amp.shape[0], dtype=bool)
    for c in positive:
        mask &= (idx >> c) & 1 == 1
    for c in negative:
        mask &= (idx >> c) & 1 == 0
    lower = mask & ((idx >> target) & 1 == 0)
    src = idx[lower]
    dst = src | (1 << target)
    amp[src], amp[dst] = amp[dst].copy(), amp[src].copy()


def increment_register(state: Statevector, register_qubits: Sequence[int]) -> Statevector:
    """Map the register's encoded integer q to (q+1) mod 2^len(register).

    Realized by the carry-cascade of controlled NOTs with one work qubit
    initialized to |1> and disentangled again at the end; qubits outside the
    register are untouched.  ``register_qubits[0]`` is the least significant
    bit of q.
    """
    n = state.num_qubits
    regs = list(register_qubits)
    if len(set(regs)) != len(regs):
        raise ValueError("register qubits must be distinct")
    for r in regs:
        if not 0 <= r < n:
            raise ValueError(f"register qubit {r} out of range for {n}-qubit state")
    if n + 1 > MAX_QUBITS + 1:
        raise ValueError(f"register increment needs {n + 1} qubits, limit is {MAX_QUBITS + 1}")

    anc = n
    ext = np.zeros(1 << (n + 1), dtype=np.complex128)
    ext[(1 << n):] = state.amplitudes  # work qubit starts in |1>

    m = len(regs)
    for j in range(m):
        _apply_mcx(ext, regs[j], positive=[anc], negative=[])
        if j < m - 1:
            _apply_mcx(ext, anc, positive=[regs[j]], negative=regs[:j])
    _apply_mcx(ext, anc, positive=[], negative=regs[: m - 1])

    # The cascade always leaves the work qubit in |0>.
    residue = float(np.vdot(ext[(1 << n):], ext[(1 << n):]).real)
    if residue > 1e-20:
        raise AssertionError(f"work qubit failed to disentangle (residual {residue})")
    return Statevector(ext[: (1 << n)])


def swap_test_probability(x_state: Statevector, y_state: Statevector) -> float:
    """Ancilla-0 probability of the swap test: 1/2 + 1/2 |<x|y>|^2.

    Simulated on the full (1 + 2n)-qubit circuit: Hadamard on the ancilla,
    one controlled swap per register qubit pair, Hadamard, then the exact
    ancilla measurement probability.
    """
    n = x_state.num_qubits
    if y_state.num_qubits != n:
        raise ValueError(
            f"dimension mismatch: {n} vs {y_state.num_qubits} register qubits"
        )
    total = 1 + 2 * n
    if total > MAX_QUBITS + 1:
        raise ValueError(f"swap test needs {total} qubits, limit is {MAX_QUBITS + 1}")

    # Ancilla is qubit 0, x occupies qubits 1..n, y occupies n+1..2n.
    amp = np.zeros(1 << total, dtype=np.complex128)
    xy = np.kron(y_state.amplitudes, x_state.amplitudes)  # index = ix + (iy << n)
    amp[0::2] = xy

    full = amp.reshape(-1, 2)
    lo = full[:, 0].copy()
    hi = full[:, 1].copy()
    full[:, 0] = (lo + hi) * _INV_SQRT2
    full[:, 1] = (lo - hi) * _INV_SQRT2

    idx = np.arange(1 << total)
    controlled = idx & 1 == 1
    x_bits = (idx >> 1) & ((1 << n) - 1)
    y_bits = (idx >> (1 + n)) & ((1 << n) - 1)
    swapped = 1 | (y_bits << 1) | (x_bits << (1 + n))
    permuted = amp.copy()
    permuted[swapped[controlled]] = amp[idx[controlled]]
    amp = permuted

    full = amp.reshape(-1, 2)
    lo = full[:, 0].copy()
    hi = full[:, 1].copy()
    full[:, 0] = (lo + hi) * _INV_SQRT2
    full[:, 1] = (lo - hi) * _INV_SQRT2

    p0 = np.vdot(amp[0::2], amp[0::2]).real
    return float(p0)
