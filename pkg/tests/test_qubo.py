import json

import numpy as np
import pytest

from qubovision.qubo import (BitstringSample, QuboProblem, bits_from_index, evaluate_energy,
                             hamiltonian_diagonal, index_from_bits)

from conftest import brute_force_energies, random_problem


class TestEvaluateEnergy:
    def test_all_zeros_returns_offset(self):
        rng = np.random.default_rng(1)
        problem = random_problem(rng, 5, offset=3.25)
        assert evaluate_energy(problem, np.zeros(5)) == 3.25

    def test_direct_expansion(self):
        problem = QuboProblem(Q=[[1, 2], [2, 1]], q=[-1, -1])
        assert evaluate_energy(problem, [1, 1]) == 4.0  # 1+2+2+1-2

    def test_single_active_bit_on_diagonal_problem(self):
        d = np.array([2.0, -3.0, 0.5])
        q = np.array([0.1, 0.2, 0.3])
        problem = QuboProblem(Q=np.diag(d), q=q, offset=1.5)
        for i in range(3):
            e = np.zeros(3)
            e[i] = 1
            assert evaluate_energy(problem, e) == d[i] + q[i] + 1.5

    def test_dimension_mismatch_names_both(self):
        problem = QuboProblem(Q=np.zeros((3, 3)), q=np.zeros(3))
        with pytest.raises(ValueError, match=r"dim 3.*length 2"):
            evaluate_energy(problem, [0, 1])

    def test_symmetrization_changes_no_energy(self):
        rng = np.random.default_rng(2)
        asym = rng.normal(size=(4, 4))
        q = rng.normal(size=4)
        p_asym = QuboProblem(Q=asym, q=q)
        p_sym = QuboProblem(Q=(asym + asym.T) / 2.0, q=q)
        for idx in range(16):
            bits = bits_from_index(idx, 4)
            assert evaluate_energy(p_asym, bits) == evaluate_energy(p_sym, bits)


class TestProblemValidation:
    def test_rejects_non_square(self):
        with pytest.raises(ValueError, match="square"):
            QuboProblem(Q=np.zeros((2, 3)), q=np.zeros(2))

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            QuboProblem(Q=np.zeros((3, 3)), q=np.zeros(2))

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError, match="finite"):
            QuboProblem(Q=[[np.inf]], q=[0.0])

    def test_stored_matrix_is_symmetric(self):
        problem = QuboProblem(Q=[[0.0, 1.0], [0.0, 0.0]], q=[0.0, 0.0])
        assert np.array_equal(problem.Q, problem.Q.T)
        assert np.max(np.abs(problem.Q - problem.Q.T)) <= 1e-12


class TestHamiltonianDiagonal:
    def test_one_qubit(self):
        problem = QuboProblem(Q=[[2.0]], q=[0.0])
        assert hamiltonian_diagonal(problem).tolist() == [0.0, 2.0]

    def test_two_qubit_linear_only(self):
        problem = QuboProblem(Q=np.zeros((2, 2)), q=[1.0, 1.0])
        assert hamiltonian_diagonal(problem).tolist() == [0.0, 1.0, 1.0, 2.0]

    def test_min_matches_independent_enumeration(self):
        rng = np.random.default_rng(3)
        problem = random_problem(rng, 4)
        diag = hamiltonian_diagonal(problem)
        oracle = brute_force_energies(problem)
        assert diag.shape == (16,)
        assert np.min(diag) == pytest.approx(np.min(oracle), abs=1e-12)
        assert np.allclose(diag, oracle, atol=1e-12)

    def test_refuses_large_dimension(self):
        problem = QuboProblem(Q=np.zeros((21, 21)), q=np.zeros(21))
        with pytest.raises(ValueError, match="limit 20"):
            hamiltonian_diagonal(problem)

    def test_entrywise_exact_correspondence(self):
        # Spectral view and direct evaluation must agree bit for bit.
        rng = np.random.default_rng(4)
        for dim in (1, 2, 3, 5, 8, 12):
            problem = random_problem(rng, dim)
            diag = hamiltonian_diagonal(problem)
            energies = np.array([
                evaluate_energy(problem, bits_from_index(idx, dim))
                for idx in range(2**dim)
            ])
            assert np.array_equal(diag, energies)
            assert np.min(diag) == np.min(energies)


class TestBitOrder:
    def test_roundtrip(self):
        for idx in range(32):
            assert index_from_bits(bits_from_index(idx, 5)) == idx

    def test_lsb_first(self):
        assert bits_from_index(1, 3).tolist() == [1, 0, 0]
        assert bits_from_index(4, 3).tolist() == [0, 0, 1]


class TestJsonRoundTrip:
    def test_lossless(self):
        rng = np.random.default_rng(5)
        problem = random_problem(rng, 6, offset=rng.normal())
        restored = QuboProblem.from_json(problem.to_json())
        assert np.array_equal(problem.Q, restored.Q)
        assert np.array_equal(problem.q, restored.q)
        assert problem.offset == restored.offset

    def test_schema(self):
        problem = QuboProblem(Q=[[1.0]], q=[0.5], offset=0.25)
        data = json.loads(problem.to_json())
        assert set(data) == {"dim", "Q", "q", "offset"}
        assert data["dim"] == 1

    def test_rejects_inconsistent_dim(self):
        with pytest.raises(ValueError, match="declared dim"):
            QuboProblem.from_json('{"dim": 3, "Q": [[0.0]], "q": [0.0], "offset": 0}')


class TestBitstringSample:
    def test_to_dict(self):
        s = BitstringSample(bits=[1, 0, 1], energy=-2.5, shot_index=3, solver_id="x")
        assert s.to_dict() == {"bits": [1, 0, 1], "energy": -2.5,
                               "shot_index": 3, "solver_id": "x"}
