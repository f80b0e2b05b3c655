import json

import numpy as np
import pytest

from qubovision.qubo import QuboProblem, evaluate_energy, hamiltonian_diagonal
from qubovision.solvers import (SolverConfig, SolverError, preset, solve, solve_exhaustive,
                                solve_simulated_annealing, solve_tabu)

from conftest import random_problem

TIE_PROBLEM = QuboProblem(Q=[[0.0, 3.0], [3.0, 0.0]], q=[-1.0, -1.0])


class TestSolverConfig:
    def test_rejects_bad_temperature_order(self):
        with pytest.raises(ValueError, match="initial > final"):
            SolverConfig(sa_temp_initial=0.1, sa_temp_final=1.0)

    def test_rejects_zero_shots(self):
        with pytest.raises(ValueError, match="shots"):
            SolverConfig(shots=0)

    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError, match="solver_kind"):
            SolverConfig(solver_kind="quantum")

    def test_preset_lookup(self):
        assert preset("digital").sa_sweeps > preset("sa_short").sa_sweeps
        assert preset("tabu").solver_kind == "tabu"
        with pytest.raises(ValueError, match="unknown solver preset"):
            preset("nope")


class TestExhaustive:
    def test_independent_bits_follow_sign_of_linear_term(self):
        problem = QuboProblem(Q=np.zeros((2, 2)), q=[1.0, -1.0])
        result = solve_exhaustive(problem)
        assert result.best.bits.tolist() == [0, 1]
        assert result.best.energy == -1.0

    def test_tie_break_prefers_smallest_encoded_integer(self):
        # Energies over the 4 states are 0, -1, -1, 4; bits (1,0) encodes the
        # integer 1 and wins the tie against (0,1) which encodes 2.
        result = solve_exhaustive(TIE_PROBLEM)
        assert result.best.bits.tolist() == [1, 0]
        assert result.best.energy == -1.0

    def test_degenerate_one_bit_tie(self):
        problem = QuboProblem(Q=[[0.0]], q=[0.0])
        result = solve_exhaustive(problem)
        assert result.best.bits.tolist() == [0]
        assert result.best.energy == 0.0

    def test_refuses_large_dimension(self):
        problem = QuboProblem(Q=np.zeros((25, 25)), q=np.zeros(25))
        with pytest.raises(SolverError, match="limit 24"):
            solve_exhaustive(problem)

    def test_matches_hamiltonian_minimum_exactly(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            problem = random_problem(rng, int(rng.integers(1, 9)))
            assert solve_exhaustive(problem).best.energy == np.min(hamiltonian_diagonal(problem))


class TestSimulatedAnnealing:
    def test_finds_small_optimum(self):
        config = SolverConfig(shots=10, sa_sweeps=100, seed=1)
        assert solve_simulated_annealing(TIE_PROBLEM, config).best.energy == -1.0

    def test_deterministic_given_config(self):
        rng = np.random.default_rng(11)
        problem = random_problem(rng, 10)
        config = SolverConfig(shots=1, sa_sweeps=50, seed=123456789)
        a = solve_simulated_annealing(problem, config)
        b = solve_simulated_annealing(problem, config)
        assert a.best.energy == b.best.energy
        assert a.best.bits.tolist() == b.best.bits.tolist()
        assert [s.bits.tolist() for s in a.all_samples] == [s.bits.tolist() for s in b.all_samples]

    def test_reaches_exhaustive_optimum_on_most_instances(self):
        rng = np.random.default_rng(12)
        config = SolverConfig(shots=20, sa_sweeps=500, seed=99)
        hits = 0
        for _ in range(10):
            problem = random_problem(rng, 16)
            exact = solve_exhaustive(problem).best.energy
            if solve_simulated_annealing(problem, config).best.energy == exact:
                hits += 1
        assert hits >= 9

    def test_more_sweeps_do_not_hurt_on_average(self):
        rng = np.random.default_rng(13)
        short = SolverConfig(shots=3, sa_sweeps=10, seed=7)
        long = SolverConfig(shots=3, sa_sweeps=1000, seed=7)
        short_mean = np.mean([
            solve_simulated_annealing(random_problem(np.random.default_rng(1000 + i), 12), short).best.energy
            for i in range(50)
        ])
        long_mean = np.mean([
            solve_simulated_annealing(random_problem(np.random.default_rng(1000 + i), 12), long).best.energy
            for i in range(50)
        ])
        assert long_mean <= short_mean


class TestTabu:
    def test_finds_small_optimum(self):
        config = SolverConfig(solver_kind="tabu", shots=5, seed=3)
        assert solve_tabu(TIE_PROBLEM, config).best.energy == -1.0

    def test_unique_basin_found_immediately(self):
        problem = QuboProblem(Q=np.zeros((6, 6)), q=np.full(6, 0.5))
        config = SolverConfig(solver_kind="tabu", shots=1, seed=4, tabu_iterations=10)
        result = solve_tabu(problem, config)
        assert result.best.bits.tolist() == [0] * 6
        assert result.best.energy == 0.0

    def test_deterministic_given_config(self):
        rng = np.random.default_rng(14)
        problem = random_problem(rng, 12)
        config = SolverConfig(solver_kind="tabu", shots=4, seed=42)
        a = solve_tabu(problem, config)
        b = solve_tabu(problem, config)
        assert [s.bits.tolist() for s in a.all_samples] == [s.bits.tolist() for s in b.all_samples]
        assert a.best.energy == b.best.energy


class TestHarnessInvariants:
    @pytest.mark.parametrize("kind", ["simulated_annealing", "tabu"])
    def test_best_is_minimum_and_energies_exact(self, kind):
        rng = np.random.default_rng(15)
        problem = random_problem(rng, 14, offset=0.7)
        config = SolverConfig(solver_kind=kind, shots=8, sa_sweeps=60, seed=5)
        result = solve(problem, config)
        energies = [s.energy for s in result.all_samples]
        assert len(result.all_samples) == config.shots
        assert len(result.shot_seconds) == config.shots
        assert result.best.energy == min(energies)
        for sample in result.all_samples:
            assert sample.energy == evaluate_energy(problem, sample.bits)

    def test_heuristics_never_beat_exhaustive(self):
        rng = np.random.default_rng(16)
        for _ in range(5):
            problem = random_problem(rng, 12)
            exact = solve_exhaustive(problem).best.energy
            for config in (SolverConfig(shots=3, sa_sweeps=30, seed=1),
                           SolverConfig(solver_kind="tabu", shots=3, seed=1)):
                assert solve(problem, config).best.energy >= exact

    def test_result_serializes_to_json(self):
        result = solve_exhaustive(TIE_PROBLEM)
        data = json.loads(result.to_json())
        assert data["best"]["bits"] == [1, 0]
        assert len(data["samples"]) == 1
        assert len(data["shot_seconds"]) == 1
