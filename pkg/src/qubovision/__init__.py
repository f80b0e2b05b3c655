"""QUBO-based image keypoint extraction and matching toolkit.

Compiles keypoint extraction (as clustering) and keypoint matching into
quadratic unconstrained binary optimization problems, solves them with
annealing-style classical solvers, and provides an exact statevector
simulator for kernel circuits that plug into the same matrix builders as
classical kernels.
"""

__version__ = "0.1.0"

from .clustering import (ClusteringSpec, SelectionResult, build_kdc_qubo,
                         build_kmedoids_qubo, decode_selection, extract_keypoints)
from .config import AppConfig, ConfigError, LevelSpec, PipelineConfig, load_config
from .kernels import (DistanceMatrix, KernelMatrix, build_distance_matrix,
                      build_kernel_matrix, gaussian_kernel,
                      normalized_inner_product_kernel)
from .matching import (FeasibilityReport, MatchOutcome, MatchSet, MatchingSpec,
                       build_matching_qubo, decode_matching, match_keypoints)
from .pipeline import (Keypoint, Patch, compute_descriptor, hierarchical_extract,
                       load_and_preprocess, rotated_matching_experiment, split_patches)
from .quantum import (FeatureMapSpec, Statevector, apply_feature_unitary,
                      increment_register, quantum_kernel_value, swap_test_probability)
from .qubo import BitstringSample, QuboProblem, evaluate_energy, hamiltonian_diagonal
from .solvers import (SolveResult, SolverConfig, SolverError, preset, solve,
                      solve_exhaustive, solve_simulated_annealing, solve_tabu)
