import numpy as np
import pytest

from qubovision.kernels import (DistanceMatrix, KernelMatrix, build_distance_matrix,
                                build_kernel_matrix, gaussian_kernel, make_gaussian_kernel,
                                matrix_from_csv, matrix_to_csv,
                                normalized_inner_product_kernel)


class TestGaussianKernel:
    def test_identical_inputs(self):
        x = np.array([0.2, -1.0, 3.0])
        assert gaussian_kernel(x, x, gamma=2.0) == 1.0

    def test_analytic_half(self):
        x = np.array([0.0])
        y = np.array([np.sqrt(np.log(2.0))])
        assert gaussian_kernel(x, y, gamma=1.0) == pytest.approx(0.5, abs=1e-12)

    def test_hand_evaluation(self):
        assert gaussian_kernel([0.0, 0.0], [1.0, 1.0], gamma=0.5) == pytest.approx(
            np.exp(-1.0), abs=1e-12)

    def test_rejects_mismatched_dims(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            gaussian_kernel([1.0], [1.0, 2.0])

    def test_rejects_nonpositive_gamma(self):
        with pytest.raises(ValueError, match="gamma"):
            gaussian_kernel([1.0], [1.0], gamma=0.0)


class TestCosineKernel:
    def test_identical_inputs(self):
        x = np.array([1.0, 2.0, 3.0])
        assert normalized_inner_product_kernel(x, x) == 1.0

    def test_orthogonal(self):
        assert normalized_inner_product_kernel([1.0, 0.0], [0.0, 1.0]) == 0.0

    def test_hand_evaluation(self):
        assert normalized_inner_product_kernel([1.0, 0.0], [1.0, 1.0]) == pytest.approx(
            1.0 / np.sqrt(2.0), abs=1e-12)

    def test_negative_similarity_clamped_to_zero(self):
        assert normalized_inner_product_kernel([1.0, 0.0], [-1.0, 0.0]) == 0.0

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError, match="zero vector"):
            normalized_inner_product_kernel([0.0, 0.0], [1.0, 0.0])


class TestDistanceMatrix:
    def test_single_point(self):
        d = build_distance_matrix([[1.0, 2.0]])
        assert d.n == 1
        assert d.entries.tolist() == [[0.0]]

    def test_collinear_points(self):
        d = build_distance_matrix([[0.0], [1.0], [2.0]])
        assert d.entries.tolist() == [[0, 1, 2], [1, 0, 1], [2, 1, 0]]

    def test_triangle_inequality_on_random_points(self):
        rng = np.random.default_rng(20)
        d = build_distance_matrix(rng.normal(size=(5, 3))).entries
        for i in range(5):
            for j in range(5):
                for k in range(5):
                    assert d[i, j] <= d[i, k] + d[k, j] + 1e-12

    def test_structure_invariants(self):
        rng = np.random.default_rng(21)
        d = build_distance_matrix(rng.normal(size=(7, 4))).entries
        assert np.array_equal(d, d.T)
        assert np.all(np.diag(d) == 0)
        assert np.all(d >= 0)

    def test_rejects_mixed_dimensions(self):
        with pytest.raises(ValueError):
            build_distance_matrix([[1.0, 2.0], [1.0]])


class TestKernelMatrixBuilder:
    def test_single_point_gaussian(self):
        m = build_kernel_matrix([[1.0, 1.0]], None, make_gaussian_kernel(1.0))
        assert m.entries.tolist() == [[1.0]]
        assert m.symmetric

    def test_gaussian_matrix_is_psd(self):
        rng = np.random.default_rng(22)
        pts = list(rng.normal(size=(8, 3)))
        m = build_kernel_matrix(pts, None, make_gaussian_kernel(0.7))
        eigenvalues = np.linalg.eigvalsh(m.entries)
        assert eigenvalues.min() >= -1e-9
        assert np.array_equal(m.entries, m.entries.T)

    def test_cosine_matrix_is_psd_and_bounded(self):
        rng = np.random.default_rng(23)
        pts = list(np.abs(rng.normal(size=(8, 5))))  # non-negative like descriptors
        m = build_kernel_matrix(pts, None, normalized_inner_product_kernel)
        assert np.linalg.eigvalsh(m.entries).min() >= -1e-9
        assert np.all((m.entries >= 0) & (m.entries <= 1))

    def test_rectangular_shape_and_flag(self):
        a = [np.zeros(2), np.ones(2)]
        b = [np.zeros(2), np.ones(2), np.full(2, 2.0)]
        m = build_kernel_matrix(a, b, make_gaussian_kernel(1.0))
        assert (m.n, m.m) == (2, 3)
        assert not m.symmetric

    def test_kernel_error_carries_entry_context(self):
        a = [np.array([1.0])]
        b = [np.array([1.0]), np.array([0.0])]
        with pytest.raises(ValueError, match=r"entry \(0,1\)"):
            build_kernel_matrix(a, b, normalized_inner_product_kernel)


class TestCsv:
    def test_round_trip(self):
        rng = np.random.default_rng(24)
        m = rng.random((3, 4))
        assert np.array_equal(matrix_from_csv(matrix_to_csv(m)), m)

    def test_single_value(self):
        assert matrix_to_csv(np.array([[1.0]])) == "1.0\n"

    def test_dataclass_validation(self):
        with pytest.raises(ValueError, match="symmetric"):
            KernelMatrix(entries=np.array([[0.0, 1.0], [0.5, 0.0]]), symmetric=True)
        with pytest.raises(ValueError, match="zero-diagonal"):
            DistanceMatrix(entries=np.array([[1.0]]))
