import numpy as np
import pytest
from PIL import Image

from qubovision.qubo import QuboProblem


def random_problem(rng: np.random.Generator, dim: int, low: float = -1.0,
                   high: float = 1.0, offset: float = 0.0) -> QuboProblem:
    Q = rng.uniform(low, high, (dim, dim))
    Q = (Q + Q.T) / 2.0
    q = rng.uniform(low, high, dim)
    return QuboProblem(Q=Q, q=q, offset=offset)


def brute_force_energies(problem: QuboProblem) -> np.ndarray:
    """Independent enumeration oracle: plain numpy, no shared code paths."""
    n = problem.dim
    states = ((np.arange(2**n)[:, None] >> np.arange(n)) & 1).astype(np.float64)
    return np.einsum("si,ij,sj->s", states, problem.Q, states) + states @ problem.q + problem.offset


@pytest.fixture
def cluster_outlier_points():
    """Two tight 4-point groups far apart plus one remote outlier (9 points).

    Indices 0-3 are the first dense group, 4-7 the second, 8 the outlier.
    """
    group_a = [(0.0, 0.0), (0.3, 0.0), (0.0, 0.3), (0.3, 0.3)]
    group_b = [(6.0, 0.0), (6.3, 0.0), (6.0, 0.3), (6.3, 0.3)]
    outlier = [(20.0, 10.0)]
    return np.array(group_a + group_b + outlier)


@pytest.fixture
def collinear_points():
    return np.array([[0.0], [1.0], [2.0]])


def structured_patch(size: int = 32, noise: float = 0.02, seed: int = 7) -> np.ndarray:
    """Deterministic synthetic color patch with gradients and blocks."""
    rng = np.random.default_rng(seed)
    g = np.zeros((size, size, 3))
    xx, yy = np.meshgrid(np.linspace(0, 1, size), np.linspace(0, 1, size))
    g[..., 0] = xx
    g[..., 1] = yy
    g[..., 2] = 0.3
    s = size // 4
    g[s: 2 * s, s: 2 * s] = [0.9, 0.1, 0.1]
    g[2 * s + 2: 3 * s + 2, 1: s] = [0.1, 0.9, 0.2]
    g[1: s, 2 * s: size - 2] = [0.2, 0.2, 0.9]
    g += rng.normal(0.0, noise, g.shape)
    return np.clip(g, 0.0, 1.0)


@pytest.fixture
def patch32():
    return structured_patch(32)


@pytest.fixture
def patch24():
    return structured_patch(24)


def synthetic_image(width: int, height: int, seed: int = 5) -> np.ndarray:
    """Smoothly varying uint8 RGB test image."""
    rng = np.random.default_rng(seed)
    xx, yy = np.meshgrid(np.linspace(0, 1, width), np.linspace(0, 1, height))
    base = np.stack([
        0.5 + 0.5 * np.sin(6 * xx + 2 * yy),
        0.5 + 0.5 * np.cos(4 * yy),
        0.5 + 0.5 * np.sin(3 * xx * yy + 1.0),
    ], axis=-1)
    base += rng.normal(0, 0.05, base.shape)
    return np.clip(np.rint(base * 255), 0, 255).astype(np.uint8)


def pixel_style_points(n: int, seed: int = 0) -> list[np.ndarray]:
    """Unit-norm non-negative 5-vectors with down-weighted leading coords,
    shaped like the pipeline's pixel features."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0, 1, (n, 5))
    pts[:, :2] *= 0.25
    return [p / np.linalg.norm(p) for p in pts]


def write_png(path, array_uint8: np.ndarray) -> str:
    Image.fromarray(array_uint8).save(path, format="PNG")
    return str(path)


def write_ppm(path, array_uint8: np.ndarray) -> str:
    Image.fromarray(array_uint8).save(path, format="PPM")
    return str(path)
