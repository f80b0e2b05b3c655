"""Image ingestion, pixel featurization, hierarchical keypoint extraction,
descriptors, and the rotated-patch matching experiment.

Pixel feature convention: every pixel becomes a 5-vector
(x, y, r, g, b) where (x, y) is the position inside the current local frame
scaled to [0, 1] and multiplied by the location weight, colors are in [0, 1],
and the whole vector is L2-normalized.  The local frame is the patch at the
first extraction level and the regrouped set's pixel extent at later levels,
which keeps the location down-weighting meaningful across the hierarchy.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image
from scipy import ndimage

from .clustering import ClusteringSpec, SelectionResult, extract_keypoints
from .config import AppConfig, LevelSpec, PipelineConfig
from .kernels import Kernel, make_gaussian_kernel, normalized_inner_product_kernel
from .matching import MatchingSpec, MatchOutcome, match_keypoints
from .quantum import FeatureMapSpec, make_quantum_kernel
from .solvers import SolverConfig, _mix_seed

ZERO_PIXEL_EPS = 1e-9
DESCRIPTOR_ORIENTATION_BINS = 8
DESCRIPTOR_EPS = 1e-12


@dataclass(frozen=True)
class Keypoint:
    """A selected pixel with provenance through the extraction hierarchy."""

    col: int
    row: int
    rgb: tuple[float, float, float]
    feature: np.ndarray
    level: int
    patch_path: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "col": self.col,
            "row": self.row,
            "patch_path": list(self.patch_path),
        }


@dataclass(frozen=True)
class Patch:
    """One grid cell: global pixel coordinates plus colors."""

    index: int
    cell: tuple[int, int]          # (cx, cy) in the patch grid
    origin: tuple[int, int]        # (x0, y0) pixel offset
    size: tuple[int, int]          # (width, height)
    cols: np.ndarray
    rows: np.ndarray
    colors: np.ndarray             # (npix, 3) in [0, 1]

    def feature_vectors(self, location_weight: float) -> np.ndarray:
        x0, y0 = self.origin
        w, h = self.size
        return pixel_features(self.cols, self.rows, self.colors,
                              x0, y0, w, h, location_weight)


def pixel_features(cols, rows, colors, x0: int, y0: int, w: int, h: int,
                   location_weight: float) -> np.ndarray:
    """Unit-norm (x, y, r, g, b) rows for pixels in a local frame."""
    out = np.empty((len(cols), 5))
    out[:, 0] = (np.asarray(cols, dtype=np.float64) - x0) / w * location_weight
    out[:, 1] = (np.asarray(rows, dtype=np.float64) - y0) / h * location_weight
    out[:, 2:] = colors
    norms = np.linalg.norm(out, axis=1)
    dead = norms == 0.0
    if np.any(dead):
        # All-black pixel at the frame origin: nudge the blue channel.
        out[dead, 4] = ZERO_PIXEL_EPS
        norms = np.linalg.norm(out, axis=1)
    return out / norms[:, None]


@dataclass(frozen=True)
class PreprocessedImage:
    grid: np.ndarray               # (height, width, 3) floats in [0, 1]

    @property
    def width(self) -> int:
        return self.grid.shape[1]

    @property
    def height(self) -> int:
        return self.grid.shape[0]


def load_image(path: str) -> np.ndarray:
    """Decode a raster image (PNG, binary PPM, ...) to a float RGB grid."""
    with Image.open(path) as img:
        rgb = img.convert("RGB")
        return np.asarray(rgb, dtype=np.float64) / 255.0


def downsample(grid: np.ndarray, target_size: tuple[int, int]) -> np.ndarray:
    """Area-averaging (box filter) resize to (width, height)."""
    w, h = target_size
    if (grid.shape[1], grid.shape[0]) == (w, h):
        return grid
    img = Image.fromarray(np.clip(np.rint(grid * 255.0), 0, 255).astype(np.uint8))
    return np.asarray(img.resize((w, h), Image.Resampling.BOX), dtype=np.float64) / 255.0


def load_and_preprocess(path: str, config: PipelineConfig) -> PreprocessedImage:
    """Load, downsample to the target size, and expose the pixel grid."""
    return PreprocessedImage(grid=downsample(load_image(path), config.target_size))


def split_patches(grid: np.ndarray, grid_dims: tuple[int, int]) -> list[Patch]:
    """Cut the image into a row-major list of non-overlapping patches.

    Patch size is the floor division of the image size by the grid; any
    right/bottom remainder pixels are truncated.
    """
    nx, ny = grid_dims
    height, width = grid.shape[:2]
    pw, ph = width // nx, height // ny
    if pw < 1 or ph < 1:
        raise ValueError(f"grid {grid_dims} too fine for a {width}x{height} image")
    patches = []
    for cy in range(ny):
        for cx in range(nx):
            x0, y0 = cx * pw, cy * ph
            block = grid[y0: y0 + ph, x0: x0 + pw]
            rows, cols = np.mgrid[y0: y0 + ph, x0: x0 + pw]
            patches.append(Patch(
                index=cy * nx + cx,
                cell=(cx, cy),
                origin=(x0, y0),
                size=(pw, ph),
                cols=cols.ravel(),
                rows=rows.ravel(),
                colors=block.reshape(-1, 3),
            ))
    return patches


def _level_kernel(level: LevelSpec, feature_map: FeatureMapSpec | None) -> Kernel | None:
    if level.method != "kdc":
        return None
    if level.kernel == "gaussian":
        return make_gaussian_kernel(level.kernel_gamma)
    if level.kernel == "cosine":
        return normalized_inner_product_kernel
    if feature_map is None:
        feature_map = FeatureMapSpec(num_qubits=5)
    return make_quantum_kernel(feature_map)


def _cluster_spec(level: LevelSpec) -> ClusteringSpec:
    return ClusteringSpec(k=level.k, alpha=level.alpha, beta=level.beta,
                          gamma=level.gamma, lam=level.lam)


def _select(features: np.ndarray, level: LevelSpec, feature_map, solver_config: SolverConfig,
            seed: int) -> SelectionResult | list[int]:
    if len(features) <= level.k:
        return list(range(len(features)))  # fewer points than k: keep all, flagged by caller
    cfg = replace(solver_config, seed=seed)
    return extract_keypoints(features, level.method, _level_kernel(level, feature_map),
                             _cluster_spec(level), cfg)


@dataclass
class ExtractionStats:
    repaired_groups: list[tuple[int, int]] = field(default_factory=list)
    underfull_groups: list[tuple[int, int]] = field(default_factory=list)


def hierarchical_extract(image: PreprocessedImage, config: AppConfig,
                         stats: ExtractionStats | None = None) -> list[Keypoint]:
    """Run the full coarse-to-fine extraction schedule.

    The first level clusters every patch independently; each later level
    regroups the surviving keypoints by its grouping factor and re-clusters
    them inside the merged pixel frame.  Keypoints keep their original-image
    coordinates throughout, and their patch path records the patch and group
    indices that selected them.
    """
    pipe = config.pipeline
    solver_config = config.solver
    fmap = FeatureMapSpec(num_qubits=config.feature_map.num_qubits,
                          input_scale=config.feature_map.input_scale,
                          pair_set=config.feature_map.pair_set)
    stats = stats if stats is not None else ExtractionStats()

    patches = split_patches(image.grid, pipe.patch_grid)
    level0 = pipe.levels[0]

    def extract_patch(patch: Patch) -> list[Keypoint]:
        features = patch.feature_vectors(pipe.location_weight)
        picked = _select(features, level0, fmap, solver_config,
                         _mix_seed(config.seed ^ (0 << 56), patch.index))
        if isinstance(picked, list):
            indices, flagged = picked, len(features) < level0.k
        else:
            indices, flagged = picked.indices, picked.repaired
        if flagged:
            stats.repaired_groups.append((0, patch.index))
        if len(features) < level0.k:
            stats.underfull_groups.append((0, patch.index))
        return [
            Keypoint(col=int(patch.cols[i]), row=int(patch.rows[i]),
                     rgb=tuple(patch.colors[i]), feature=features[i],
                     level=0, patch_path=(patch.index,))
            for i in indices
        ]

    per_cell: dict[tuple[int, int], list[Keypoint]] = {}
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(extract_patch, patches))
    else:
        results = [extract_patch(p) for p in patches]
    for patch, kps in zip(patches, results):
        per_cell[patch.cell] = kps

    nx, ny = pipe.patch_grid
    pw, ph = image.width // nx, image.height // ny
    frame_w, frame_h = pw, ph

    for level_idx, level in enumerate(pipe.levels[1:], start=1):
        fx, fy = level.group
        new_nx, new_ny = nx // fx, ny // fy
        frame_w, frame_h = frame_w * fx, frame_h * fy

        groups: dict[tuple[int, int], list[Keypoint]] = {
            (gx, gy): [] for gy in range(new_ny) for gx in range(new_nx)
        }
        for (cx, cy), kps in per_cell.items():
            groups[(cx // fx, cy // fy)].extend(kps)

        def extract_group(item) -> tuple[tuple[int, int], list[Keypoint]]:
            (gx, gy), members = item
            group_index = gy * new_nx + gx
            members = sorted(members, key=lambda kp: (kp.row, kp.col))
            x0, y0 = gx * frame_w, gy * frame_h
            features = pixel_features(
                np.array([kp.col for kp in members]),
                np.array([kp.row for kp in members]),
                np.array([kp.rgb for kp in members]),
                x0, y0, frame_w, frame_h, pipe.location_weight,
            )
            picked = _select(features, level, fmap, solver_config,
                             _mix_seed(config.seed ^ (level_idx << 56), group_index))
            if isinstance(picked, list):
                indices, flagged = picked, len(members) < level.k
            else:
                indices, flagged = picked.indices, picked.repaired
            if flagged:
                stats.repaired_groups.append((level_idx, group_index))
            if len(members) < level.k:
                stats.underfull_groups.append((level_idx, group_index))
            selected = [
                replace(members[i], feature=features[i], level=level_idx,
                        patch_path=members[i].patch_path + (group_index,))
                for i in indices
            ]
            return (gx, gy), selected

        items = sorted(groups.items(), key=lambda kv: (kv[0][1], kv[0][0]))
        if config.threads > 1:
            with ThreadPoolExecutor(max_workers=config.threads) as pool:
                merged = list(pool.map(extract_group, items))
        else:
            merged = [extract_group(it) for it in items]
        per_cell = dict(merged)
        nx, ny = new_nx, new_ny

    ordered_cells = sorted(per_cell, key=lambda c: (c[1], c[0]))
    return [kp for cell in ordered_cells for kp in per_cell[cell]]


def compute_descriptor(grid: np.ndarray, col: int, row: int, window: int = 9) -> np.ndarray:
    """Gradient-orientation-histogram descriptor around a pixel.

    The window is split into 2x2 spatial cells with 8 orientation bins each,
    giving a 32-dimensional non-negative vector; gradients are magnitude-
    weighted central differences with coordinates clamped at the image
    border, and the histogram is epsilon-regularized and L2-normalized (a
    constant image yields the uniform histogram).
    """
    if window % 2 == 0 or window < 3:
        raise ValueError(f"window must be odd and >= 3, got {window}")
    height, width = grid.shape[:2]
    gray = grid.mean(axis=2) if grid.ndim == 3 else grid
    half = window // 2

    dy, dx = np.mgrid[-half: half + 1, -half: half + 1]
    rr = np.clip(row + dy, 0, height - 1)
    cc = np.clip(col + dx, 0, width - 1)
    gx = gray[rr, np.clip(cc + 1, 0, width - 1)] - gray[rr, np.clip(cc - 1, 0, width - 1)]
    gy = gray[np.clip(rr + 1, 0, height - 1), cc] - gray[np.clip(rr - 1, 0, height - 1), cc]

    magnitude = np.hypot(gx, gy)
    angle = np.mod(np.arctan2(gy, gx), 2.0 * np.pi)
    bins = np.minimum(
        (angle / (2.0 * np.pi) * DESCRIPTOR_ORIENTATION_BINS).astype(int),
        DESCRIPTOR_ORIENTATION_BINS - 1,
    )
    cell = (dy >= 0).astype(int) * 2 + (dx >= 0).astype(int)

    hist = np.zeros(4 * DESCRIPTOR_ORIENTATION_BINS)
    np.add.at(hist, cell * DESCRIPTOR_ORIENTATION_BINS + bins, magnitude)
    hist += DESCRIPTOR_EPS
    return hist / np.linalg.norm(hist)


def rotate_image(grid: np.ndarray, angle_degrees: float) -> np.ndarray:
    """Bilinear rotation about the image center, keeping the frame size."""
    if angle_degrees == 0.0:
        return grid
    out = ndimage.rotate(grid, angle_degrees, axes=(1, 0), reshape=False,
                         order=1, mode="nearest")
    return np.clip(out, 0.0, 1.0)


def extract_patch_keypoints(grid: np.ndarray, n_keypoints: int, level: LevelSpec,
                            solver_config: SolverConfig, location_weight: float,
                            seed: int) -> list[Keypoint]:
    """Single-frame extraction: treat the whole grid as one patch."""
    height, width = grid.shape[:2]
    rows, cols = np.mgrid[0:height, 0:width]
    patch = Patch(index=0, cell=(0, 0), origin=(0, 0), size=(width, height),
                  cols=cols.ravel(), rows=rows.ravel(), colors=grid.reshape(-1, 3))
    features = patch.feature_vectors(location_weight)
    level = replace(level, k=n_keypoints, group=None)
    picked = _select(features, level, None, solver_config, seed)
    indices = picked if isinstance(picked, list) else picked.indices
    return [
        Keypoint(col=int(patch.cols[i]), row=int(patch.rows[i]),
                 rgb=tuple(patch.colors[i]), feature=features[i],
                 level=0, patch_path=(0,))
        for i in indices
    ]


@dataclass(frozen=True)
class RotatedMatchingResult:
    angle_degrees: float
    original: np.ndarray
    rotated: np.ndarray
    keypoints_a: list[Keypoint]
    keypoints_b: list[Keypoint]
    outcomes: dict[float, MatchOutcome]


def rotated_matching_experiment(patch: np.ndarray, angle_degrees: float, n_keypoints: int,
                                alphas: Sequence[float], config: AppConfig,
                                window: int = 9,
                                render_dir: str | None = None) -> RotatedMatchingResult:
    """Match a patch against a rotated copy of itself at several alpha values.

    Both versions go through the same seeded extraction, descriptors are
    computed per keypoint, and one matching problem is solved per alpha.
    With ``render_dir`` set, a side-by-side match figure is written per alpha.
    """
    if min(patch.shape[:2]) < window:
        raise ValueError(f"patch {patch.shape[:2]} too small for rotation experiment")
    rotated = rotate_image(patch, angle_degrees)
    level = replace(config.pipeline.levels[0], k=n_keypoints)
    seed = _mix_seed(config.seed, 0xE0)
    kps_a = extract_patch_keypoints(patch, n_keypoints, level, config.solver,
                                    config.pipeline.location_weight, seed)
    kps_b = extract_patch_keypoints(rotated, n_keypoints, level, config.solver,
                                    config.pipeline.location_weight, seed)
    desc_a = [compute_descriptor(patch, kp.col, kp.row, window) for kp in kps_a]
    desc_b = [compute_descriptor(rotated, kp.col, kp.row, window) for kp in kps_b]

    outcomes = {}
    for alpha in alphas:
        spec = replace(config.matching, alpha=float(alpha))
        outcomes[float(alpha)] = match_keypoints(
            desc_a, desc_b, normalized_inner_product_kernel, spec,
            replace(config.solver, seed=_mix_seed(config.seed, 0xA1)),
        )
    result = RotatedMatchingResult(angle_degrees=angle_degrees, original=patch,
                                   rotated=rotated, keypoints_a=kps_a, keypoints_b=kps_b,
                                   outcomes=outcomes)
    if render_dir is not None:
        from .render import save_match_figure
        for alpha, outcome in result.outcomes.items():
            save_match_figure(
                patch, rotated, kps_a, kps_b, outcome.matches.pairs,
                str(Path(render_dir) / f"matches_alpha_{alpha}.png"),
                title=f"alpha={alpha}, angle={angle_degrees} deg",
            )
    return result


def keypoints_to_json_obj(keypoints: Sequence[Keypoint]) -> list[dict]:
    return [kp.to_dict() for kp in keypoints]
