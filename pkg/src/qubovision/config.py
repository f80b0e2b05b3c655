"""Run configuration: defaults, YAML loading, and validation.

The zero-config defaults reproduce the full desk-scale extraction schedule:
928x704 downsampling, a 32x32 patch grid (29x22-pixel patches), 10 keypoints
per patch, regrouping into 8x8 grids of 4x4 patches (sets of 160) for 20
keypoints each, regrouping into 2x2 grids of 4x4 (sets of 320) for 45 each,
ending at 4 * 45 = 180 keypoints.  Pixel locations are down-weighted by 1/4
relative to color before normalization.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import yaml

from .matching import MatchingSpec
from .solvers import SOLVER_PRESETS, SolverConfig, preset


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


@dataclass(frozen=True)
class LevelSpec:
    """One stage of the hierarchical extraction schedule.

    ``group`` is the regrouping factor applied to the previous level's cell
    grid ((4, 4) merges every 4x4 block of cells); it must be None for the
    first level, which works per patch.
    """

    k: int
    method: str = "kmedoids"
    group: tuple[int, int] | None = None
    kernel: str = "gaussian"
    kernel_gamma: float = 1.0
    alpha: float | None = None
    beta: float | None = None
    gamma: float | None = None
    lam: float | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"level k must be positive, got {self.k}")
        if self.method not in ("kmedoids", "kdc"):
            raise ConfigError(f"unknown clustering method {self.method!r}")
        if self.kernel not in ("gaussian", "cosine", "quantum"):
            raise ConfigError(f"unknown kernel {self.kernel!r}")


def default_levels() -> tuple[LevelSpec, ...]:
    return (
        LevelSpec(k=10),
        LevelSpec(k=20, group=(4, 4)),
        LevelSpec(k=45, group=(4, 4)),
    )


@dataclass(frozen=True)
class PipelineConfig:
    target_size: tuple[int, int] = (928, 704)  # (width, height)
    patch_grid: tuple[int, int] = (32, 32)     # (columns, rows)
    location_weight: float = 0.25
    levels: tuple[LevelSpec, ...] = field(default_factory=default_levels)

    def __post_init__(self):
        w, h = self.target_size
        nx, ny = self.patch_grid
        if w < nx or h < ny or nx < 1 or ny < 1:
            raise ConfigError(f"patch grid {self.patch_grid} too fine for image {self.target_size}")
        if not self.levels:
            raise ConfigError("at least one extraction level is required")
        if self.levels[0].group is not None:
            raise ConfigError("the first level works per patch and takes no group factor")
        gx, gy = nx, ny
        for i, level in enumerate(self.levels[1:], start=1):
            if level.group is None:
                raise ConfigError(f"level {i} needs a group factor")
            fx, fy = level.group
            if fx < 1 or fy < 1 or gx % fx or gy % fy:
                raise ConfigError(
                    f"level {i} group {level.group} does not divide the {gx}x{gy} cell grid"
                )
            gx, gy = gx // fx, gy // fy

    @property
    def final_group_count(self) -> int:
        gx, gy = self.patch_grid
        for level in self.levels[1:]:
            gx //= level.group[0]
            gy //= level.group[1]
        return gx * gy

    @property
    def final_keypoint_count(self) -> int:
        return self.final_group_count * self.levels[-1].k


@dataclass(frozen=True)
class FeatureMapConfig:
    num_qubits: int = 5
    input_scale: float = 1.0
    pair_set: tuple[tuple[int, int], ...] | None = None  # None = all pairs


@dataclass(frozen=True)
class AppConfig:
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    solver: SolverConfig = field(default_factory=lambda: preset("digital"))
    matching: MatchingSpec = field(default_factory=MatchingSpec)
    feature_map: FeatureMapConfig = field(default_factory=FeatureMapConfig)
    seed: int = 0
    threads: int = 1

    def with_seed(self, seed: int) -> "AppConfig":
        return replace(self, seed=seed, solver=replace(self.solver, seed=seed))

    def to_dict(self) -> dict:
        return {
            "pipeline": {
                "target_size": list(self.pipeline.target_size),
                "patch_grid": list(self.pipeline.patch_grid),
                "location_weight": self.pipeline.location_weight,
                "levels": [
                    {
                        "k": lv.k,
                        "method": lv.method,
                        "group": list(lv.group) if lv.group else None,
                        "kernel": lv.kernel,
                        "kernel_gamma": lv.kernel_gamma,
                        "alpha": lv.alpha,
                        "beta": lv.beta,
                        "gamma": lv.gamma,
                        "lam": lv.lam,
                    }
                    for lv in self.pipeline.levels
                ],
            },
            "solver": self.solver.to_dict(),
            "matching": {
                "k_max": self.matching.k_max,
                "alpha": self.matching.alpha,
                "beta": self.matching.beta,
                "gamma": self.matching.gamma,
            },
            "feature_map": {
                "num_qubits": self.feature_map.num_qubits,
                "input_scale": self.feature_map.input_scale,
                "pair_set": ([list(p) for p in self.feature_map.pair_set]
                             if self.feature_map.pair_set is not None else None),
            },
            "seed": self.seed,
            "threads": self.threads,
        }


def _pair(value, name: str) -> tuple[int, int]:
    try:
        a, b = value
        return int(a), int(b)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a pair of integers, got {value!r}") from exc


def _parse_level(data: dict) -> LevelSpec:
    if not isinstance(data, dict) or "k" not in data:
        raise ConfigError(f"each level needs at least a 'k' entry, got {data!r}")
    known = {"k", "method", "group", "kernel", "kernel_gamma", "alpha", "beta", "gamma", "lam"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown level keys: {sorted(unknown)}")
    kwargs = dict(data)
    if kwargs.get("group") is not None:
        kwargs["group"] = _pair(kwargs["group"], "level group")
    return LevelSpec(**kwargs)


def _parse_solver(data: dict) -> SolverConfig:
    # The digital-annealer preset is the zero-config default solver.
    data = dict(data)
    base = preset(str(data.pop("preset", "digital")))
    try:
        return replace(base, **data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid solver section: {exc}") from exc


def load_config(path: str | None = None, text: str | None = None) -> AppConfig:
    """Build an AppConfig from a YAML file (or literal text), applying defaults.

    Unknown sections or keys, malformed values, and schedule inconsistencies
    all raise ConfigError.
    """
    if text is None:
        if path is None:
            return AppConfig()
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"could not parse config: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")

    known = {"pipeline", "solver", "matching", "feature_map", "seed", "threads"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    try:
        pipe_data = dict(data.get("pipeline") or {})
        pipe_kwargs = {}
        if "target_size" in pipe_data:
            pipe_kwargs["target_size"] = _pair(pipe_data.pop("target_size"), "target_size")
        if "patch_grid" in pipe_data:
            pipe_kwargs["patch_grid"] = _pair(pipe_data.pop("patch_grid"), "patch_grid")
        if "location_weight" in pipe_data:
            pipe_kwargs["location_weight"] = float(pipe_data.pop("location_weight"))
        if "levels" in pipe_data:
            pipe_kwargs["levels"] = tuple(_parse_level(lv) for lv in pipe_data.pop("levels"))
        if pipe_data:
            raise ConfigError(f"unknown pipeline keys: {sorted(pipe_data)}")
        pipeline = PipelineConfig(**pipe_kwargs)

        solver = _parse_solver(data.get("solver") or {})
        matching = MatchingSpec(**(data.get("matching") or {}))
        fm_data = dict(data.get("feature_map") or {})
        if fm_data.get("pair_set") is not None:
            fm_data["pair_set"] = tuple(_pair(p, "feature_map pair") for p in fm_data["pair_set"])
        feature_map = FeatureMapConfig(**fm_data)
        config = AppConfig(
            pipeline=pipeline,
            solver=solver,
            matching=matching,
            feature_map=feature_map,
            seed=int(data.get("seed", 0)),
            threads=int(data.get("threads", 1)),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return config.with_seed(config.seed)


__all__ = [
    "AppConfig",
    "ConfigError",
    "FeatureMapConfig",
    "LevelSpec",
    "PipelineConfig",
    "SOLVER_PRESETS",
    "default_levels",
    "load_config",
]
