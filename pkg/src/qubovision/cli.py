"""Command-line entry point.

Subcommands: ``keypoints``, ``match``, ``kernel-matrix``, ``solve``.
Global flags: ``--seed``, ``--threads``, ``--config``, ``--out-dir``.

Exit codes: 0 success, 2 configuration/validation error, 3 input/output
error, 4 solver error.  Expected failures print one diagnostic line instead
of a stack trace.  Every command is deterministic under a fixed seed and
config; JSON/CSV outputs are byte-identical across reruns (manifests carry
wall-clock timings and are exempt).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import AppConfig, ConfigError, load_config
from .kernels import (make_gaussian_kernel, matrix_to_csv, normalized_inner_product_kernel)
from .matching import match_keypoints
from .pipeline import (compute_descriptor, hierarchical_extract, keypoints_to_json_obj,
                       load_and_preprocess, rotated_matching_experiment, split_patches)
from .quantum import FeatureMapSpec, make_quantum_kernel
from .qubo import QuboProblem
from .render import save_heatmap, save_keypoint_overlay, save_match_figure
from .solvers import SOLVER_PRESETS, SolverError, preset, solve

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_SOLVER = 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class _Stages:
    """Per-stage wall-clock bookkeeping for the run manifest."""

    def __init__(self):
        self.entries: list[dict] = []
        self._t0 = None
        self._name = None

    def start(self, name: str):
        self._name = name
        self._t0 = time.perf_counter()

    def stop(self):
        self.entries.append({"name": self._name,
                             "seconds": time.perf_counter() - self._t0})


def _write_manifest(out_dir: Path, config: AppConfig, stages: _Stages,
                    outputs: dict[str, str]) -> Path:
    manifest = {
        "tool": "qubovision",
        "version": __version__,
        "seed": config.seed,
        "config": config.to_dict(),
        "stages": stages.entries,
        "outputs": outputs,
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path


def _load_app_config(args) -> AppConfig:
    try:
        config = load_config(args.config)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read config file: {exc}")
    except ConfigError as exc:
        raise CliError(EXIT_CONFIG, f"invalid config: {exc}")
    if args.seed is not None:
        config = config.with_seed(args.seed)
    if args.threads is not None:
        if args.threads < 1:
            raise CliError(EXIT_CONFIG, "--threads must be >= 1")
        config = replace(config, threads=args.threads)
    return config


def _load_image(path: str, config: AppConfig):
    try:
        return load_and_preprocess(path, config.pipeline)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read image {path}: {exc}")


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot create output directory {out}: {exc}")
    return out


def cmd_keypoints(args) -> int:
    config = _load_app_config(args)
    out = _out_dir(args)
    stages = _Stages()

    stages.start("load")
    image = _load_image(args.image, config)
    stages.stop()

    stages.start("extract")
    try:
        keypoints = hierarchical_extract(image, config)
    except (SolverError, ValueError) as exc:
        raise CliError(EXIT_SOLVER, f"extraction failed: {exc}")
    stages.stop()

    stages.start("write")
    kp_path = out / "keypoints.json"
    kp_path.write_text(json.dumps(keypoints_to_json_obj(keypoints), indent=2) + "\n",
                       encoding="utf-8")
    overlay_path = out / "keypoints_overlay.png"
    save_keypoint_overlay(image.grid, keypoints, str(overlay_path))
    stages.stop()

    _write_manifest(out, config, stages,
                    {"keypoints": str(kp_path), "overlay": str(overlay_path)})
    print(f"extracted {len(keypoints)} keypoints -> {kp_path}")
    return EXIT_OK


def _validate_alphas(alphas) -> list[float]:
    out = []
    for a in alphas:
        if not 0.0 <= a <= 1.0:
            raise CliError(EXIT_CONFIG, f"alpha must lie in [0, 1], got {a}")
        out.append(float(a))
    return out


def cmd_match(args) -> int:
    config = _load_app_config(args)
    out = _out_dir(args)
    stages = _Stages()
    alphas = _validate_alphas(args.alpha or [config.matching.alpha])
    if (args.image_b is None) == (args.rotate is None):
        raise CliError(EXIT_CONFIG, "provide either a second image or --rotate ANGLE")

    outputs: dict[str, str] = {}
    matches_obj: dict[str, list] = {}

    if args.rotate is not None:
        stages.start("load")
        image = _load_image(args.image_a, config)
        stages.stop()
        stages.start("match")
        try:
            result = rotated_matching_experiment(image.grid, args.rotate,
                                                 args.num_keypoints, alphas, config,
                                                 render_dir=str(out))
        except (SolverError, ValueError) as exc:
            raise CliError(EXIT_SOLVER, f"matching failed: {exc}")
        stages.stop()
        stages.start("write")
        for alpha, outcome in result.outcomes.items():
            matches_obj[repr(alpha)] = outcome.matches.to_json_obj()
            outputs[f"figure_alpha_{alpha}"] = str(out / f"matches_alpha_{alpha}.png")
        stages.stop()
    else:
        stages.start("load")
        image_a = _load_image(args.image_a, config)
        image_b = _load_image(args.image_b, config)
        stages.stop()
        stages.start("match")
        try:
            kps_a = hierarchical_extract(image_a, config)
            kps_b = hierarchical_extract(image_b, config)
            desc_a = [compute_descriptor(image_a.grid, kp.col, kp.row) for kp in kps_a]
            desc_b = [compute_descriptor(image_b.grid, kp.col, kp.row) for kp in kps_b]
            per_alpha = {
                alpha: match_keypoints(desc_a, desc_b, normalized_inner_product_kernel,
                                       replace(config.matching, alpha=alpha), config.solver)
                for alpha in alphas
            }
        except (SolverError, ValueError) as exc:
            raise CliError(EXIT_SOLVER, f"matching failed: {exc}")
        stages.stop()
        stages.start("write")
        for alpha, outcome in per_alpha.items():
            matches_obj[repr(alpha)] = outcome.matches.to_json_obj()
            png = out / f"matches_alpha_{alpha}.png"
            save_match_figure(image_a.grid, image_b.grid, kps_a, kps_b,
                              outcome.matches.pairs, str(png), title=f"alpha={alpha}")
            outputs[f"figure_alpha_{alpha}"] = str(png)
        stages.stop()

    matches_path = out / "matches.json"
    matches_path.write_text(json.dumps(matches_obj, indent=2) + "\n", encoding="utf-8")
    outputs["matches"] = str(matches_path)
    _write_manifest(out, config, stages, outputs)
    counts = {a: len(v) for a, v in matches_obj.items()}
    print(f"match counts per alpha: {counts} -> {matches_path}")
    return EXIT_OK


def _load_points(args, config: AppConfig) -> np.ndarray:
    if args.points is not None:
        try:
            text = Path(args.points).read_text(encoding="utf-8")
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot read points file: {exc}")
        try:
            rows = [[float(v) for v in line.split(",")]
                    for line in text.strip().splitlines() if line.strip()]
            pts = np.array(rows, dtype=np.float64)
            if pts.ndim != 2 or pts.shape[0] < 1:
                raise ValueError("expected one comma-separated vector per line")
        except ValueError as exc:
            raise CliError(EXIT_CONFIG, f"malformed points file: {exc}")
        return pts
    image = _load_image(args.image, config)
    patches = split_patches(image.grid, config.pipeline.patch_grid)
    if not 0 <= args.patch < len(patches):
        raise CliError(EXIT_CONFIG,
                       f"patch index {args.patch} out of range (0..{len(patches) - 1})")
    return patches[args.patch].feature_vectors(config.pipeline.location_weight)


def cmd_kernel_matrix(args) -> int:
    config = _load_app_config(args)
    out = _out_dir(args)
    stages = _Stages()
    if args.points is None and args.image is None:
        raise CliError(EXIT_CONFIG, "provide --points FILE or --image FILE")

    stages.start("load")
    points = _load_points(args, config)
    stages.stop()

    stages.start("kernel")
    if args.kernel == "gaussian":
        kernel = make_gaussian_kernel(args.gamma)
    elif args.kernel == "cosine":
        kernel = normalized_inner_product_kernel
    else:
        spec = FeatureMapSpec(num_qubits=points.shape[1], input_scale=args.scale)
        shots = "exact" if args.shots is None else args.shots
        kernel = make_quantum_kernel(spec, shots=shots, seed=config.seed)
    try:
        from .kernels import build_kernel_matrix
        matrix = build_kernel_matrix(list(points), None, kernel)
    except ValueError as exc:
        raise CliError(EXIT_SOLVER, f"kernel evaluation failed: {exc}")
    stages.stop()

    stages.start("write")
    csv_path = out / "kernel_matrix.csv"
    csv_path.write_text(matrix.to_csv(), encoding="utf-8")
    png_path = out / "kernel_matrix.png"
    save_heatmap(matrix.entries, str(png_path),
                 title=f"{args.kernel} kernel ({points.shape[0]} points)")
    stages.stop()

    _write_manifest(out, config, stages, {"csv": str(csv_path), "heatmap": str(png_path)})
    print(f"{points.shape[0]}x{points.shape[0]} {args.kernel} kernel matrix -> {csv_path}")
    return EXIT_OK


def cmd_solve(args) -> int:
    config = _load_app_config(args)
    out = _out_dir(args)
    stages = _Stages()

    stages.start("load")
    try:
        text = Path(args.qubo).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read QUBO file: {exc}")
    try:
        problem = QuboProblem.from_json(text)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise CliError(EXIT_CONFIG, f"malformed QUBO JSON: {exc}")
    stages.stop()

    solver_config = config.solver
    if args.solver is not None:
        try:
            solver_config = preset(args.solver, seed=config.seed)
        except ValueError as exc:
            raise CliError(EXIT_CONFIG, str(exc))
    if args.shots is not None:
        solver_config = replace(solver_config, shots=args.shots)

    stages.start("solve")
    try:
        result = solve(problem, solver_config)
    except (SolverError, ValueError) as exc:
        raise CliError(EXIT_SOLVER, f"solve failed: {exc}")
    stages.stop()

    stages.start("write")
    result_path = out / "solve_result.json"
    result_path.write_text(result.to_json() + "\n", encoding="utf-8")
    stages.stop()

    _write_manifest(out, config, stages, {"result": str(result_path)})
    print(f"best energy {result.best.energy} over {len(result.all_samples)} shots "
          f"-> {result_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qubovision",
        description="QUBO-based keypoint extraction and matching toolkit",
    )
    parser.add_argument("--seed", type=int, default=None, help="master random seed")
    parser.add_argument("--threads", type=int, default=None, help="worker thread cap")
    parser.add_argument("--config", default=None, help="YAML config file")
    parser.add_argument("--out-dir", default=".", help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keypoints", help="hierarchical keypoint extraction")
    p.add_argument("image")
    p.set_defaults(func=cmd_keypoints)

    p = sub.add_parser("match", help="match keypoints between two views")
    p.add_argument("image_a")
    p.add_argument("image_b", nargs="?", default=None)
    p.add_argument("--rotate", type=float, default=None, metavar="ANGLE",
                   help="match against a rotated copy instead of a second image")
    p.add_argument("--alpha", type=float, action="append", default=None,
                   help="match-count emphasis in [0,1]; repeatable")
    p.add_argument("--num-keypoints", type=int, default=10,
                   help="keypoints per view in the rotation experiment")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("kernel-matrix", help="compute a kernel matrix (CSV + heatmap)")
    p.add_argument("--points", default=None, help="CSV file, one vector per line")
    p.add_argument("--image", default=None, help="image whose patch provides the points")
    p.add_argument("--patch", type=int, default=0, help="patch index when using --image")
    p.add_argument("--kernel", choices=("gaussian", "cosine", "quantum"), default="gaussian")
    p.add_argument("--gamma", type=float, default=1.0, help="gaussian kernel width")
    p.add_argument("--scale", type=float, default=1.0, help="quantum input scale")
    p.add_argument("--shots", type=int, default=None,
                   help="sample the quantum kernel instead of exact simulation")
    p.set_defaults(func=cmd_kernel_matrix)

    p = sub.add_parser("solve", help="solve a QUBO JSON file directly")
    p.add_argument("qubo")
    p.add_argument("--solver", default=None,
                   help=f"solver preset: {', '.join(sorted(SOLVER_PRESETS))}")
    p.add_argument("--shots", type=int, default=None)
    p.set_defaults(func=cmd_solve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
