"""File formats: correspondence CSV/JSON, result JSON, grid results.

Correspondence CSV carries one pair per row under the header
``fx,fy,fz,fpx,fpy,fpz``.  Vectors must be unit norm within 1e-6 on load
(they are renormalized exactly afterwards).  The JSON problem variant embeds
optional ground truth, an inlier mask, and the generating configuration,
which the CSV cannot carry.

Result JSON (one solve) stores matrices row-major: ``essential`` and
``rotation`` as 9 floats, ``translation`` as 3, plus cost, the six
multipliers, gap, smallest dual-matrix eigenvalue, verdict, iteration count,
seed and a config echo.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from pathlib import Path

import numpy as np

from .bench import GridResults, ExperimentGrid, TrialRecord
from .certifier import CertifierConfig
from .manifold import RtrConfig
from .pipeline import PipelineResult
from .problem import BearingPairs
from .synth import SyntheticProblem

__all__ = [
    "save_pairs_csv",
    "load_pairs_csv",
    "save_problem_json",
    "load_problem_json",
    "load_pairs",
    "result_to_dict",
    "save_result_json",
    "load_candidate_essential",
    "save_grid_results",
    "load_grid_results",
    "write_summary_csv",
    "write_plot_series",
]

_CSV_HEADER = ["fx", "fy", "fz", "fpx", "fpy", "fpz"]
_UNIT_TOL = 1e-6


def save_pairs_csv(path, pairs: BearingPairs) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_HEADER)
        for f, fp in zip(pairs.f, pairs.f_prime):
            writer.writerow([f"{v:.17g}" for v in (*f, *fp)])


def _validated_pairs(raw: np.ndarray, source: str) -> BearingPairs:
    if raw.ndim != 2 or raw.shape[1] != 6:
        raise ValueError(f"{source}: expected six columns per correspondence")
    f = raw[:, :3]
    fp = raw[:, 3:]
    for name, arr in (("f", f), ("f_prime", fp)):
        norms = np.linalg.norm(arr, axis=1)
        bad = np.abs(norms - 1.0) > _UNIT_TOL
        if np.any(bad):
            raise ValueError(
                f"{source}: {name} rows {np.flatnonzero(bad).tolist()} are not unit norm"
            )
    f = f / np.linalg.norm(f, axis=1, keepdims=True)
    fp = fp / np.linalg.norm(fp, axis=1, keepdims=True)
    return BearingPairs(f, fp)


def load_pairs_csv(path) -> BearingPairs:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != _CSV_HEADER:
            raise ValueError(f"{path}: expected header {','.join(_CSV_HEADER)}")
        rows = [[float(v) for v in row] for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: no correspondences")
    return _validated_pairs(np.asarray(rows, dtype=float), str(path))


def save_problem_json(
    path,
    pairs: BearingPairs,
    problem: SyntheticProblem | None = None,
    inlier_mask: np.ndarray | None = None,
) -> None:
    payload: dict = {
        "pairs": np.hstack([pairs.f, pairs.f_prime]).tolist(),
    }
    if problem is not None:
        payload["ground_truth"] = {
            "rotation": np.asarray(problem.gt_rotation).flatten().tolist(),
            "translation": np.asarray(problem.gt_translation).tolist(),
            "essential": np.asarray(problem.gt_essential.e).flatten().tolist(),
        }
        payload["config"] = dataclasses.asdict(problem.config)
    if inlier_mask is not None:
        payload["inlier_mask"] = [bool(v) for v in inlier_mask]
    Path(path).write_text(json.dumps(payload, indent=1))


def load_problem_json(path) -> tuple[BearingPairs, dict]:
    payload = json.loads(Path(path).read_text())
    pairs = _validated_pairs(np.asarray(payload["pairs"], dtype=float), str(path))
    meta = {k: v for k, v in payload.items() if k != "pairs"}
    return pairs, meta


def load_pairs(path) -> tuple[BearingPairs, dict]:
    """Load correspondences from either the CSV or the JSON format."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        return load_problem_json(path)
    return load_pairs_csv(path), {}


def result_to_dict(result: PipelineResult, seed: int | None = None, config: dict | None = None) -> dict:
    cert = result.certificate
    return {
        "essential": np.asarray(result.element.e).flatten().tolist(),
        "rotation": np.asarray(result.rotation).flatten().tolist(),
        "translation": np.asarray(result.translation).tolist(),
        "cost": result.solve.final_cost,
        "lambda_hat": np.asarray(cert.lambda_hat).tolist(),
        "gap": cert.gap,
        "min_eigenvalue": cert.min_eigenvalue,
        "verdict": cert.verdict,
        "iterations": result.solve.outer_iterations,
        "seed": seed,
        "config": config or {},
        "initializer": result.initializer,
        "gradient_norm": result.solve.gradient_norm,
        "dual_value": cert.dual_value,
        "residual": cert.residual,
    }


def save_result_json(path, result: PipelineResult, seed: int | None = None, config: dict | None = None) -> None:
    Path(path).write_text(json.dumps(result_to_dict(result, seed, config), indent=1))


def load_candidate_essential(path) -> np.ndarray:
    """Read a 3x3 candidate from a result JSON or an ``{"essential": [...]}`` file."""
    payload = json.loads(Path(path).read_text())
    if "essential" not in payload:
        raise ValueError(f"{path}: no 'essential' field")
    e = np.asarray(payload["essential"], dtype=float)
    if e.size != 9:
        raise ValueError(f"{path}: essential must hold 9 values (row-major)")
    return e.reshape(3, 3)


def save_grid_results(path, results: GridResults) -> None:
    Path(path).write_text(json.dumps(results.to_dict(), indent=1))


def load_grid_results(path) -> GridResults:
    payload = json.loads(Path(path).read_text())
    g = dict(payload["grid"])
    g["noise_levels"] = tuple(g["noise_levels"])
    g["point_counts"] = tuple(g["point_counts"])
    g["initializers"] = tuple(g["initializers"])
    g["parallax_range"] = tuple(g["parallax_range"])
    g["depth_range"] = tuple(g["depth_range"])
    g["certifier"] = CertifierConfig(**g["certifier"])
    g["rtr"] = RtrConfig(**g["rtr"])
    grid = ExperimentGrid(**g)
    records = [TrialRecord(**r) for r in payload["records"]]
    return GridResults(grid=grid, records=records)


def write_summary_csv(path, rows: list[dict]) -> None:
    if not rows:
        raise ValueError("nothing to write")
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def write_plot_series(outdir, series: dict[str, list[dict]]) -> list[str]:
    """One CSV per figure series; returns the written paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, rows in series.items():
        if not rows:
            continue
        path = outdir / f"{name}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
        written.append(str(path))
    return written
