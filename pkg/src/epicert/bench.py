"""Experiment grids, classification metrics, and pose-error measures.

A grid run sweeps noise levels, point counts and initializers over seeded
synthetic problems, runs the full pipeline on each, and labels every trial
against an independent optimality oracle:

* at zero noise the oracle is exact: the global optimum has zero cost, so a
  trial is optimal iff its cost vanishes (below 1e-12);
* at positive noise the oracle is multi-start consensus: 16 extra descents
  from random elements, the best cost standing in for the true optimum.

Labels follow the certifier's positive/inconclusive nature: TP (optimal and
certified), FNP (optimal but inconclusive), FP (suboptimal yet certified),
TN (suboptimal and inconclusive).  Trials whose solution beats the oracle's
best cost are still labeled optimal but flagged, never silently absorbed.

Per-trial randomness derives from (master seed, cell index, trial index), so
any execution order, including parallel, reproduces a run bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .certifier import OPTIMAL, CertifierConfig
from .initializer import random_essential
from .manifold import RtrConfig, solve_rtr
from .pipeline import estimate_relative_pose
from .problem import build_data_matrix
from .synth import SceneConfig, generate

__all__ = [
    "ExperimentGrid",
    "TrialRecord",
    "GridResults",
    "rotation_error",
    "translation_error",
    "precision_recall",
    "run_grid",
    "summarize",
    "plot_series",
]

NOISELESS_COST_TOL = 1e-12


def rotation_error(r_hat: np.ndarray, r_gt: np.ndarray) -> float:
    """Geodesic distance between two rotations, in degrees."""
    arg = (np.trace(r_hat.T @ r_gt) - 1.0) / 2.0
    return float(np.degrees(np.arccos(np.clip(arg, -1.0, 1.0))))


def translation_error(t_hat: np.ndarray, t_gt: np.ndarray) -> float:
    """Angle between two direction vectors, in degrees."""
    arg = float(np.dot(t_hat, t_gt)) / (np.linalg.norm(t_hat) * np.linalg.norm(t_gt))
    return float(np.degrees(np.arccos(np.clip(arg, -1.0, 1.0))))


@dataclass(frozen=True)
class ExperimentGrid:
    """Sweep definition; the master seed is mandatory on purpose."""

    master_seed: int
    noise_levels: tuple = (0.1, 0.5, 1.0, 2.5)
    point_counts: tuple = (8, 9, 10, 11, 12, 13, 14, 15, 20, 40, 100, 200)
    trials_per_cell: int = 100
    initializers: tuple = ("8pt",)
    fov_deg: float = 100.0
    parallax_range: tuple = (0.5, 2.0)
    depth_range: tuple = (1.0, 8.0)
    focal_px: float = 800.0
    noise_model: str = "uniform"
    oracle_restarts: int = 16
    certifier: CertifierConfig = field(default_factory=CertifierConfig)
    rtr: RtrConfig = field(default_factory=RtrConfig)

    def __post_init__(self):
        if not self.noise_levels or not self.point_counts or not self.initializers:
            raise ValueError("noise levels, point counts and initializers must be nonempty")
        if self.trials_per_cell < 1:
            raise ValueError("need at least one trial per cell")
        if self.master_seed < 0:
            raise ValueError("master seed must be a nonnegative integer")

    def cells(self) -> list[tuple[str, float, int]]:
        return [
            (init, noise, n)
            for init in self.initializers
            for noise in self.noise_levels
            for n in self.point_counts
        ]


@dataclass
class TrialRecord:
    initializer: str
    noise_px: float
    n_points: int
    trial_index: int
    scene_seed: int
    cost: float
    iterations: int
    gradient_norm: float
    rotation_error_deg: float
    translation_error_deg: float
    verdict: str
    gap: float
    min_eigenvalue: float
    dual_value: float
    residual: float
    oracle_optimal: bool
    oracle_flagged: bool
    label: str
    cost_trace: list = field(default_factory=list)


@dataclass
class GridResults:
    grid: ExperimentGrid
    records: list

    def to_dict(self) -> dict:
        return {
            "grid": asdict(self.grid),
            "records": [asdict(r) for r in self.records],
        }


def _trial_seed(master: int, cell_index: int, trial: int, stream: int = 0) -> int:
    ss = np.random.SeedSequence((master, cell_index, trial, stream))
    return int(ss.generate_state(1)[0])


def _label(oracle_optimal: bool, verdict: str) -> str:
    if oracle_optimal:
        return "TP" if verdict == OPTIMAL else "FNP"
    return "FP" if verdict == OPTIMAL else "TN"


def run_grid(grid: ExperimentGrid, progress: bool = False) -> GridResults:
    """Execute every cell of the grid; deterministic in the master seed."""
    records: list[TrialRecord] = []
    oracle_rtr = RtrConfig(
        max_outer_iterations=50,
        gradient_norm_tolerance=1e-8,
        initial_trust_radius=grid.rtr.initial_trust_radius,
        max_trust_radius=grid.rtr.max_trust_radius,
    )
    for cell_index, (init, noise, n) in enumerate(grid.cells()):
        if progress:
            print(f"cell {cell_index + 1}/{len(grid.cells())}: init={init} noise={noise} n={n}")
        for trial in range(grid.trials_per_cell):
            scene_seed = _trial_seed(grid.master_seed, cell_index, trial)
            problem = generate(
                SceneConfig(
                    n_points=n,
                    noise_px=noise,
                    focal_px=grid.focal_px,
                    fov_deg=grid.fov_deg,
                    parallax_range=grid.parallax_range,
                    depth_range=grid.depth_range,
                    seed=scene_seed,
                    noise_model=grid.noise_model,
                )
            )
            data = build_data_matrix(problem.pairs)
            result = estimate_relative_pose(
                problem.pairs,
                init=init,
                rtr_config=grid.rtr,
                certifier_config=grid.certifier,
                data=data,
                seed=_trial_seed(grid.master_seed, cell_index, trial, stream=2),
            )
            cost_hat = result.solve.final_cost
            if noise == 0.0:
                oracle_optimal = cost_hat <= NOISELESS_COST_TOL
                flagged = False
            else:
                rng = np.random.default_rng(
                    _trial_seed(grid.master_seed, cell_index, trial, stream=1)
                )
                best = math.inf
                for _ in range(grid.oracle_restarts):
                    restart = solve_rtr(data, random_essential(rng), oracle_rtr)
                    best = min(best, restart.final_cost)
                oracle_optimal = cost_hat <= best * (1 + 1e-6) + 1e-15
                flagged = cost_hat < best * (1 - 1e-6) - 1e-15
            cert = result.certificate
            records.append(
                TrialRecord(
                    initializer=init,
                    noise_px=noise,
                    n_points=n,
                    trial_index=trial,
                    scene_seed=scene_seed,
                    cost=cost_hat,
                    iterations=result.solve.outer_iterations,
                    gradient_norm=result.solve.gradient_norm,
                    rotation_error_deg=rotation_error(result.rotation, problem.gt_rotation),
                    translation_error_deg=translation_error(
                        result.translation, problem.gt_translation
                    ),
                    verdict=cert.verdict,
                    gap=cert.gap,
                    min_eigenvalue=cert.min_eigenvalue,
                    dual_value=cert.dual_value,
                    residual=cert.residual,
                    oracle_optimal=bool(oracle_optimal),
                    oracle_flagged=bool(flagged),
                    label=_label(bool(oracle_optimal), cert.verdict),
                    cost_trace=result.solve.cost_trace,
                )
            )
    return GridResults(grid=grid, records=records)


def precision_recall(records: list) -> tuple[float | None, float | None]:
    """Classification metrics from labeled trials.

    Precision is TP/(TP+FP), recall TP/(TP+FNP); a vanishing denominator
    yields None (undefined), never a made-up 0 or 1.
    """
    if not records:
        raise ValueError("no records")
    tp = sum(1 for r in records if r.label == "TP")
    fp = sum(1 for r in records if r.label == "FP")
    fnp = sum(1 for r in records if r.label == "FNP")
    precision = tp / (tp + fp) if (tp + fp) > 0 else None
    recall = tp / (tp + fnp) if (tp + fnp) > 0 else None
    return precision, recall


def _quantile(values: list, q: float) -> float:
    return float(np.quantile(np.asarray(values), q)) if values else float("nan")


def summarize(results: GridResults) -> list[dict]:
    """Per-cell summary rows (certified fraction, metrics, error quantiles)."""
    out = []
    for init, noise, n in results.grid.cells():
        cell = [
            r
            for r in results.records
            if r.initializer == init and r.noise_px == noise and r.n_points == n
        ]
        if not cell:
            continue
        precision, recall = precision_recall(cell)
        rot = [r.rotation_error_deg for r in cell]
        out.append(
            {
                "initializer": init,
                "noise_px": noise,
                "n_points": n,
                "trials": len(cell),
                "certified_fraction": sum(r.verdict == OPTIMAL for r in cell) / len(cell),
                "oracle_optimal_fraction": sum(r.oracle_optimal for r in cell) / len(cell),
                "precision": precision,
                "recall": recall,
                "flagged": sum(r.oracle_flagged for r in cell),
                "median_iterations": _quantile([r.iterations for r in cell], 0.5),
                "rotation_error_median_deg": _quantile(rot, 0.5),
                "rotation_error_q90_deg": _quantile(rot, 0.9),
            }
        )
    return out


def plot_series(results: GridResults) -> dict[str, list[dict]]:
    """Figure-ready data series derived from a grid run.

    Keys: ``precision_recall`` (metric curves vs point count per noise
    level), ``iterations`` (convergence effort per initializer),
    ``certified_fraction``, ``rotation_error`` (quantiles vs point count),
    and ``cost_trace`` (one example descent per initializer/noise).
    """
    rows = summarize(results)
    series: dict[str, list[dict]] = {
        "precision_recall": [],
        "iterations": [],
        "certified_fraction": [],
        "rotation_error": [],
        "cost_trace": [],
    }
    for row in rows:
        key = {
            "initializer": row["initializer"],
            "noise_px": row["noise_px"],
            "n_points": row["n_points"],
        }
        series["precision_recall"].append(
            {**key, "precision": row["precision"], "recall": row["recall"]}
        )
        series["iterations"].append(
            {**key, "median_iterations": row["median_iterations"]}
        )
        series["certified_fraction"].append(
            {**key, "certified_fraction": row["certified_fraction"]}
        )
        series["rotation_error"].append(
            {
                **key,
                "rotation_error_median_deg": row["rotation_error_median_deg"],
                "rotation_error_q90_deg": row["rotation_error_q90_deg"],
            }
        )
    seen = set()
    for r in results.records:
        tag = (r.initializer, r.noise_px)
        if tag in seen or not r.cost_trace:
            continue
        seen.add(tag)
        for i, c in enumerate(r.cost_trace):
            series["cost_trace"].append(
                {
                    "initializer": r.initializer,
                    "noise_px": r.noise_px,
                    "n_points": r.n_points,
                    "iteration": i,
                    "cost": c,
                }
            )
    return series
