"""Random two-view problem generator.

Scenes mimic a handheld stereo setup: the first camera sits at the origin
looking down +z, world points are sampled inside its viewing cone over a
depth band, and the second camera is placed on a spherical parallax shell
and aimed so that every point is visible to both views.  Bearing noise is
injected in the tangent plane of each unit vector with pixel-scale magnitude
(pixels divided by focal length), matching how detector noise on an image
plane perturbs a calibrated direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GenerationTimeout
from .geometry import EssentialElement, essential_from_pose
from .problem import BearingPairs

__all__ = ["SceneConfig", "SyntheticProblem", "generate", "add_outliers"]


@dataclass(frozen=True)
class SceneConfig:
    n_points: int
    noise_px: float
    focal_px: float = 800.0
    fov_deg: float = 100.0
    parallax_range: tuple[float, float] = (0.5, 2.0)
    depth_range: tuple[float, float] = (1.0, 8.0)
    seed: int = 0
    noise_model: str = "uniform"
    max_attempts: int = 10_000

    def __post_init__(self):
        if self.n_points < 5:
            raise ValueError("need at least 5 points")
        if self.noise_px < 0:
            raise ValueError("noise must be nonnegative")
        if not (0.0 < self.fov_deg < 180.0):
            raise ValueError("field of view must lie in (0, 180) degrees")
        lo, hi = self.parallax_range
        if not (0.0 < lo <= hi):
            raise ValueError("parallax range must satisfy 0 < min <= max")
        lo, hi = self.depth_range
        if not (0.0 < lo <= hi):
            raise ValueError("depth range must satisfy 0 < min <= max")
        if self.noise_model not in ("uniform", "gaussian"):
            raise ValueError("noise_model must be 'uniform' or 'gaussian'")


@dataclass(frozen=True)
class SyntheticProblem:
    pairs: BearingPairs
    gt_rotation: np.ndarray
    gt_translation: np.ndarray
    gt_essential: EssentialElement
    config: SceneConfig


def _look_at_rotation(forward: np.ndarray, reference: np.ndarray) -> np.ndarray | None:
    """Camera orientation with +z along ``forward``; ``reference`` fixes the roll."""
    z = forward / np.linalg.norm(forward)
    x = np.cross(reference, z)
    nx = np.linalg.norm(x)
    if nx < 1e-8:
        return None
    x = x / nx
    y = np.cross(z, x)
    return np.column_stack([x, y, z])


def _in_cone(points: np.ndarray, cos_half_fov: float) -> bool:
    """True when every point has positive depth and lies inside the view cone."""
    z = points[:, 2]
    if np.any(z <= 0):
        return False
    norms = np.linalg.norm(points, axis=1)
    return bool(np.all(z >= cos_half_fov * norms))


def _tangent_noise(rng: np.random.Generator, v: np.ndarray, cfg: SceneConfig) -> np.ndarray:
    """Perturb unit vectors in their tangent planes and renormalize."""
    n = v.shape[0]
    # tangent basis per vector, anchored away from the vector itself
    anchor = np.zeros_like(v)
    anchor[np.arange(n), np.argmin(np.abs(v), axis=1)] = 1.0
    u1 = np.cross(v, anchor)
    u1 /= np.linalg.norm(u1, axis=1, keepdims=True)
    u2 = np.cross(v, u1)
    scale = cfg.noise_px / cfg.focal_px
    if cfg.noise_model == "uniform":
        mag = rng.uniform(0.0, scale, size=n)
        theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
        offsets = mag[:, None] * (np.cos(theta)[:, None] * u1 + np.sin(theta)[:, None] * u2)
    else:
        xy = rng.normal(0.0, scale, size=(n, 2))
        offsets = xy[:, :1] * u1 + xy[:, 1:] * u2
    out = v + offsets
    return out / np.linalg.norm(out, axis=1, keepdims=True)


def generate(config: SceneConfig) -> SyntheticProblem:
    """Draw one two-view problem; deterministic in the config seed.

    The second pose is rejection-sampled (random shell position, random-roll
    aim at the cloud) until every point is inside both view cones; exceeding
    the attempt budget raises GenerationTimeout, which signals an infeasible
    configuration such as a huge parallax with a narrow field of view.
    """
    rng = np.random.default_rng(config.seed)
    half_fov = math.radians(config.fov_deg) / 2.0
    cos_half = math.cos(half_fov)
    tan_half = math.tan(half_fov)

    z = rng.uniform(config.depth_range[0], config.depth_range[1], size=config.n_points)
    radius = z * tan_half * np.sqrt(rng.uniform(0.0, 1.0, size=config.n_points))
    phi = rng.uniform(0.0, 2.0 * np.pi, size=config.n_points)
    points = np.column_stack([radius * np.cos(phi), radius * np.sin(phi), z])
    centroid = points.mean(axis=0)
    spread = float(np.max(np.linalg.norm(points - centroid, axis=1)))

    for _ in range(config.max_attempts):
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        center = direction * rng.uniform(*config.parallax_range)
        target = centroid + rng.normal(size=3) * 0.1 * spread
        reference = rng.normal(size=3)
        reference /= np.linalg.norm(reference)
        rot = _look_at_rotation(target - center, reference)
        if rot is None:
            continue
        points_cam2 = (points - center) @ rot
        if _in_cone(points_cam2, cos_half):
            break
    else:
        raise GenerationTimeout(
            f"no valid second pose within {config.max_attempts} attempts"
        )

    f = points / np.linalg.norm(points, axis=1, keepdims=True)
    f_prime = points_cam2 / np.linalg.norm(points_cam2, axis=1, keepdims=True)
    if config.noise_px > 0:
        f = _tangent_noise(rng, f, config)
        f_prime = _tangent_noise(rng, f_prime, config)

    t_dir = center / np.linalg.norm(center)
    return SyntheticProblem(
        pairs=BearingPairs(f, f_prime),
        gt_rotation=rot,
        gt_translation=t_dir,
        gt_essential=essential_from_pose(rot, t_dir),
        config=config,
    )


def add_outliers(
    problem: SyntheticProblem, fraction: float, seed: int = 0
) -> tuple[BearingPairs, np.ndarray]:
    """Replace a fraction of pairs with random unit directions.

    Returns the contaminated pairs and the boolean ground-truth inlier mask.
    """
    if not (0.0 <= fraction < 1.0):
        raise ValueError("outlier fraction must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    n = len(problem.pairs)
    n_out = int(round(fraction * n))
    mask = np.ones(n, dtype=bool)
    idx = rng.choice(n, size=n_out, replace=False)
    mask[idx] = False
    f = np.array(problem.pairs.f)
    fp = np.array(problem.pairs.f_prime)
    bad_f = rng.normal(size=(n_out, 3))
    bad_fp = rng.normal(size=(n_out, 3))
    f[idx] = bad_f / np.linalg.norm(bad_f, axis=1, keepdims=True)
    fp[idx] = bad_fp / np.linalg.norm(bad_fp, axis=1, keepdims=True)
    return BearingPairs(f, fp), mask
