"""Hypothesize-and-verify outlier rejection around the eight-point estimator.

Classic scheme: sample a minimal-for-us set of 8 pairs, fit a candidate with
the linear estimator, count pairs whose squared epipolar residual clears the
threshold, keep the best candidate, and shrink the iteration budget
adaptively as the observed inlier ratio improves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConfiguration, InsufficientData, NoModelFound
from .geometry import EssentialElement, vec
from .initializer import eight_point
from .problem import BearingPairs, epipolar_matrix

__all__ = ["RansacConfig", "RansacReport", "ransac_essential"]


@dataclass(frozen=True)
class RansacConfig:
    max_iterations: int = 1000
    inlier_threshold: float = 1e-6
    sample_size: int = 8
    confidence: float = 0.99
    seed: int = 0

    def __post_init__(self):
        if self.sample_size < 8:
            raise ValueError("sample size must be >= 8 (eight-point hypotheses)")
        if self.inlier_threshold <= 0:
            raise ValueError("inlier threshold must be positive")
        if not (0.0 < self.confidence < 1.0):
            raise ValueError("confidence must lie in (0, 1)")


@dataclass(frozen=True)
class RansacReport:
    best_model: EssentialElement
    inlier_mask: np.ndarray
    iterations_used: int
    inlier_count: int


def _adaptive_bound(inlier_ratio: float, sample_size: int, confidence: float) -> int:
    w = inlier_ratio**sample_size
    if w >= 1.0:
        return 1
    if w <= 1e-15:
        return np.iinfo(np.int64).max
    needed = math.log(1.0 - confidence) / math.log1p(-w)
    if needed >= float(np.iinfo(np.int64).max):
        return np.iinfo(np.int64).max
    return int(math.ceil(needed))


def ransac_essential(pairs: BearingPairs, cfg: RansacConfig | None = None) -> RansacReport:
    """Find the consensus essential matrix of a contaminated pair set.

    Deterministic per seed.  Ties in inlier count keep the earlier
    hypothesis.  After the sampling loop the winner is re-estimated on its
    consensus set and the mask re-derived, iterated until stable; this
    standard refit step removes most of the minimal-sample estimation error
    without changing the hypothesize-and-verify structure.  Raises
    InsufficientData for fewer pairs than one sample and NoModelFound when
    every sampled hypothesis was degenerate.
    """
    if cfg is None:
        cfg = RansacConfig()
    n = len(pairs)
    if n < cfg.sample_size:
        raise InsufficientData(f"need at least {cfg.sample_size} pairs, got {n}")
    rng = np.random.default_rng(cfg.seed)
    rows = epipolar_matrix(pairs)
    best_model = None
    best_mask = None
    best_count = 0
    bound = cfg.max_iterations
    it = 0
    while it < bound:
        it += 1
        idx = rng.choice(n, size=cfg.sample_size, replace=False)
        try:
            model = eight_point(pairs[idx])
        except DegenerateConfiguration:
            continue
        sq = (rows @ vec(model.e)) ** 2
        mask = sq < cfg.inlier_threshold
        count = int(np.count_nonzero(mask))
        if count > best_count:
            best_model, best_mask, best_count = model, mask, count
            bound = min(cfg.max_iterations, _adaptive_bound(count / n, cfg.sample_size, cfg.confidence))
    if best_model is None:
        raise NoModelFound("all sampled hypotheses were degenerate")
    # consensus refit: re-estimate on the current inlier set and re-derive the
    # mask; the count may dip for a round while a stray admitted outlier
    # washes out, so iterate on the latest mask but report the best state seen
    model, mask, count = best_model, best_mask, best_count
    for _ in range(8):
        if count < cfg.sample_size:
            break
        try:
            refit = eight_point(pairs[mask])
        except DegenerateConfiguration:
            break
        sq = (rows @ vec(refit.e)) ** 2
        new_mask = sq < cfg.inlier_threshold
        new_count = int(np.count_nonzero(new_mask))
        stable = bool(np.array_equal(new_mask, mask))
        model, mask, count = refit, new_mask, new_count
        if count >= best_count:
            best_model, best_mask, best_count = model, mask, count
        if stable:
            break
    return RansacReport(
        best_model=best_model,
        inlier_mask=best_mask,
        iterations_used=it,
        inlier_count=best_count,
    )
