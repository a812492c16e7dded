import numpy as np
import pytest

from epicert.errors import InsufficientData
from epicert.problem import algebraic_residuals
from epicert.ransac import RansacConfig, ransac_essential
from epicert.synth import SceneConfig, add_outliers, generate


def test_config_validation():
    with pytest.raises(ValueError):
        RansacConfig(sample_size=5)
    with pytest.raises(ValueError):
        RansacConfig(inlier_threshold=0.0)
    with pytest.raises(ValueError):
        RansacConfig(confidence=1.0)


def test_insufficient_data():
    prob = generate(SceneConfig(n_points=7, noise_px=0.0, seed=0))
    with pytest.raises(InsufficientData):
        ransac_essential(prob.pairs)


def test_clean_noiseless_input():
    prob = generate(SceneConfig(n_points=30, noise_px=0.0, seed=3))
    report = ransac_essential(prob.pairs, RansacConfig(seed=1))
    assert report.inlier_mask.all()
    assert report.inlier_count == 30
    gt = prob.gt_essential.e
    err = min(np.linalg.norm(report.best_model.e - gt), np.linalg.norm(report.best_model.e + gt))
    assert err <= 1e-6
    report.best_model.validate()


def test_mask_consistent_with_threshold():
    prob = generate(SceneConfig(n_points=80, noise_px=0.5, seed=6))
    pairs, _ = add_outliers(prob, 0.2, seed=2)
    cfg = RansacConfig(inlier_threshold=3e-6, sample_size=12, max_iterations=500, seed=5)
    report = ransac_essential(pairs, cfg)
    sq = algebraic_residuals(report.best_model.e, pairs) ** 2
    np.testing.assert_array_equal(report.inlier_mask, sq < cfg.inlier_threshold)
    assert report.inlier_count == int(report.inlier_mask.sum())


def test_deterministic_per_seed():
    prob = generate(SceneConfig(n_points=60, noise_px=0.5, seed=9))
    pairs, _ = add_outliers(prob, 0.3, seed=4)
    cfg = RansacConfig(seed=11, inlier_threshold=3e-6, sample_size=12)
    a = ransac_essential(pairs, cfg)
    b = ransac_essential(pairs, cfg)
    np.testing.assert_array_equal(a.inlier_mask, b.inlier_mask)
    np.testing.assert_array_equal(a.best_model.e, b.best_model.e)
    assert a.iterations_used == b.iterations_used


def test_iteration_budget_monotone():
    prob = generate(SceneConfig(n_points=60, noise_px=0.5, seed=12))
    pairs, _ = add_outliers(prob, 0.3, seed=3)
    counts = []
    for max_iter in (20, 100, 500):
        cfg = RansacConfig(seed=2, max_iterations=max_iter, inlier_threshold=3e-6, sample_size=12)
        counts.append(ransac_essential(pairs, cfg).inlier_count)
    assert counts[0] <= counts[1] <= counts[2]


def test_outlier_classification():
    # 30% gross outliers at moderate noise: nearly all pairs classified right
    tp = fp = fn = 0
    for seed in range(25):
        prob = generate(SceneConfig(n_points=100, noise_px=0.5, seed=50_000 + seed))
        pairs, mask = add_outliers(prob, 0.3, seed=seed)
        cfg = RansacConfig(inlier_threshold=3e-6, sample_size=12, max_iterations=2000, seed=seed)
        report = ransac_essential(pairs, cfg)
        tp += int(np.sum(report.inlier_mask & mask))
        fp += int(np.sum(report.inlier_mask & ~mask))
        fn += int(np.sum(~report.inlier_mask & mask))
    assert tp / (tp + fn) >= 0.95
    assert fp / max(tp + fp, 1) <= 0.05
