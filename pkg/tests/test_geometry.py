import numpy as np
import pytest

from epicert.errors import DegenerateInput
from epicert.geometry import (
    EssentialElement,
    essential_from_pose,
    normalized,
    primal_point,
    project_to_essential,
    random_rotation,
    recover_pose,
    skew,
    so3_exp,
    unvec,
    vec,
    vee,
)
from epicert.problem import BearingPairs, constraint_residuals, build_data_matrix
from epicert.synth import SceneConfig, generate

from conftest import random_element


def test_skew_pattern():
    np.testing.assert_array_equal(
        skew([1.0, 2.0, 3.0]),
        [[0, -3, 2], [3, 0, -1], [-2, 1, 0]],
    )


def test_skew_zero():
    np.testing.assert_array_equal(skew([0.0, 0.0, 0.0]), np.zeros((3, 3)))


def test_skew_is_cross_product(rng):
    for _ in range(20):
        t, w = rng.normal(size=3), rng.normal(size=3)
        np.testing.assert_allclose(skew(t) @ w, np.cross(t, w), atol=1e-14)
    t = np.array([0.6, 0.0, 0.8])
    np.testing.assert_allclose(skew(t) @ t, 0.0, atol=1e-15)


def test_vee_inverts_skew(rng):
    v = rng.normal(size=3)
    np.testing.assert_array_equal(vee(skew(v)), v)


def test_vec_is_column_major():
    m = np.arange(9.0).reshape(3, 3)
    np.testing.assert_array_equal(vec(m), [0, 3, 6, 1, 4, 7, 2, 5, 8])
    np.testing.assert_array_equal(unvec(vec(m)), m)


def test_so3_exp_orthogonal(rng):
    for _ in range(20):
        r = so3_exp(rng.normal(size=3))
        np.testing.assert_allclose(r.T @ r, np.eye(3), atol=1e-12)
        assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_array_equal(so3_exp(np.zeros(3)), np.eye(3))


def test_essential_from_identity_pose():
    el = essential_from_pose(np.eye(3), np.array([0.0, 0.0, 1.0]))
    np.testing.assert_allclose(el.e, [[0, -1, 0], [1, 0, 0], [0, 0, 0]], atol=1e-15)


def test_essential_element_invariants(rng):
    worst = 0.0
    for _ in range(1000):
        el = random_element(rng)
        el.validate()
        s = np.linalg.svd(el.e, compute_uv=False)
        worst = max(worst, abs(s[0] - 1), abs(s[1] - 1), s[2])
        assert np.linalg.norm(el.t @ el.e) <= 1e-10
    assert worst <= 1e-12


def test_primal_point_layout_and_feasibility(rng):
    # element labels read row-wise, stacked column-major, translation last
    el = random_element(rng)
    x = primal_point(el)
    e = el.e
    expected = [e[0, 0], e[1, 0], e[2, 0], e[0, 1], e[1, 1], e[2, 1], e[0, 2], e[1, 2], e[2, 2]]
    np.testing.assert_array_equal(x[:9], expected)
    np.testing.assert_array_equal(x[9:], el.t)
    assert abs(np.linalg.norm(x[9:]) - 1.0) <= 1e-12

    data = build_data_matrix(BearingPairs(np.eye(3)[None, 2], np.eye(3)[None, 2]))
    for _ in range(1000):
        h = constraint_residuals(data, primal_point(random_element(rng)))
        assert np.max(np.abs(h)) <= 1e-9


def test_project_to_essential_fixed_point(rng):
    el = random_element(rng)
    back = project_to_essential(el.e)
    assert np.linalg.norm(back.e - el.e) <= 1e-10


def test_project_to_essential_diag():
    el = project_to_essential(np.diag([3.0, 2.0, 1.0]))
    np.testing.assert_allclose(el.e, np.diag([1.0, 1.0, 0.0]), atol=1e-12)
    el.validate()


def test_project_to_essential_idempotent(rng):
    for _ in range(50):
        m = rng.normal(size=(3, 3))
        once = project_to_essential(m)
        twice = project_to_essential(once.e)
        assert np.linalg.norm(once.e - twice.e) <= 1e-10


def test_project_to_essential_rank_one():
    u = np.array([1.0, 2.0, 3.0])
    with pytest.raises(DegenerateInput):
        project_to_essential(np.outer(u, u))


def test_recover_pose_roundtrip(rng):
    for seed in range(30):
        prob = generate(SceneConfig(n_points=20, noise_px=0.0, seed=seed))
        r, t = recover_pose(prob.gt_essential.e, prob.pairs)
        assert np.linalg.norm(r - prob.gt_rotation) <= 1e-6
        assert np.linalg.norm(t - prob.gt_translation) <= 1e-6


def test_recover_pose_sign_invariant(noiseless_scene):
    r1, t1 = recover_pose(noiseless_scene.gt_essential.e, noiseless_scene.pairs)
    r2, t2 = recover_pose(-noiseless_scene.gt_essential.e, noiseless_scene.pairs)
    np.testing.assert_array_equal(r1, r2)
    np.testing.assert_array_equal(t1, t2)


def test_recover_pose_no_point_in_front():
    # zero-parallax pairs along the translation axis: rays stay parallel under
    # every candidate pose, so no point triangulates in front of both cameras
    e3 = np.array([0.0, 0.0, 1.0])
    pairs = BearingPairs(np.tile(e3, (4, 1)), np.tile(e3, (4, 1)))
    el = essential_from_pose(np.eye(3), e3)
    with pytest.raises(DegenerateInput):
        recover_pose(el.e, pairs)


def test_recover_pose_rejects_non_essential(noiseless_scene):
    with pytest.raises(DegenerateInput):
        recover_pose(np.eye(3), noiseless_scene.pairs)


def test_recover_pose_inverts_construction(rng):
    # recover(essential_from_pose(r, t)) == (r, t) on noiseless synthetic scenes
    for seed in range(10):
        prob = generate(SceneConfig(n_points=20, noise_px=0.0, seed=100 + seed))
        el = essential_from_pose(prob.gt_rotation, prob.gt_translation)
        r, t = recover_pose(el.e, prob.pairs)
        np.testing.assert_allclose(r, prob.gt_rotation, atol=1e-9)
        np.testing.assert_allclose(t, prob.gt_translation, atol=1e-9)


def test_element_arrays_read_only(rng):
    el = random_element(rng)
    with pytest.raises(ValueError):
        el.e[0, 0] = 5.0
