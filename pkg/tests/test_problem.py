import numpy as np
import pytest

from epicert.errors import EmptyInput
from epicert.geometry import normalized, primal_point, vec
from epicert.problem import (
    BearingPairs,
    CONSTRAINT_MATRICES,
    DROPPED_CONSTRAINT_MATRIX,
    algebraic_residuals,
    build_data_matrix,
    constraint_jacobian,
    constraint_residuals,
    cost,
    dropped_jacobian_nullspace,
    epipolar_matrix,
)
from epicert.synth import SceneConfig, generate

from conftest import random_element, random_feasible_x


def unit_rows(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def test_bearing_pairs_validation(rng):
    f = unit_rows(rng, 5)
    with pytest.raises(ValueError):
        BearingPairs(f * 1.001, f)
    with pytest.raises(ValueError):
        BearingPairs(f[:, :2], f[:, :2])
    pairs = BearingPairs(f, f)
    assert len(pairs) == 5
    sub = pairs[[0, 2]]
    assert len(sub) == 2
    np.testing.assert_array_equal(sub.f, f[[0, 2]])


def test_empty_input():
    with pytest.raises(EmptyInput):
        build_data_matrix(BearingPairs(np.zeros((0, 3)), np.zeros((0, 3))))


def test_single_pair_data_matrix():
    # f = f' = e_z excites only the last vec component
    e3 = np.array([[0.0, 0.0, 1.0]])
    data = build_data_matrix(BearingPairs(e3, e3))
    expected = np.zeros((9, 9))
    expected[8, 8] = 1.0
    np.testing.assert_array_equal(data.c, expected)


def test_data_matrix_invariants(rng, noisy_scene):
    data = build_data_matrix(noisy_scene.pairs)
    assert data.n_points == len(noisy_scene.pairs)
    np.testing.assert_array_equal(data.c, data.c.T)
    assert np.linalg.eigvalsh(data.c)[0] >= -1e-10
    np.testing.assert_array_equal(data.q[:9, :9], data.c)
    np.testing.assert_array_equal(data.q[9:, :], 0.0)
    np.testing.assert_array_equal(data.q[:, 9:], 0.0)
    # c and q share the nonzero spectrum; q gains three zero eigenvalues
    ev_c = np.sort(np.linalg.eigvalsh(data.c))
    ev_q = np.sort(np.linalg.eigvalsh(data.q))
    np.testing.assert_allclose(ev_q[3:], ev_c, atol=1e-9)
    assert np.all(np.abs(ev_q[:3]) <= 1e-9)


def test_normalized_data_matrix(noisy_scene):
    raw = build_data_matrix(noisy_scene.pairs)
    scaled = build_data_matrix(noisy_scene.pairs, normalize=True)
    np.testing.assert_allclose(scaled.c * raw.n_points, raw.c, atol=1e-12)


def test_per_pair_quadratic_identity(rng):
    # vec(E).T C_i vec(E) equals the squared scalar residual, pair by pair
    worst = 0.0
    for _ in range(1000):
        f = normalized(rng.normal(size=3))
        fp = normalized(rng.normal(size=3))
        el = random_element(rng)
        data = build_data_matrix(BearingPairs(f[None], fp[None]))
        quad = float(vec(el.e) @ data.c @ vec(el.e))
        direct = float(f @ el.e @ fp) ** 2
        worst = max(worst, abs(quad - direct))
    assert worst <= 1e-12


def test_constraint_values_against_row_formulas(rng):
    # independent evaluation of each constraint from the rows of E and t
    for _ in range(200):
        el = random_element(rng)
        x = rng.normal(size=12)
        e = np.array([[x[0], x[3], x[6]], [x[1], x[4], x[7]], [x[2], x[5], x[8]]])
        t = x[9:]
        data = build_data_matrix(BearingPairs(*2 * [normalized(rng.normal(size=3))[None]]))
        h = constraint_residuals(data, x)
        expected = np.array(
            [
                t @ t - 1.0,
                e[0] @ e[0] - (t[1] ** 2 + t[2] ** 2),
                e[1] @ e[1] - (t[0] ** 2 + t[2] ** 2),
                e[2] @ e[2] - (t[0] ** 2 + t[1] ** 2),
                e[0] @ e[2] + t[0] * t[2],
                e[1] @ e[2] + t[1] * t[2],
            ]
        )
        np.testing.assert_allclose(h, expected, atol=1e-12)


def test_constraint_residuals_special_points(noisy_data):
    # E = 0, t = e_1: only the row-norm constraints of rows 2 and 3 fire
    x = np.zeros(12)
    x[9] = 1.0
    np.testing.assert_allclose(
        constraint_residuals(noisy_data, x), [0, 0, -1, -1, 0, 0], atol=1e-15
    )
    np.testing.assert_allclose(
        constraint_residuals(noisy_data, np.zeros(12)), [-1, 0, 0, 0, 0, 0], atol=1e-15
    )


def test_t_block_constraint(noisy_data, rng):
    x = rng.normal(size=12)
    assert x @ noisy_data.a[0] @ x == pytest.approx(x[9:] @ x[9:], abs=1e-14)
    np.testing.assert_array_equal(
        noisy_data.a[0], np.diag([0.0] * 9 + [1.0] * 3)
    )


def test_cost_matches_quadratic_form(noisy_data, rng):
    for _ in range(50):
        x = rng.normal(size=12)
        assert cost(noisy_data, x) == pytest.approx(float(x @ noisy_data.q @ x), rel=1e-9, abs=1e-12)


def test_cost_zero_at_ground_truth(noiseless_scene):
    data = build_data_matrix(noiseless_scene.pairs)
    x = primal_point(noiseless_scene.gt_essential)
    assert cost(data, x) <= 1e-18


def test_cost_positive_off_ground_truth(noiseless_scene):
    from epicert.geometry import essential_from_pose, so3_exp

    data = build_data_matrix(noiseless_scene.pairs)
    r_off = noiseless_scene.gt_rotation @ so3_exp(np.radians(5.0) * np.array([1.0, 0, 0]))
    x = primal_point(essential_from_pose(r_off, noiseless_scene.gt_translation))
    assert cost(data, x) > 1e-8


def test_cost_quadratic_homogeneity(noisy_data, rng):
    x = rng.normal(size=12)
    doubled = np.concatenate([2.0 * x[:9], x[9:]])
    assert cost(noisy_data, doubled) == pytest.approx(4.0 * cost(noisy_data, x), rel=1e-12)


def test_constraint_matrices_exactly_symmetric():
    for a in (*CONSTRAINT_MATRICES, DROPPED_CONSTRAINT_MATRIX):
        assert np.array_equal(a, a.T)


def test_constraint_gradient_identity(rng):
    # finite difference of x.T A x against 2 A x
    for a in CONSTRAINT_MATRICES:
        x = rng.normal(size=12)
        g = 2.0 * a @ x
        eps = 1e-6
        for k in range(12):
            dx = np.zeros(12)
            dx[k] = eps
            fd = ((x + dx) @ a @ (x + dx) - (x - dx) @ a @ (x - dx)) / (2 * eps)
            assert fd == pytest.approx(g[k], rel=1e-6, abs=1e-9)


def test_jacobian_zero_point():
    np.testing.assert_array_equal(constraint_jacobian(np.zeros(12)), np.zeros((12, 6)))
    np.testing.assert_array_equal(
        constraint_jacobian(np.zeros(12), include_dropped=True), np.zeros((12, 7))
    )


def test_jacobian_columns_are_gradients(rng):
    x = rng.normal(size=12)
    j = constraint_jacobian(x)
    for i, a in enumerate(CONSTRAINT_MATRICES):
        np.testing.assert_array_equal(j[:, i], a @ x)


def test_seven_column_nullspace_and_ranks(rng):
    # the extended Jacobian keeps rank 6 with the analytic nullspace direction,
    # while the reduced six-column form is full rank at random feasible points
    for _ in range(1000):
        el = random_element(rng)
        x = primal_point(el)
        j7 = constraint_jacobian(x, include_dropped=True)
        phi = dropped_jacobian_nullspace(el.t)
        assert np.linalg.norm(j7 @ phi) <= 1e-10
        j6 = constraint_jacobian(x)
        s6 = np.linalg.svd(j6, compute_uv=False)
        s7 = np.linalg.svd(j7, compute_uv=False)
        assert s6[-1] > 1e-8
        assert np.sum(s7 > 1e-8) == 6


def test_seven_column_ordering(rng):
    # dropped column sits second; the layout reproduces the analytic pattern
    # row 1: (0, e4/2, e1, e7/2, 0, 0, 0) in the row-wise element labels
    el = random_element(rng)
    x = primal_point(el)
    j7 = constraint_jacobian(x, include_dropped=True)
    e = el.e
    np.testing.assert_allclose(
        j7[0], [0.0, e[1, 0] / 2, e[0, 0], e[2, 0] / 2, 0.0, 0.0, 0.0], atol=1e-15
    )
    t = el.t
    np.testing.assert_allclose(
        j7[9], [t[0], t[1] / 2, 0.0, t[2] / 2, -t[0], 0.0, -t[0]], atol=1e-15
    )
    np.testing.assert_allclose(
        j7[10], [t[1], t[0] / 2, -t[1], 0.0, 0.0, t[2] / 2, -t[1]], atol=1e-15
    )
    np.testing.assert_allclose(
        j7[11], [t[2], 0.0, -t[2], t[0] / 2, -t[2], t[1] / 2, 0.0], atol=1e-15
    )


def test_epipolar_rows_match_residuals(rng, noisy_scene):
    el = random_element(rng)
    res = algebraic_residuals(el.e, noisy_scene.pairs)
    direct = np.array([f @ el.e @ fp for f, fp in zip(noisy_scene.pairs.f, noisy_scene.pairs.f_prime)])
    np.testing.assert_allclose(res, direct, atol=1e-14)
    assert epipolar_matrix(noisy_scene.pairs).shape == (len(noisy_scene.pairs), 9)
