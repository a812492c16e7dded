import numpy as np
import pytest

from epicert.geometry import essential_from_pose, normalized, random_rotation
from epicert.problem import BearingPairs, build_data_matrix
from epicert.synth import SceneConfig, generate


@pytest.fixture
def rng():
    return np.random.default_rng(20240915)


def random_element(rng):
    """Random manifold element (rotation uniform, translation uniform on the sphere)."""
    return essential_from_pose(random_rotation(rng), normalized(rng.normal(size=3)))


def random_feasible_x(rng):
    from epicert.geometry import primal_point

    return primal_point(random_element(rng))


@pytest.fixture
def noiseless_scene():
    return generate(SceneConfig(n_points=20, noise_px=0.0, seed=7))


@pytest.fixture
def noisy_scene():
    return generate(SceneConfig(n_points=100, noise_px=0.5, seed=11))


@pytest.fixture
def noisy_data(noisy_scene):
    return build_data_matrix(noisy_scene.pairs)


def scene_pair_subset(problem, k, seed=0):
    idx = np.random.default_rng(seed).choice(len(problem.pairs), size=k, replace=False)
    return problem.pairs[idx]
