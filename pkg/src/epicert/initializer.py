"""Initial guesses for the manifold refinement.

Three options, from informed to agnostic: the linear eight-point estimate,
a fixed canonical element, and a uniformly random element.  All three return
proper manifold points (the eight-point solution is projected, since the
linear estimate is generally not an essential matrix).
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateConfiguration, InsufficientData
from .geometry import (
    EssentialElement,
    essential_from_pose,
    normalized,
    project_to_essential,
    random_rotation,
    unvec,
)
from .problem import BearingPairs, epipolar_matrix

__all__ = ["eight_point", "random_essential", "identity_init"]


def eight_point(pairs: BearingPairs) -> EssentialElement:
    """Linear estimate from >= 8 bearing pairs, projected onto the manifold.

    The coefficient rows of all pairs form an n x 9 system whose (near-)null
    direction is the vectorized estimate.  When the two smallest singular
    values coincide the null direction is not unique (degenerate point
    configuration) and DegenerateConfiguration is raised.

    No pixel-coordinate rescaling is applied: unit bearing vectors are
    already uniformly conditioned, which is what the classic normalization
    step buys for pixel inputs.
    """
    if len(pairs) < 8:
        raise InsufficientData(f"eight-point needs >= 8 pairs, got {len(pairs)}")
    rows = epipolar_matrix(pairs)
    # full SVD: with exactly 8 rows the null direction only appears in the
    # right factor of the complete decomposition
    _, s, vt = np.linalg.svd(rows, full_matrices=True)
    spectrum = np.zeros(9)
    spectrum[: s.shape[0]] = s
    if spectrum[-2] - spectrum[-1] <= 1e-12 * spectrum[0]:
        raise DegenerateConfiguration(
            "solution direction is not unique (two vanishing singular values)"
        )
    return project_to_essential(unvec(vt[-1]))


def random_essential(seed: int | np.random.Generator = 0) -> EssentialElement:
    """Uniformly random manifold element; deterministic per seed."""
    rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed
    return essential_from_pose(random_rotation(rng), normalized(rng.normal(size=3)))


def identity_init() -> EssentialElement:
    """Fixed canonical element: identity rotation, translation along +z.

    The identity matrix itself is not a valid essential matrix (its singular
    values are all one), so the conventional "start from identity" becomes
    the manifold point with identity rotation and the optical-axis
    translation.
    """
    return essential_from_pose(np.eye(3), np.array([0.0, 0.0, 1.0]))
