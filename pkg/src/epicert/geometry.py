"""Rotations, unit vectors, essential matrices, and the vectorization convention.

A relative pose is a rotation ``r`` (orientation of camera 2 expressed in the
frame of camera 1) together with a unit translation direction ``t`` (direction
from camera 1 toward camera 2).  The essential matrix is ``e = skew(t) @ r``
and pairs with bearing vectors through the epipolar form ``f @ e @ f_prime``,
where ``f`` lives in camera 1 and ``f_prime`` in camera 2.

Everything downstream indexes 3x3 matrices through ``vec``/``unvec``, which
stack column-major.  The 12-vector of the quadratic program is
``[vec(e), t]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import DegenerateInput

if TYPE_CHECKING:  # pragma: no cover
    from .problem import BearingPairs

# rotation by 90 degrees about z; appears in the essential matrix factorization
_W = np.array([
    [0.0, -1.0, 0.0],
    [1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0],
])


def skew(t: np.ndarray) -> np.ndarray:
    """Matrix form of the cross product: skew(t) @ w == cross(t, w)."""
    t1, t2, t3 = np.asarray(t, dtype=float)
    return np.array([
        [0.0, -t3, t2],
        [t3, 0.0, -t1],
        [-t2, t1, 0.0],
    ])


def vee(m: np.ndarray) -> np.ndarray:
    """Inverse of ``skew`` on antisymmetric matrices."""
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def vec(m: np.ndarray) -> np.ndarray:
    """Column-major 9-vector of a 3x3 matrix."""
    return np.asarray(m, dtype=float).reshape(9, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    """3x3 matrix from its column-major 9-vector."""
    return np.asarray(v, dtype=float).reshape(3, 3, order="F")


def so3_exp(omega: np.ndarray) -> np.ndarray:
    """Rotation matrix for a rotation vector (Rodrigues formula)."""
    omega = np.asarray(omega, dtype=float)
    angle = np.linalg.norm(omega)
    k = skew(omega)
    if angle < 1e-12:
        # second-order Taylor keeps the result orthogonal to machine precision
        return np.eye(3) + k + 0.5 * (k @ k)
    return (
        np.eye(3)
        + (np.sin(angle) / angle) * k
        + ((1.0 - np.cos(angle)) / angle**2) * (k @ k)
    )


def normalized(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise DegenerateInput("cannot normalize the zero vector")
    return v / n


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Rotation drawn uniformly from SO(3) (normalized quaternion method)."""
    q = rng.normal(size=4)
    w, x, y, z = q / np.linalg.norm(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def is_rotation(m: np.ndarray, tol: float = 1e-10) -> bool:
    m = np.asarray(m, dtype=float)
    return (
        np.linalg.norm(m.T @ m - np.eye(3)) <= tol
        and abs(np.linalg.det(m) - 1.0) <= tol
    )


@dataclass(frozen=True)
class EssentialElement:
    """An essential matrix with its pose factorization ``e = skew(t) @ r``.

    ``e`` has singular values (1, 1, 0), ``r`` is a rotation, ``t`` is the
    unit left-null direction of ``e``.  Instances are value objects; the held
    arrays are marked read-only.
    """

    e: np.ndarray
    r: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        for name in ("e", "r", "t"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def validate(self, tol: float = 1e-10) -> None:
        """Raise AssertionError if any structural invariant is broken."""
        assert abs(np.linalg.norm(self.t) - 1.0) <= 1e-12
        assert is_rotation(self.r, tol)
        assert np.linalg.norm(self.e - skew(self.t) @ self.r) <= tol
        st = skew(self.t)
        assert np.linalg.norm(self.e @ self.e.T - st @ st.T) <= tol
        s = np.linalg.svd(self.e, compute_uv=False)
        assert np.allclose(s, [1.0, 1.0, 0.0], atol=1e-8)
        assert np.linalg.norm(self.t @ self.e) <= tol


def essential_from_pose(r: np.ndarray, t: np.ndarray) -> EssentialElement:
    """Essential element for a relative pose; ``t`` must be unit norm."""
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    return EssentialElement(e=skew(t) @ r, r=r, t=t)


def primal_point(element: EssentialElement) -> np.ndarray:
    """12-vector ``[vec(e), t]`` feeding the quadratic program."""
    return np.concatenate([vec(element.e), element.t])


def project_to_essential(m: np.ndarray) -> EssentialElement:
    """Nearest essential element to an arbitrary 3x3 matrix (Frobenius).

    Replaces the singular values by (1, 1, 0), which also fixes the overall
    scale.  Raises DegenerateInput when rank(m) < 2: the projection direction
    is then ill-defined.
    """
    m = np.asarray(m, dtype=float)
    u, s, vt = np.linalg.svd(m)
    if s[1] <= 1e-12 * s[0]:
        raise DegenerateInput("matrix is (numerically) rank deficient")
    # sign flips on the null columns leave u @ diag(1,1,0) @ vt unchanged
    if np.linalg.det(u) < 0:
        u = u.copy()
        u[:, 2] = -u[:, 2]
    if np.linalg.det(vt) < 0:
        vt = vt.copy()
        vt[2, :] = -vt[2, :]
    e = u[:, :2] @ vt[:2, :]
    t = u[:, 2]
    r = u @ _W.T @ vt
    return EssentialElement(e=e, r=r, t=t)


def triangulated_depths(
    r: np.ndarray, t: np.ndarray, f: np.ndarray, f_prime: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Depths of the midpoint triangulation of each correspondence.

    Rays are ``d1 * f`` from camera 1 and ``t + d2 * (r @ f_prime)`` from
    camera 2, both in the camera-1 frame.  Pairs with (near-)parallel rays
    get depth -1 so they never count as in front.
    """
    b = f_prime @ r.T
    c = np.einsum("ij,ij->i", f, b)
    at = f @ t
    bt = b @ t
    det = 1.0 - c * c
    ok = det > 1e-12
    safe = np.where(ok, det, 1.0)
    d1 = np.where(ok, (at - c * bt) / safe, -1.0)
    d2 = np.where(ok, (c * at - bt) / safe, -1.0)
    return d1, d2


def recover_pose(
    e: np.ndarray, pairs: "BearingPairs"
) -> tuple[np.ndarray, np.ndarray]:
    """Factor an essential matrix into the pose supported by the data.

    Of the four SVD candidate poses, returns the one that triangulates the
    most correspondences with positive depth in both cameras.  Raises
    DegenerateInput if no candidate places a single point in front of both.
    """
    e = np.asarray(e, dtype=float)
    u, s, vt = np.linalg.svd(e)
    if abs(s[0] - 1.0) > 1e-6 or abs(s[1] - 1.0) > 1e-6 or s[2] > 1e-6:
        raise DegenerateInput("input does not have singular values (1, 1, 0)")
    if np.linalg.det(u) < 0:
        u = u.copy()
        u[:, 2] = -u[:, 2]
    if np.linalg.det(vt) < 0:
        vt = vt.copy()
        vt[2, :] = -vt[2, :]
    r1 = u @ _W @ vt
    r2 = u @ _W.T @ vt
    tc = u[:, 2]
    best: tuple[np.ndarray, np.ndarray] | None = None
    best_count = 0
    for r_cand, t_cand in ((r2, tc), (r2, -tc), (r1, tc), (r1, -tc)):
        d1, d2 = triangulated_depths(r_cand, t_cand, pairs.f, pairs.f_prime)
        count = int(np.count_nonzero((d1 > 0) & (d2 > 0)))
        if count > best_count:
            best_count = count
            best = (r_cand, t_cand)
    if best is None:
        raise DegenerateInput("no candidate pose sees any point in front of both cameras")
    return best
