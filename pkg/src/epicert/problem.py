"""Cost and constraint structure of the relative pose quadratic program.

The unknown is the 12-vector ``x = [vec(E), t]``.  The objective is
``x.T @ Q @ x`` with ``Q = blockdiag(C, 0)`` built from the correspondences,
and the feasible set is cut out by six quadratic equality constraints
``x.T @ A_i @ x = c_i`` (c_1 = 1, the rest 0):

    h1: t.t - 1
    h2: |row1(E)|^2 - (t2^2 + t3^2)
    h3: |row2(E)|^2 - (t1^2 + t3^2)
    h4: |row3(E)|^2 - (t1^2 + t2^2)
    h5: row1(E).row3(E) + t1*t3
    h6: row2(E).row3(E) + t2*t3

A seventh constraint of the same family, ``row1(E).row2(E) + t1*t2``, is
deliberately left out of the feasible set: with it the constraint gradients
are linearly dependent at every feasible point and the Lagrange multipliers
stop being unique.  Its matrix is kept here only so tests can exercise that
rank structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput
from .geometry import vec

__all__ = [
    "BearingPairs",
    "ProblemData",
    "build_data_matrix",
    "cost",
    "constraint_residuals",
    "constraint_jacobian",
    "epipolar_matrix",
    "algebraic_residuals",
    "dropped_jacobian_nullspace",
    "CONSTRAINT_MATRICES",
    "DROPPED_CONSTRAINT_MATRIX",
]


@dataclass(frozen=True)
class BearingPairs:
    """Unit bearing vectors ``f`` (camera 1) matched to ``f_prime`` (camera 2)."""

    f: np.ndarray
    f_prime: np.ndarray

    def __post_init__(self):
        # own copies: the held arrays are frozen, the caller's must not be
        f = np.atleast_2d(np.array(self.f, dtype=float))
        fp = np.atleast_2d(np.array(self.f_prime, dtype=float))
        if f.shape != fp.shape or f.shape[1] != 3:
            raise ValueError("bearing arrays must both have shape (n, 3)")
        for arr in (f, fp):
            if np.any(np.abs(np.linalg.norm(arr, axis=1) - 1.0) > 1e-12):
                raise ValueError("bearing vectors must have unit norm")
            arr.flags.writeable = False
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "f_prime", fp)

    def __len__(self) -> int:
        return self.f.shape[0]

    def __getitem__(self, index) -> "BearingPairs":
        return BearingPairs(self.f[index], self.f_prime[index])


def _symmetric_entries(pairs_of_indices: list[tuple[int, int]], value: float) -> np.ndarray:
    m = np.zeros((12, 12))
    for i, j in pairs_of_indices:
        m[i, j] = value
        m[j, i] = value
    return m


def _diag_entries(plus: list[int], minus: list[int]) -> np.ndarray:
    m = np.zeros((12, 12))
    for i in plus:
        m[i, i] = 1.0
    for i in minus:
        m[i, i] = -1.0
    return m


# x layout (0-based): x[0,3,6] = row1(E), x[1,4,7] = row2(E),
# x[2,5,8] = row3(E), x[9:12] = t.  (vec(E) stacks columns.)
_A1 = _diag_entries([9, 10, 11], [])
_A2 = _diag_entries([0, 3, 6], [10, 11])
_A3 = _diag_entries([1, 4, 7], [9, 11])
_A4 = _diag_entries([2, 5, 8], [9, 10])
_A5 = _symmetric_entries([(0, 2), (3, 5), (6, 8), (9, 11)], 0.5)
_A6 = _symmetric_entries([(1, 2), (4, 5), (7, 8), (10, 11)], 0.5)
_A_DROPPED = _symmetric_entries([(0, 1), (3, 4), (6, 7), (9, 10)], 0.5)

for _m in (_A1, _A2, _A3, _A4, _A5, _A6, _A_DROPPED):
    _m.flags.writeable = False

CONSTRAINT_MATRICES: tuple[np.ndarray, ...] = (_A1, _A2, _A3, _A4, _A5, _A6)
DROPPED_CONSTRAINT_MATRIX: np.ndarray = _A_DROPPED

# constant right-hand sides of the constraints x.T A_i x = c_i
CONSTRAINT_VALUES = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])


@dataclass(frozen=True)
class ProblemData:
    """Quadratic data for one problem instance.

    ``c`` is the 9x9 PSD cost matrix on vec(E), ``q`` its 12x12 zero-padded
    form, ``a`` the six constraint matrices and ``a_dropped`` the excluded
    seventh (tests only).  ``rows`` keeps the per-pair coefficient rows whose
    Gram matrix is ``c``; summing squared per-pair residuals through them is
    numerically exact near zero cost, where the pre-summed ``c`` loses
    everything below its rounding floor.
    """

    c: np.ndarray
    q: np.ndarray
    a: tuple[np.ndarray, ...]
    a_dropped: np.ndarray
    n_points: int
    rows: np.ndarray = None

    def __post_init__(self):
        for name in ("c", "q", "rows"):
            if getattr(self, name) is None:
                continue
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def epipolar_matrix(pairs: BearingPairs) -> np.ndarray:
    """(n, 9) matrix whose rows satisfy row_i @ vec(E) == f_i @ E @ f'_i."""
    n = len(pairs)
    return (pairs.f_prime[:, :, None] * pairs.f[:, None, :]).reshape(n, 9)


def algebraic_residuals(e: np.ndarray, pairs: BearingPairs) -> np.ndarray:
    """Per-pair epipolar residuals ``f_i @ e @ f'_i``."""
    return epipolar_matrix(pairs) @ vec(e)


def build_data_matrix(pairs: BearingPairs, normalize: bool = False) -> ProblemData:
    """Assemble cost and constraint matrices for a set of correspondences.

    With ``normalize`` the cost matrix is divided by the number of pairs,
    decoupling cost magnitudes (and hence absolute certification thresholds)
    from the point count.  Default keeps the raw sum of squared residuals.
    """
    n = len(pairs)
    if n == 0:
        raise EmptyInput("need at least one correspondence")
    rows = epipolar_matrix(pairs)
    if normalize:
        rows = rows / math.sqrt(n)
    c = rows.T @ rows
    c = 0.5 * (c + c.T)
    q = np.zeros((12, 12))
    q[:9, :9] = c
    return ProblemData(
        c=c,
        q=q,
        a=CONSTRAINT_MATRICES,
        a_dropped=DROPPED_CONSTRAINT_MATRIX,
        n_points=n,
        rows=rows,
    )


def cost(data: ProblemData, x: np.ndarray) -> float:
    """Value of the quadratic objective at a 12-vector ``[vec(E), t]``.

    Evaluated as the sum of squared per-pair residuals, which agrees with the
    quadratic form ``x.T Q x`` but keeps full accuracy near zero.
    """
    v = np.asarray(x, dtype=float)[:9]
    if data.rows is not None:
        r = data.rows @ v
        return float(r @ r)
    return max(float(v @ data.c @ v), 0.0)


def constraint_residuals(data: ProblemData, x: np.ndarray) -> np.ndarray:
    """The six values ``x.T A_i x - c_i``; all zero on feasible points."""
    x = np.asarray(x, dtype=float)
    return np.array([x @ a @ x for a in data.a]) - CONSTRAINT_VALUES


def constraint_jacobian(x: np.ndarray, include_dropped: bool = False) -> np.ndarray:
    """Stack of constraint gradients (up to the factor 2): column i is A_i @ x.

    The 12x6 form orders columns h1..h6 so that multiplier indices line up
    with the dual variable (lambda_1 is the dual objective).  With
    ``include_dropped`` the excluded constraint's column is inserted second
    and the rest permuted to (h1, dropped, h2, h5, h3, h6, h4); in that
    ordering the 7-column matrix has the analytic nullspace direction
    returned by :func:`dropped_jacobian_nullspace`.
    """
    x = np.asarray(x, dtype=float)
    cols = [a @ x for a in CONSTRAINT_MATRICES]
    if include_dropped:
        d = DROPPED_CONSTRAINT_MATRIX @ x
        cols = [cols[0], d, cols[1], cols[4], cols[2], cols[5], cols[3]]
    return np.stack(cols, axis=1)


def dropped_jacobian_nullspace(t: np.ndarray) -> np.ndarray:
    """Nullspace direction of the 7-column constraint Jacobian at a feasible point."""
    t1, t2, t3 = np.asarray(t, dtype=float)
    return np.array([0.0, 2 * t1 * t2, t1 * t1, 2 * t1 * t3, t2 * t2, 2 * t2 * t3, t3 * t3])
