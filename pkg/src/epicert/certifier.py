"""Closed-form global-optimality certificate for candidate solutions.

A feasible candidate ``x`` can only be globally optimal if the data gradient
``Q x`` lies in the span of the constraint gradients; the multipliers are
then the unique least-squares solution of the thin linear system
``J(x) lam = Q x`` with ``J(x) = [A_1 x, ..., A_6 x]``.  Because exactly one
redundant constraint was dropped from the feasible-set description, ``J`` has
full column rank at every generic feasible point and the solution is unique.

With the candidate multipliers in hand, the certificate checks two things:

* the dual matrix ``M(lam) = Q - sum(lam_i A_i)`` is positive semidefinite
  (up to the tolerance ``tau_mu``), making ``lam`` dual feasible with dual
  value ``lam_1``;
* the duality gap ``|x.T Q x - lam_1|`` vanishes (up to ``tau_gap``).

Both together squeeze the candidate's cost between the dual lower bound and
itself, so the verdict "Optimal" is sound whenever the tolerances hold; when
either check fails the result is "Unknown" (the candidate may be suboptimal,
or the problem instance may simply not admit a zero-gap certificate).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankDeficientJacobian
from .problem import ProblemData, constraint_jacobian, constraint_residuals, cost

__all__ = [
    "OPTIMAL",
    "UNKNOWN",
    "CertifierConfig",
    "CertificateReport",
    "dual_candidate",
    "hessian_of_lagrangian",
    "min_eigenvalue",
    "certify",
]

OPTIMAL = "Optimal"
UNKNOWN = "Unknown"

_RANK_TOL = 1e-10


@dataclass(frozen=True)
class CertifierConfig:
    """Certificate tolerances.

    ``tau_mu`` bounds how negative the smallest eigenvalue of the dual matrix
    may be; ``tau_gap`` bounds the duality gap.  The gap test is absolute by
    default; with ``relative_gap`` it is applied to ``gap / max(cost, eps)``,
    which decouples the threshold from the cost scale (point count, noise).
    ``feasibility_tol`` is the largest constraint residual accepted in a
    candidate.
    """

    tau_mu: float = -0.02
    tau_gap: float = 1e-14
    relative_gap: bool = False
    feasibility_tol: float = 1e-6

    def __post_init__(self):
        if self.tau_mu > 0:
            raise ValueError("tau_mu must be <= 0")
        if self.tau_gap < 0:
            raise ValueError("tau_gap must be >= 0")


@dataclass(frozen=True)
class CertificateReport:
    """Outcome of one certification run (a value object)."""

    lambda_hat: np.ndarray
    primal_cost: float
    dual_value: float
    gap: float
    min_eigenvalue: float
    residual: float
    verdict: str
    rank_deficient: bool = False

    def __post_init__(self):
        arr = np.array(self.lambda_hat, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "lambda_hat", arr)


def dual_candidate(data: ProblemData, x_hat: np.ndarray) -> tuple[np.ndarray, float]:
    """Candidate multipliers for a feasible point, plus the system residual.

    Solves ``J(x_hat) lam = Q x_hat`` in the least-squares sense through the
    SVD of the 12x6 Jacobian.  Raises RankDeficientJacobian when the smallest
    singular value drops below 1e-10; that happens exactly at the degenerate
    feasible points whose essential matrix has a zero row (translation along
    a coordinate axis), where the multipliers stop being unique.
    """
    x_hat = np.asarray(x_hat, dtype=float)
    j = constraint_jacobian(x_hat)
    u, s, vt = np.linalg.svd(j, full_matrices=False)
    if s[-1] <= _RANK_TOL:
        raise RankDeficientJacobian(
            f"constraint Jacobian is rank deficient (smallest singular value {s[-1]:.2e})"
        )
    b = data.q @ x_hat
    lam = vt.T @ ((u.T @ b) / s)
    residual = float(np.linalg.norm(j @ lam - b))
    return lam, residual


def hessian_of_lagrangian(data: ProblemData, lam: np.ndarray) -> np.ndarray:
    """Dual matrix ``Q - sum(lam_i A_i)``."""
    m = data.q.copy()
    for li, a in zip(np.asarray(lam, dtype=float), data.a):
        m -= li * a
    return m


def min_eigenvalue(m: np.ndarray) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    return float(np.linalg.eigvalsh(m)[0])


def certify(
    data: ProblemData, x_hat: np.ndarray, cfg: CertifierConfig | None = None
) -> CertificateReport:
    """Decide whether a feasible candidate is globally optimal.

    Computes the candidate's cost, the closed-form multipliers, the dual
    value ``lambda_hat[0]`` and the smallest eigenvalue of the dual matrix;
    the verdict is Optimal exactly when the eigenvalue clears ``tau_mu`` and
    the duality gap clears ``tau_gap``.  A rank-deficient Jacobian yields
    verdict Unknown with the ``rank_deficient`` flag set (never Optimal,
    since uniqueness of the multipliers is what makes the certificate valid).
    """
    if cfg is None:
        cfg = CertifierConfig()
    x_hat = np.asarray(x_hat, dtype=float)
    h = constraint_residuals(data, x_hat)
    if np.max(np.abs(h)) > cfg.feasibility_tol:
        raise ValueError(
            f"candidate is not feasible (max constraint residual {np.max(np.abs(h)):.2e})"
        )
    f_r = cost(data, x_hat)
    try:
        lam, residual = dual_candidate(data, x_hat)
    except RankDeficientJacobian:
        nan6 = np.full(6, np.nan)
        return CertificateReport(
            lambda_hat=nan6,
            primal_cost=f_r,
            dual_value=float("nan"),
            gap=float("nan"),
            min_eigenvalue=float("nan"),
            residual=float("nan"),
            verdict=UNKNOWN,
            rank_deficient=True,
        )
    d_r = float(lam[0])
    gap = abs(f_r - d_r)
    mu = min_eigenvalue(hessian_of_lagrangian(data, lam))
    gap_tested = gap / max(f_r, np.finfo(float).eps) if cfg.relative_gap else gap
    verdict = OPTIMAL if (mu >= cfg.tau_mu and gap_tested <= cfg.tau_gap) else UNKNOWN
    return CertificateReport(
        lambda_hat=lam,
        primal_cost=f_r,
        dual_value=d_r,
        gap=gap,
        min_eigenvalue=mu,
        residual=residual,
        verdict=verdict,
    )
