"""Trust-region refinement on the essential matrix manifold.

Points are pose factorizations ``(r, t)`` with ``e = skew(t) @ r``, i.e. the
product of the rotation group and the unit sphere.  A tangent vector is a
body angular rate ``omega`` for the rotation plus a sphere tangent ``dt``
(``dt @ t == 0``); the metric is the sum of the two Euclidean inner products.
Moving a point means ``r <- r @ exp(skew(omega))`` and
``t <- (t + dt) / |t + dt|``, which agrees with the geodesics to second
order, so the Hessian of the pulled-back cost computed here is the genuine
Riemannian Hessian.

The differential of the embedding is

    de(omega, dt) = skew(dt) @ r + skew(t) @ r @ skew(omega)

and the gradient/Hessian formulas below are its adjoints applied to the
ambient derivatives of the quadratic cost, ``2 C vec(E)`` for the gradient
and ``2 C vec(U)`` for the Hessian action, plus the curvature terms coming
from the second derivative of the embedding itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernel
from .errors import NonFiniteCost
from .geometry import EssentialElement, essential_from_pose, skew, so3_exp, unvec, vec, vee
from .problem import ProblemData

__all__ = [
    "TangentVector",
    "RtrConfig",
    "SolveReport",
    "riemannian_gradient",
    "riemannian_hessian_vec",
    "retract",
    "solve_rtr",
]


@dataclass(frozen=True)
class TangentVector:
    """Tangent direction at an essential element: (omega, dt) with dt @ t == 0."""

    omega: np.ndarray
    dt: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "omega", np.asarray(self.omega, dtype=float))
        object.__setattr__(self, "dt", np.asarray(self.dt, dtype=float))

    def norm(self) -> float:
        return math.sqrt(float(self.omega @ self.omega + self.dt @ self.dt))


def inner(a: TangentVector, b: TangentVector) -> float:
    return float(a.omega @ b.omega + a.dt @ b.dt)


@dataclass(frozen=True)
class RtrConfig:
    """Trust-region solver knobs (standard values; nothing problem-specific)."""

    max_outer_iterations: int = 100
    gradient_norm_tolerance: float = 1e-10
    initial_trust_radius: float = 0.1
    max_trust_radius: float = 1.0
    acceptance_threshold: float = 0.1
    max_inner_iterations: int = 25
    theta: float = 1.0
    kappa: float = 0.1

    def __post_init__(self):
        if not (0.0 < self.acceptance_threshold <= 0.25):
            raise ValueError("acceptance threshold must lie in (0, 1/4]")
        for name in (
            "max_outer_iterations",
            "gradient_norm_tolerance",
            "initial_trust_radius",
            "max_trust_radius",
            "max_inner_iterations",
            "theta",
            "kappa",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class SolveReport:
    solution: EssentialElement
    final_cost: float
    gradient_norm: float
    outer_iterations: int
    cost_trace: list[float] = field(default_factory=list)


def _euclidean_gradient(data: ProblemData, element: EssentialElement) -> np.ndarray:
    """Ambient derivative of the cost at E, as a 3x3 matrix."""
    return unvec(2.0 * (data.c @ vec(element.e)))


def _project_sphere(t: np.ndarray, v: np.ndarray) -> np.ndarray:
    return v - (t @ v) * t


def riemannian_gradient(data: ProblemData, p: EssentialElement) -> TangentVector:
    """Unique tangent vector representing the differential of the cost at p."""
    g_mat = _euclidean_gradient(data, p)
    omega = vee(p.e.T @ g_mat - g_mat.T @ p.e)
    dt = _project_sphere(p.t, vee(g_mat @ p.r.T - p.r @ g_mat.T))
    return TangentVector(omega=omega, dt=dt)


def _apply_hessian(
    data: ProblemData,
    p: EssentialElement,
    omega: np.ndarray,
    dt: np.ndarray,
    g_mat: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Hessian action on (omega, dt); ``g_mat`` is the ambient gradient at p."""
    r, t, e = p.r, p.t, p.e
    sk_om = skew(omega)
    r_om = r @ sk_om
    de = skew(dt) @ r + skew(t) @ r_om
    w = unvec(2.0 * (data.c @ vec(de)))
    # derivative of the cost's gradient along the direction (Gauss-Newton part)
    h_om = vee(e.T @ w - w.T @ e)
    h_dt = vee(w @ r.T - r @ w.T)
    # curvature of the embedding: mixed rotation/translation term ...
    y = g_mat.T @ skew(dt) @ r
    h_om += vee(y.T - y)
    h_dt += vee(g_mat @ r_om.T - r_om @ g_mat.T)
    # ... second-order rotation term ...
    s_sym = g_mat.T @ e
    s_sym = s_sym + s_sym.T
    h_om -= 0.5 * vee(sk_om @ s_sym + s_sym @ sk_om)
    # ... and the sphere's normal-component pullback
    h_dt -= float(np.sum(g_mat * e)) * dt
    h_dt = _project_sphere(t, h_dt)
    return h_om, h_dt


def riemannian_hessian_vec(
    data: ProblemData, p: EssentialElement, xi: TangentVector
) -> TangentVector:
    """Riemannian Hessian applied to a tangent direction."""
    g_mat = _euclidean_gradient(data, p)
    h_om, h_dt = _apply_hessian(data, p, xi.omega, xi.dt, g_mat)
    return TangentVector(omega=h_om, dt=h_dt)


def retract(p: EssentialElement, xi: TangentVector) -> EssentialElement:
    """Move from p along a tangent direction, staying on the manifold."""
    if not xi.omega.any() and not xi.dt.any():
        return p
    r_new = p.r @ so3_exp(xi.omega)
    t_new = p.t + xi.dt
    t_new = t_new / np.linalg.norm(t_new)
    return essential_from_pose(r_new, t_new)


# stacked skew(e_1), skew(e_2), skew(e_3); lets the dense model below batch
# its per-axis products into single numpy calls
_SKEW_BASIS = np.stack([skew(v) for v in np.eye(3)])
_SKEW_BASIS.flags.writeable = False


def _vee_diff(m: np.ndarray) -> np.ndarray:
    """vee(m - m.T) without intermediates."""
    return np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])


def _dense_model(
    data: ProblemData, e: np.ndarray, r: np.ndarray, t: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Projected gradient (6,) and dense Hessian (6, 6) of the cost at (r, t).

    Same linear map as :func:`riemannian_hessian_vec`, assembled once so the
    inner CG iterations cost a 6x6 matvec instead of repeated chain rules.
    """
    ve = e.reshape(9, order="F")
    g_vec = 2.0 * (data.c @ ve)
    g_mat = g_vec.reshape(3, 3, order="F")
    z = e.T @ g_mat
    g_om = _vee_diff(z)
    g_dt = _vee_diff(g_mat @ r.T)
    g_dt -= (t @ g_dt) * t
    g = np.concatenate([g_om, g_dt])

    # differential of the embedding on basis directions, vectorized columnwise
    eb = e @ _SKEW_BASIS
    sbr = _SKEW_BASIS @ r
    l_mat = np.empty((9, 6))
    l_mat[:, :3] = eb.transpose(0, 2, 1).reshape(3, 9).T
    l_mat[:, 3:] = sbr.transpose(0, 2, 1).reshape(3, 9).T
    h = 2.0 * (l_mat.T @ (data.c @ l_mat))
    # mixed rotation/translation curvature of the embedding
    mk = g_mat.T @ sbr
    a = mk.transpose(0, 2, 1) - mk
    b = np.stack([a[:, 2, 1], a[:, 0, 2], a[:, 1, 0]], axis=1)
    h[3:, :3] += b
    h[:3, 3:] += b.T
    # second-order rotation term: skew(w)S + S skew(w) = skew((tr S I - S) w)
    ssym = z + z.T
    h[:3, :3] -= 0.5 * (np.trace(ssym) * np.eye(3) - ssym)
    # sphere normal-component pullback
    h[3:, 3:] -= float(np.sum(g_mat * e)) * np.eye(3)
    # restrict translation rows/columns to the tangent plane of the sphere
    p_t = np.eye(3) - np.outer(t, t)
    h[3:, :] = p_t @ h[3:, :]
    h[:, 3:] = h[:, 3:] @ p_t
    return g, h


def solve_rtr(
    data: ProblemData, init: EssentialElement, cfg: RtrConfig | None = None
) -> SolveReport:
    """Riemannian trust-region descent of the epipolar cost from a given start.

    Classic loop: the quadratic model at the current point is minimized over
    the trust region by truncated conjugate gradients, the step is accepted
    when the actual-over-predicted decrease ratio clears the acceptance
    threshold, and the radius shrinks on poor agreement / grows (capped) when
    the model is good and the step hit the boundary.  Every iterate is an
    exact manifold point, so constraint feasibility never degrades.

    Terminates on the gradient tolerance or the iteration cap, and also when
    the remaining model decrease sinks below the float noise of the cost
    evaluation: past that point progress can no longer be verified and the
    ratio test would reject every step until the cap.
    """
    if cfg is None:
        cfg = RtrConfig()
    rows = data.rows if data.rows is not None else np.zeros((0, 9))
    r, t, e, f, grad_norm, iterations, trace, n_trace, status = _kernel.rtr_descend(
        np.ascontiguousarray(data.c),
        np.ascontiguousarray(rows),
        data.rows is not None,
        data.n_points,
        np.ascontiguousarray(init.r),
        np.ascontiguousarray(init.t),
        np.ascontiguousarray(init.e),
        cfg.max_outer_iterations,
        cfg.gradient_norm_tolerance,
        cfg.initial_trust_radius,
        cfg.max_trust_radius,
        cfg.acceptance_threshold,
        cfg.max_inner_iterations,
        cfg.theta,
        cfg.kappa,
    )
    if status == _kernel.STATUS_NONFINITE_INIT:
        raise NonFiniteCost("objective is not finite at the initial point")
    if status == _kernel.STATUS_NONFINITE_GRAD:
        raise NonFiniteCost("gradient is not finite")
    if status == _kernel.STATUS_NONFINITE_TRIAL:
        raise NonFiniteCost("objective is not finite at a trial point")
    return SolveReport(
        solution=EssentialElement(e=e, r=r, t=t),
        final_cost=f,
        gradient_norm=grad_norm,
        outer_iterations=iterations,
        cost_trace=[float(v) for v in trace[:n_trace]],
    )
