"""End-to-end solve: initialize, refine on the manifold, certify, recover pose."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .certifier import CertificateReport, CertifierConfig, certify
from .geometry import EssentialElement, primal_point, recover_pose
from .initializer import eight_point, identity_init, random_essential
from .manifold import RtrConfig, SolveReport, solve_rtr
from .problem import BearingPairs, ProblemData, build_data_matrix

__all__ = ["PipelineResult", "estimate_relative_pose", "INITIALIZERS"]

INITIALIZERS = ("8pt", "identity", "random")


@dataclass(frozen=True)
class PipelineResult:
    element: EssentialElement
    rotation: np.ndarray
    translation: np.ndarray
    solve: SolveReport
    certificate: CertificateReport
    initializer: str


def _initial_guess(pairs: BearingPairs, init, seed: int) -> tuple[EssentialElement, str]:
    if isinstance(init, EssentialElement):
        return init, "custom"
    if init == "8pt":
        return eight_point(pairs), "8pt"
    if init == "identity":
        return identity_init(), "identity"
    if init == "random":
        return random_essential(seed), "random"
    raise ValueError(f"unknown initializer {init!r}; expected one of {INITIALIZERS}")


def estimate_relative_pose(
    pairs: BearingPairs,
    init="8pt",
    rtr_config: RtrConfig | None = None,
    certifier_config: CertifierConfig | None = None,
    data: ProblemData | None = None,
    seed: int = 0,
) -> PipelineResult:
    """Initialize, refine, certify, and decompose in one call.

    ``init`` is one of "8pt", "identity", "random" or an explicit manifold
    element.  ``data`` can be passed when the caller already built it.
    """
    if data is None:
        data = build_data_matrix(pairs)
    guess, name = _initial_guess(pairs, init, seed)
    report = solve_rtr(data, guess, rtr_config)
    certificate = certify(data, primal_point(report.solution), certifier_config)
    rotation, translation = recover_pose(report.solution.e, pairs)
    return PipelineResult(
        element=report.solution,
        rotation=rotation,
        translation=translation,
        solve=report,
        certificate=certificate,
        initializer=name,
    )
