"""Certifiably optimal relative pose from bearing-vector correspondences.

Estimate the essential matrix between two calibrated views by local
refinement on its manifold, then verify global optimality a posteriori with
a closed-form dual certificate.  See the README for the pipeline walkthrough
and the ``demos/`` scripts for worked examples.
"""

from .certifier import (
    OPTIMAL,
    UNKNOWN,
    CertificateReport,
    CertifierConfig,
    certify,
    dual_candidate,
    hessian_of_lagrangian,
    min_eigenvalue,
)
from .errors import (
    DegenerateConfiguration,
    DegenerateInput,
    EmptyInput,
    EpicertError,
    GenerationTimeout,
    InsufficientData,
    NoModelFound,
    NonFiniteCost,
    RankDeficientJacobian,
)
from .geometry import (
    EssentialElement,
    essential_from_pose,
    primal_point,
    project_to_essential,
    recover_pose,
    skew,
)
from .initializer import eight_point, identity_init, random_essential
from .manifold import RtrConfig, SolveReport, TangentVector, retract, riemannian_gradient, riemannian_hessian_vec, solve_rtr
from .bench import ExperimentGrid, GridResults, TrialRecord, precision_recall, rotation_error, run_grid, summarize, translation_error
from .pipeline import PipelineResult, estimate_relative_pose
from .problem import (
    BearingPairs,
    ProblemData,
    algebraic_residuals,
    build_data_matrix,
    constraint_jacobian,
    constraint_residuals,
    cost,
    dropped_jacobian_nullspace,
)
from .ransac import RansacConfig, RansacReport, ransac_essential
from .synth import SceneConfig, SyntheticProblem, add_outliers, generate

__version__ = "0.1.0"
