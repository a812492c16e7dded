"""Exception types raised across the package."""


class EpicertError(Exception):
    """Base class for all package-specific errors."""


class DegenerateInput(EpicertError):
    """Input admits no well-defined answer (rank drop, cheirality failure, ...)."""


class EmptyInput(EpicertError):
    """An operation that needs at least one correspondence got none."""


class InsufficientData(EpicertError):
    """Fewer correspondences than the estimator's minimum."""


class DegenerateConfiguration(EpicertError):
    """Point configuration leaves the model direction non-unique."""


class GenerationTimeout(EpicertError):
    """Scene rejection sampling exhausted its attempt budget."""


class NonFiniteCost(EpicertError):
    """Objective or gradient evaluated to NaN/inf (corrupt input data)."""


class RankDeficientJacobian(EpicertError):
    """Constraint Jacobian lost column rank; multipliers are not unique."""


class NoModelFound(EpicertError):
    """Every sampled hypothesis was degenerate; no model could be fit."""
