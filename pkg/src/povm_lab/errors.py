"""Exception hierarchy shared across the package."""


class PovmLabError(Exception):
    """Base class for all package errors."""


class ContractViolation(PovmLabError):
    """An operation precondition or data invariant was violated."""


class NumericalError(PovmLabError):
    """An iterative numerical scheme failed to converge."""


class SingularDesign(PovmLabError):
    """The design matrix T is singular or too close to singular to invert."""


class ClosureNotPositive(PovmLabError):
    """The completing element I - sum(E_j) has a negative eigenvalue."""


class EmptyClusterSelection(PovmLabError):
    """The requested reference cluster key has no members."""


class ResampleExhausted(PovmLabError):
    """Perturbation resampling hit the attempt limit without a positive draw."""


class NonPositiveObjective(PovmLabError):
    """det(W0) <= 0: the cluster does not pin down all unknown parameters."""


class ConfigurationError(PovmLabError):
    """Invalid experiment configuration or config file."""
