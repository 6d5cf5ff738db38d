"""Exception types shared across the package."""

import numpy as np


class DimensionMismatch(ValueError):
    """Input shapes are incompatible with each other or with the model."""


class UnsupportedFamily(ValueError):
    """Kernel family does not support the requested operation."""


class NotPositiveDefinite(np.linalg.LinAlgError):
    """Cholesky factorization failed even after the jitter retry."""


class ZeroMatrix(np.linalg.LinAlgError):
    """Pseudoinverse requested for a matrix whose largest singular value is zero."""


class ConvergenceFailure(np.linalg.LinAlgError):
    """The eigensolver did not converge."""


class EmptyCloud(ValueError):
    """Operation requires a nonempty point cloud."""


class NonpositiveStep(ValueError):
    """Integrator step size must be positive."""


class RankOutOfRange(ValueError):
    """Requested spectral rank is outside [1, model dimension]."""


class NonpositiveValue(ValueError):
    """Log-log fit requires strictly positive values."""


class ConfigError(ValueError):
    """Experiment configuration is inconsistent or degenerate."""
