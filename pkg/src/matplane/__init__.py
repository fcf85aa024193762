"""matplane: integral geometry on spaces of rectangular matrices.

Numerical plane transforms of functions of n x m matrices, the dual
(backprojection) transform, matrix-argument potentials, cone gamma
functions with all derived constants, quadrature engines for the
underlying measures, closed-form phantoms, and a CLI harness that runs
the identity-verification experiments.
"""

__version__ = "0.1.0"

from .errors import (BadSpec, BudgetExceeded, ConfigError, DivergenceSuspected,
                     ExcludedOrder, InjectivityViolated, MatplaneError,
                     OutOfRange, PoleError, RankDeficient, ShapeMismatch,
                     UnsupportedOrder, WrongRegime)
from .matspace import Dims, MatrixPlane

__all__ = [
    "__version__", "Dims", "MatrixPlane", "MatplaneError", "ShapeMismatch",
    "RankDeficient", "PoleError", "ExcludedOrder", "UnsupportedOrder",
    "OutOfRange", "DivergenceSuspected", "BudgetExceeded",
    "InjectivityViolated", "WrongRegime", "BadSpec", "ConfigError",
]
