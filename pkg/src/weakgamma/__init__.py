"""Numerical toolkit for weak integrated Gamma-2 inequalities and Poincaré-constant bounds.

Submodules: :mod:`ratefn` (rate functions and their transforms),
:mod:`measures` (models, grids, sampling, Hessian tails), :mod:`spectral`
(discrete generators and semigroup checks), :mod:`logconcave`,
:mod:`structured` and :mod:`superpoincare` (bound pipelines) and :mod:`cli`.
"""

from .exceptions import DomainError, ModelError, NumericError, SamplingError, WeakGammaError
from .report import BoundReport

__all__ = ["BoundReport", "DomainError", "ModelError", "NumericError", "SamplingError",
           "WeakGammaError"]
__version__ = "0.1.0"
