"""Numerical toolkit for local variable Morrey-Lorentz spaces.

Step-function inputs keep every rearrangement and norm exact up to a root
solve; operators are evaluated in closed form where one exists and by
controlled quadrature otherwise.
"""

from ._accel import BACKEND
from .errors import (
    ConfigError,
    ConjugateUndefinedError,
    DivergenceError,
    DomainError,
    HypothesisError,
    MorreyLorentzError,
    PreconditionError,
)
from .exponent import ExponentPair, VariableExponent, WeightExponent
from .norms import (
    NormResult,
    lebesgue_norm,
    local_morrey_norm,
    luxemburg_norm,
    modular,
    morrey_lorentz_quasinorm,
    variable_lorentz_norm,
)
from .signal import GridFunction2D, LineStep, StepFunction, double_star, rearrange

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigError",
    "ConjugateUndefinedError",
    "DivergenceError",
    "DomainError",
    "ExponentPair",
    "GridFunction2D",
    "HypothesisError",
    "LineStep",
    "MorreyLorentzError",
    "NormResult",
    "PreconditionError",
    "StepFunction",
    "VariableExponent",
    "WeightExponent",
    "double_star",
    "lebesgue_norm",
    "local_morrey_norm",
    "luxemburg_norm",
    "modular",
    "morrey_lorentz_quasinorm",
    "rearrange",
    "variable_lorentz_norm",
]
