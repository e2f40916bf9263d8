"""Photon-blockade statistics in a double-cavity optomechanical model.

The library splits into small layers: ``tensor_core`` (dense operators on
truncated Fock spaces), ``model`` (parameters and Hamiltonian builders),
``analytic`` (closed-form weak-drive amplitudes and optimal relations),
``lindblad`` (master-equation engine), ``scenarios`` (figure presets and the
sweep engine), and ``cli`` (the blockade-lab command).
"""

__version__ = "0.1.0"

from .errors import (
    BlockadeLabError,
    CapacityError,
    ConfigError,
    DegenerateParameterError,
    DegenerateSteadyStateError,
    InstabilityError,
    InvalidArgumentError,
    NumericalError,
    PoleError,
    SingularMatrixError,
    UndefinedCorrelationError,
)
from .tensor_core import HilbertSpec
from .model import SystemParams

__all__ = [
    "__version__",
    "BlockadeLabError",
    "CapacityError",
    "ConfigError",
    "DegenerateParameterError",
    "DegenerateSteadyStateError",
    "HilbertSpec",
    "InstabilityError",
    "InvalidArgumentError",
    "NumericalError",
    "PoleError",
    "SingularMatrixError",
    "SystemParams",
    "UndefinedCorrelationError",
]
