"""Estimating the minimal-length deformation parameter beta with a deformed oscillator."""

from .errors import AccuracyError, BracketError, DegeneracyError, DomainError
from .estimation import EstimationReport, fi_momentum, qfi, taylor_reference
from .hilbert import DerivativeSpec, QuadratureSpec, inner_product
from .model import Deformation, OscillatorConfig, energy, psi_gegenbauer, psi_hypergeometric
from .states import (
    MixedState,
    PureState,
    ThermalSpec,
    eigenstate,
    mixture_ground_first,
    parse_state,
    qubit_superposition,
    qutrit_superposition,
    thermal_state,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "BracketError",
    "DegeneracyError",
    "Deformation",
    "DerivativeSpec",
    "DomainError",
    "EstimationReport",
    "MixedState",
    "OscillatorConfig",
    "PureState",
    "QuadratureSpec",
    "ThermalSpec",
    "eigenstate",
    "energy",
    "fi_momentum",
    "inner_product",
    "mixture_ground_first",
    "parse_state",
    "psi_gegenbauer",
    "psi_hypergeometric",
    "qfi",
    "qubit_superposition",
    "qutrit_superposition",
    "taylor_reference",
    "thermal_state",
    "__version__",
]
