"""Thermodynamics of spin ensembles under collective bath dissipation."""

from .angular_momentum import EnsembleSpec, MultiplicityTable, level_counts, multiplicities, multiplicity_table
from .equilibrium import BathSpec, SteadyStateSummary, ThermalWeights
from .errors import (
    ConvergenceError,
    DomainError,
    ResourceLimitError,
    SpinBathError,
    StepSizeError,
    UndefinedTemperatureError,
)

__version__ = "0.1.0"

__all__ = [
    "BathSpec",
    "ConvergenceError",
    "DomainError",
    "EnsembleSpec",
    "MultiplicityTable",
    "ResourceLimitError",
    "SpinBathError",
    "SteadyStateSummary",
    "StepSizeError",
    "ThermalWeights",
    "UndefinedTemperatureError",
    "level_counts",
    "multiplicities",
    "multiplicity_table",
]
