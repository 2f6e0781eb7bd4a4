"""Quantum kicked top: Floquet dynamics, dynamical chaos measures and their k-periodicity."""

__version__ = "0.1.0"

from ._validation import AlignmentError, ContractError, InvariantViolation, NumericalError
from .floquet import FloquetParams, build_floquet, floquet_power, kappa_period, prefactor_scalar, quasienergies
from .measures import (
    CoarseGraining,
    default_coarse_graining,
    generalized_entanglement,
    loschmidt_echo,
    observational_entropy,
    otoc,
    otoc_jz,
)
from .series import MeasureSeries
from .spinops import CoherentAngles, Spin, coherent_state, goe_sample
from .sweep import SweepSpec, check_period, minimal_period, reflection_check, run_sweep, special_k_scan

__all__ = [
    "AlignmentError", "ContractError", "InvariantViolation", "NumericalError",
    "FloquetParams", "build_floquet", "floquet_power", "kappa_period", "prefactor_scalar", "quasienergies",
    "CoarseGraining", "default_coarse_graining", "generalized_entanglement", "loschmidt_echo",
    "observational_entropy", "otoc", "otoc_jz", "MeasureSeries",
    "CoherentAngles", "Spin", "coherent_state", "goe_sample",
    "SweepSpec", "check_period", "minimal_period", "reflection_check", "run_sweep", "special_k_scan",
]
