"""Three-level STIRAP dynamics, rigid-rotor Stark maps and the fits that connect them to data."""

__version__ = "0.1.0"

from .dynamics import (
    LambdaSystem,
    PulseSchedule,
    QuantumState,
    Trajectory,
    TransferResult,
    dark_resonance_scan,
    dark_resonance_width,
    evolve,
    pump_for_width,
    rwa_hamiltonian,
    stirap_lineshape,
    stirap_transfer,
)
from .errors import (
    ContinuationError,
    ConvergenceError,
    DomainError,
    FitRejected,
    IntegrationError,
    NoPeakError,
    StirapLabError,
)
from .stark import StarkLevel, StarkModel, branch_energy, perturbative_shift, rotational_energy, stark_energies, stark_map, stark_matrix
from .units import CONSTANTS, PhysicalConstants, dipole_from_rabi, field_amplitude_from_power, rabi_frequency, stark_coupling_hz

__all__ = [
    "CONSTANTS",
    "ContinuationError",
    "ConvergenceError",
    "DomainError",
    "FitRejected",
    "IntegrationError",
    "LambdaSystem",
    "NoPeakError",
    "PhysicalConstants",
    "PulseSchedule",
    "QuantumState",
    "StarkLevel",
    "StarkModel",
    "StirapLabError",
    "TransferResult",
    "Trajectory",
    "branch_energy",
    "dark_resonance_scan",
    "dark_resonance_width",
    "dipole_from_rabi",
    "evolve",
    "field_amplitude_from_power",
    "perturbative_shift",
    "pump_for_width",
    "rabi_frequency",
    "rotational_energy",
    "rwa_hamiltonian",
    "stark_coupling_hz",
    "stark_energies",
    "stark_map",
    "stark_matrix",
    "stirap_lineshape",
    "stirap_transfer",
]
