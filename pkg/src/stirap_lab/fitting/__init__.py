"""Fitting layer: damped least squares and the package's inverse problems."""

from .core import (
    FitQualityWarning,
    FitResult,
    Resonance,
    ScanData,
    dipole_shift_model,
    find_resonances,
    fit_dark_resonance,
    fit_dipole,
    fit_lifetime,
    lorentzian,
    stark_shift_from_dark_resonance,
)
from .estimators import DarkResonanceRegressor, DipoleMomentRegressor, LifetimeRegressor, ResonanceFinder
from .lm import LMResult, levenberg_marquardt, numeric_jacobian

__all__ = [
    "DarkResonanceRegressor",
    "DipoleMomentRegressor",
    "LifetimeRegressor",
    "ResonanceFinder",
    "FitQualityWarning",
    "FitResult",
    "LMResult",
    "Resonance",
    "ScanData",
    "dipole_shift_model",
    "find_resonances",
    "fit_dark_resonance",
    "fit_dipole",
    "fit_lifetime",
    "levenberg_marquardt",
    "lorentzian",
    "numeric_jacobian",
    "stark_shift_from_dark_resonance",
]
