"""Physical constants and the handful of unit conversions the package needs.

Dipole moments are converted with 1 D = 3.336e-30 C m (the value quoted for
the KRb measurements) rather than the CODATA 3.33564e-30 C m. Everything else
comes from :mod:`scipy.constants`.

Gaussian beams use the 1/e^2 intensity radius ``w`` as the waist, so the peak
intensity is ``I = 2 P / (pi w^2)`` and the peak field amplitude is
``E = sqrt(2 I / (eps0 c))``.
"""

from dataclasses import dataclass

import numpy as np
from scipy import constants as _sc

from .errors import DomainError

__all__ = [
    "PhysicalConstants",
    "CONSTANTS",
    "debye_to_si",
    "si_to_debye",
    "ea0_to_debye",
    "debye_to_ea0",
    "ea0_to_si",
    "si_to_ea0",
    "kv_per_cm_to_v_per_m",
    "v_per_m_to_kv_per_cm",
    "field_amplitude_from_power",
    "rabi_frequency",
    "dipole_from_rabi",
    "stark_coupling_hz",
]


@dataclass(frozen=True)
class PhysicalConstants:
    planck_h: float = _sc.h
    hbar: float = _sc.hbar
    eps0: float = _sc.epsilon_0
    c: float = _sc.c
    debye_si: float = 3.336e-30
    ea0_si: float = _sc.e * _sc.physical_constants["Bohr radius"][0]
    boltzmann: float = _sc.k

    def __post_init__(self):
        for name, value in vars(self).items():
            if not (np.isfinite(value) and value > 0):
                raise DomainError(f"constant {name} must be positive, got {value}")


CONSTANTS = PhysicalConstants()


def debye_to_si(d):
    """Dipole moment in Debye -> C m."""
    return np.multiply(d, CONSTANTS.debye_si)


def si_to_debye(d):
    """Dipole moment in C m -> Debye."""
    return np.divide(d, CONSTANTS.debye_si)


def ea0_to_si(d):
    return np.multiply(d, CONSTANTS.ea0_si)


def si_to_ea0(d):
    return np.divide(d, CONSTANTS.ea0_si)


def ea0_to_debye(d):
    return si_to_debye(ea0_to_si(d))


def debye_to_ea0(d):
    return si_to_ea0(debye_to_si(d))


def kv_per_cm_to_v_per_m(field):
    return np.multiply(field, 1e5)


def v_per_m_to_kv_per_cm(field):
    return np.divide(field, 1e5)


def field_amplitude_from_power(power, waist):
    """Peak electric field amplitude (V/m) at the focus of a Gaussian beam.

    Parameters
    ----------
    power : float
        Optical power in W, must be >= 0.
    waist : float
        1/e^2 intensity radius in m, must be > 0.
    """
    power = np.asarray(power, dtype=float)
    waist = np.asarray(waist, dtype=float)
    if np.any(~np.isfinite(waist)) or np.any(waist <= 0):
        raise DomainError(f"waist must be positive, got {waist}")
    if np.any(~np.isfinite(power)) or np.any(power < 0):
        raise DomainError(f"power must be non-negative, got {power}")
    intensity = 2.0 * power / (np.pi * waist**2)
    field = np.sqrt(2.0 * intensity / (CONSTANTS.eps0 * CONSTANTS.c))
    return field[()] if field.ndim == 0 else field


def rabi_frequency(dipole_si, field):
    """Rabi frequency ``d E / hbar`` in rad/s for a dipole in C m and a field in V/m."""
    return np.multiply(dipole_si, field) / CONSTANTS.hbar


def dipole_from_rabi(omega, power, waist):
    """Transition dipole moment in units of e a0 from a measured Rabi frequency.

    ``omega`` is in rad/s; the field is inferred from ``power`` (W) and the
    Gaussian ``waist`` (m) with :func:`field_amplitude_from_power`.
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(~np.isfinite(omega)) or np.any(omega < 0):
        raise DomainError(f"Rabi frequency must be non-negative, got {omega}")
    if np.any(np.asarray(power) <= 0):
        if np.all(omega == 0):
            return np.zeros_like(omega)[()]
        raise DomainError("zero optical power with a nonzero Rabi frequency implies an infinite dipole")
    field = field_amplitude_from_power(power, waist)
    d = si_to_ea0(CONSTANTS.hbar * omega / field)
    return d[()] if np.ndim(d) == 0 else d


def stark_coupling_hz(dipole_debye, field):
    """Stark interaction scale ``d E / h`` in Hz for a dipole in Debye and a field in V/m."""
    return debye_to_si(dipole_debye) * np.asarray(field, dtype=float) / CONSTANTS.planck_h
