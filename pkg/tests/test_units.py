import numpy as np
import pytest
from scipy import constants as sc

from stirap_lab.errors import DomainError
from stirap_lab.units import (
    CONSTANTS,
    PhysicalConstants,
    debye_to_ea0,
    debye_to_si,
    dipole_from_rabi,
    ea0_to_debye,
    field_amplitude_from_power,
    kv_per_cm_to_v_per_m,
    rabi_frequency,
    si_to_debye,
    stark_coupling_hz,
    v_per_m_to_kv_per_cm,
)


def test_ea0_is_about_2p54_debye():
    assert ea0_to_debye(1.0) == pytest.approx(2.54, rel=2e-3)
    assert debye_to_ea0(ea0_to_debye(0.37)) == pytest.approx(0.37, rel=1e-14)


def test_debye_round_trip_and_value():
    assert debye_to_si(1.0) == 3.336e-30
    assert si_to_debye(debye_to_si(0.566)) == pytest.approx(0.566, rel=1e-15)


def test_field_units():
    assert kv_per_cm_to_v_per_m(2.0) == 2e5
    assert v_per_m_to_kv_per_cm(kv_per_cm_to_v_per_m(1.7)) == pytest.approx(1.7)


def test_field_amplitude_matches_gaussian_beam_formula():
    p, w = 60e-6, 55e-6
    intensity = 2 * p / (np.pi * w**2)
    expected = np.sqrt(2 * intensity / (sc.epsilon_0 * sc.c))
    assert field_amplitude_from_power(p, w) == pytest.approx(expected, rel=1e-14)
    assert field_amplitude_from_power(p, w) == pytest.approx(3085, rel=1e-3)


def test_field_amplitude_scales_as_sqrt_power_over_waist():
    e1 = field_amplitude_from_power(1e-3, 1e-4)
    assert field_amplitude_from_power(4e-3, 1e-4) == pytest.approx(2 * e1)
    assert field_amplitude_from_power(1e-3, 2e-4) == pytest.approx(0.5 * e1)


@pytest.mark.parametrize("waist", [0.0, -55e-6, np.nan])
def test_bad_waist_rejected(waist):
    with pytest.raises(DomainError, match="waist"):
        field_amplitude_from_power(1e-3, waist)


def test_negative_power_rejected():
    with pytest.raises(DomainError, match="power"):
        field_amplitude_from_power(-1e-3, 1e-4)


def test_rabi_and_dipole_are_inverse():
    p, w = 60e-6, 55e-6
    d_ea0 = 0.3
    omega = rabi_frequency(d_ea0 * CONSTANTS.ea0_si, field_amplitude_from_power(p, w))
    assert dipole_from_rabi(omega, p, w) == pytest.approx(d_ea0, rel=1e-13)


def test_dipole_from_rabi_zero_cases():
    assert dipole_from_rabi(0.0, 0.0, 55e-6) == 0.0
    assert dipole_from_rabi(0.0, 1e-6, 55e-6) == 0.0
    with pytest.raises(DomainError):
        dipole_from_rabi(1e6, 0.0, 55e-6)
    with pytest.raises(DomainError):
        dipole_from_rabi(-1.0, 1e-6, 55e-6)


def test_dipole_from_rabi_vectorized():
    out = dipole_from_rabi(np.array([1e6, 2e6]), 60e-6, 55e-6)
    assert out.shape == (2,)
    assert out[1] == pytest.approx(2 * out[0])


def test_stark_coupling():
    # 1 D in 1 kV/cm is about 503 MHz
    assert stark_coupling_hz(1.0, 1e5) == pytest.approx(3.336e-30 * 1e5 / sc.h)
    assert stark_coupling_hz(1.0, 1e5) == pytest.approx(503.5e6, rel=1e-3)


def test_constants_validated():
    with pytest.raises(DomainError):
        PhysicalConstants(hbar=-1.0)
