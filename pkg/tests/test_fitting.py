import warnings

import numpy as np
import pytest

from stirap_lab.dynamics import TWO_PI, LambdaSystem, dark_resonance_scan
from stirap_lab.errors import ConvergenceError, DomainError, FitRejected
from stirap_lab.fitting import (
    FitQualityWarning,
    ScanData,
    dipole_shift_model,
    find_resonances,
    fit_dark_resonance,
    fit_dipole,
    fit_lifetime,
    levenberg_marquardt,
    lorentzian,
    numeric_jacobian,
    stark_shift_from_dark_resonance,
)
from stirap_lab.fitting.lm import covariance
from stirap_lab.units import kv_per_cm_to_v_per_m

B_SINGLET = 1.1139e9
FIELDS = kv_per_cm_to_v_per_m(np.linspace(0.2, 2.0, 10))


def singlet_data(dipole=0.566, n=0, m=0, fields=FIELDS, sigma=None, noise=None):
    y, _ = dipole_shift_model(dipole, fields, B_SINGLET, n, m)
    if noise is not None:
        y = y + noise
    return ScanData(fields, y, sigma, "field")


# --- scan container ------------------------------------------------------------------


@pytest.mark.parametrize(
    "kw",
    [
        dict(x=[0, 1], y=[0, 1]),
        dict(x=[0, 2, 1], y=[0, 1, 2]),
        dict(x=[0, 1, 2], y=[0, np.nan, 2]),
        dict(x=[0, 1, 2], y=[0, 1, 2], sigma=[1, 0, 1]),
        dict(x=[0, 1, 2], y=[0, 1, 2], axis_kind="mass"),
    ],
)
def test_scan_validation(kw):
    with pytest.raises(DomainError):
        ScanData(**kw)


# --- damped least squares ------------------------------------------------------------


def test_lm_solves_linear_problem_exactly():
    rng = np.random.default_rng(1)
    A = rng.normal(size=(30, 3))
    b = rng.normal(size=30)
    res = levenberg_marquardt(lambda p: A @ p - b, lambda p: A, np.zeros(3))
    assert res.converged
    np.testing.assert_allclose(res.params, np.linalg.lstsq(A, b, rcond=None)[0], rtol=1e-10)
    np.testing.assert_allclose(covariance(res.jacobian), np.linalg.inv(A.T @ A), rtol=1e-10)


def test_lm_rosenbrock():
    fun = lambda p: np.array([10 * (p[1] - p[0] ** 2), 1 - p[0]])
    jac = lambda p: np.array([[-20 * p[0], 10.0], [-1.0, 0.0]])
    res = levenberg_marquardt(fun, jac, [-1.2, 1.0], max_iter=500)
    assert res.converged
    np.testing.assert_allclose(res.params, [1, 1], atol=1e-8)


def test_lm_reports_non_convergence():
    fun = lambda p: np.array([np.exp(p[0]), 1.0])
    res = levenberg_marquardt(fun, lambda p: np.array([[np.exp(p[0])], [0.0]]), [0.0], max_iter=3)
    assert not res.converged
    assert "maximum" in res.message


def test_numeric_jacobian():
    f = lambda p: np.array([p[0] ** 2 * p[1], np.sin(p[1])])
    J = numeric_jacobian(f, np.array([1.5, 0.3]))
    np.testing.assert_allclose(J, [[2 * 1.5 * 0.3, 1.5**2], [0, np.cos(0.3)]], rtol=1e-8)


# --- dipole --------------------------------------------------------------------------


@pytest.mark.parametrize("n,m", [(0, 0), (1, 0), (1, 1), (2, 0), (2, 2)])
def test_dipole_derivative_matches_finite_difference(n, m):
    d, h = 0.566, 1e-4
    _, analytic = dipole_shift_model(d, FIELDS, B_SINGLET, n, m)
    up, _ = dipole_shift_model(d + h, FIELDS, B_SINGLET, n, m)
    dn, _ = dipole_shift_model(d - h, FIELDS, B_SINGLET, n, m)
    np.testing.assert_allclose(analytic, (up - dn) / (2 * h), rtol=1e-6)


@pytest.mark.parametrize("n,m", [(0, 0), (1, 1), (2, 0)])
def test_dipole_noiseless_recovery(n, m):
    res = fit_dipole(singlet_data(n=n, m=m), B_SINGLET, n, m)
    assert res.converged
    assert res.value == pytest.approx(0.566, rel=1e-9)
    assert res.sys_err is None


def test_dipole_field_systematic():
    res = fit_dipole(singlet_data(), B_SINGLET, field_sys_frac=0.03)
    # shift ~ (dE)^2 so a fractional field error f maps to about f on d
    assert res.sys_err == pytest.approx(0.03 * 0.566, rel=0.02)
    with pytest.raises(DomainError):
        fit_dipole(singlet_data(), B_SINGLET, field_sys_frac=1.5)


def test_dipole_rescaling_invariance():
    base = fit_dipole(singlet_data(), B_SINGLET).value
    # only the product d E enters: scaling the fields by k divides the dipole by k
    scaled = ScanData(FIELDS * 2.0, singlet_data().y, None, "field")
    assert fit_dipole(scaled, B_SINGLET).value == pytest.approx(base / 2.0, rel=1e-9)


def test_dipole_error_scales_as_inverse_sqrt_n():
    errs = []
    for npts in (20, 80):
        fields = kv_per_cm_to_v_per_m(np.linspace(0.2, 2.0, npts))
        data = singlet_data(fields=fields, sigma=np.full(npts, 1e4))
        errs.append(fit_dipole(data, B_SINGLET).stat_err)
    assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.05)


def test_dipole_pulls_are_unit_normal():
    rng = np.random.default_rng(7)
    sigma = 2e5
    pulls = []
    for _ in range(200):
        data = singlet_data(sigma=np.full(FIELDS.size, sigma), noise=sigma * rng.standard_normal(FIELDS.size))
        res = fit_dipole(data, B_SINGLET)
        pulls.append((res.value - 0.566) / res.stat_err)
    assert abs(np.mean(pulls)) < 0.25
    assert np.std(pulls) == pytest.approx(1.0, abs=0.15)


def test_dipole_all_zero_data():
    res = fit_dipole(ScanData(FIELDS, np.zeros(FIELDS.size), None, "field"), B_SINGLET)
    assert res.value == 0.0
    assert res.stat_err == 0.0


def test_dipole_chi2_gate_flags_bad_model():
    rng = np.random.default_rng(3)
    data = singlet_data(sigma=np.full(FIELDS.size, 1e3), noise=5e5 * rng.standard_normal(FIELDS.size))
    with pytest.warns(FitQualityWarning):
        res = fit_dipole(data, B_SINGLET, chi2_gate=3.0)
    assert "chi2_gate" in res.flags
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert "chi2_gate" not in fit_dipole(singlet_data(), B_SINGLET, chi2_gate=3.0).flags


# --- lifetime ------------------------------------------------------------------------

TIMES = np.linspace(0, 400e-6, 12)


def decay(tau=170e-6, n0=1e4, times=TIMES):
    return n0 * np.exp(-times / tau)


@pytest.mark.parametrize("noise", ["relative", "absolute"])
def test_lifetime_noiseless(noise):
    res = fit_lifetime(ScanData(TIMES, decay(), None, "time"), noise=noise)
    assert res.converged
    assert res.value == pytest.approx(170e-6, rel=1e-9)
    assert res.params["amplitude"] == pytest.approx(1e4, rel=1e-9)


def test_lifetime_amplitude_and_time_rescaling():
    rng = np.random.default_rng(5)
    y = decay() * (1 + 0.1 * rng.standard_normal(TIMES.size))
    base = fit_lifetime(ScanData(TIMES, y, None, "time"))
    louder = fit_lifetime(ScanData(TIMES, 7 * y, None, "time"))
    assert louder.value == pytest.approx(base.value, rel=1e-8)
    assert louder.stat_err == pytest.approx(base.stat_err, rel=1e-6)
    assert louder.params["amplitude"] == pytest.approx(7 * base.params["amplitude"], rel=1e-8)
    slower = fit_lifetime(ScanData(3 * TIMES, y, None, "time"))
    assert slower.value == pytest.approx(3 * base.value, rel=1e-8)
    assert slower.stat_err == pytest.approx(3 * base.stat_err, rel=1e-6)


def test_lifetime_error_scales_as_inverse_sqrt_n():
    errs = []
    for npts in (25, 100):
        t = np.linspace(0, 400e-6, npts)
        errs.append(fit_lifetime(ScanData(t, decay(times=t), np.full(npts, 100.0), "time")).stat_err)
    assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.05)


def test_lifetime_rejects_growth_and_negative_counts():
    with pytest.raises(ConvergenceError):
        fit_lifetime(ScanData(TIMES, 1 + TIMES, None, "time"))
    with pytest.raises(DomainError):
        fit_lifetime(ScanData(TIMES, decay() - 5e3, None, "time"))
    with pytest.raises(DomainError):
        fit_lifetime(ScanData(TIMES, decay(), None, "time"), noise="poisson")


# --- resonance finding ---------------------------------------------------------------


def three_peaks(noise=0.0, seed=0):
    x = np.linspace(-0.5e9, 3.5e9, 2001)
    centers = [0.0, 0.4245e9, 3.155e9]
    y = 0.1 + sum(lorentzian(x, c, 1.0, 20e6) for c in centers)
    if noise:
        y = y + noise * np.random.default_rng(seed).standard_normal(x.size)
    return ScanData(x, y, None, "detuning"), centers


def test_find_resonances_recovers_centers():
    data, centers = three_peaks()
    found = find_resonances(data)
    assert [r.center for r in found] == pytest.approx(centers, abs=1e3)
    for r in found:
        assert r.width == pytest.approx(20e6, rel=1e-3)
        assert r.height == pytest.approx(1.0, rel=0.05)


def test_find_resonances_with_noise_is_sorted_and_close():
    data, centers = three_peaks(noise=0.02, seed=4)
    found = find_resonances(data, prominence=0.3)
    assert len(found) == 3
    assert [r.center for r in found] == sorted(r.center for r in found)
    for r, c in zip(found, centers):
        assert abs(r.center - c) < 1e6
        assert r.center_err > 0


def test_find_resonances_flat_spectrum():
    assert find_resonances(ScanData(np.arange(10.0), np.ones(10), None, "detuning")) == []


# --- dark resonance ------------------------------------------------------------------

PROBE = LambdaSystem(TWO_PI * 0.5e6, 0.0)


def dark_data(omega2_mhz=8.0, center_hz=0.0, scale=1.0, axis="down"):
    x = np.linspace(-15e6, 15e6, 61)
    sys = PROBE.replace(omega2_peak=TWO_PI * omega2_mhz * 1e6)
    y = scale * dark_resonance_scan(sys, 20e-6, TWO_PI * (x - center_hz), axis)[:, 1]
    return ScanData(x, y, None, "detuning")


def test_dark_resonance_recovers_pump_center_and_scale():
    res = fit_dark_resonance(dark_data(8.0, center_hz=0.13e6, scale=2.0), PROBE, 20e-6)
    assert res.value == pytest.approx(TWO_PI * 8e6, rel=1e-5)
    assert res.params["center"] == pytest.approx(0.13e6, abs=10.0)
    assert res.params["scale"] == pytest.approx(2.0, rel=1e-5)


def test_dark_resonance_up_axis():
    res = fit_dark_resonance(dark_data(4.0, axis="up"), PROBE, 20e-6, scan_axis="up")
    assert res.value == pytest.approx(TWO_PI * 4e6, rel=1e-5)


def test_dark_resonance_rejects_plain_absorption_dip():
    x = np.linspace(-15e6, 15e6, 61)
    y = 1 - lorentzian(x, 0.0, 0.9, 3e6)
    with pytest.raises(FitRejected):
        fit_dark_resonance(ScanData(x, y, None, "detuning"), PROBE, 20e-6)
    with pytest.raises(FitRejected):
        fit_dark_resonance(ScanData(x, np.ones_like(x), None, "detuning"), PROBE, 20e-6)


def test_stark_shift_from_centers():
    assert stark_shift_from_dark_resonance(-1.5e6, 0.5e6) == -2e6


def test_stark_shift_antisymmetric():
    assert stark_shift_from_dark_resonance(0.3e6, 0.3e6) == 0.0
    assert stark_shift_from_dark_resonance(1e6, -2e6) == -stark_shift_from_dark_resonance(-2e6, 1e6)


# --- Jacobians and error bars --------------------------------------------------------


def test_lorentzian_jacobian_matches_finite_difference():
    from stirap_lab.fitting.core import _lorentz_jac

    u = np.linspace(-4, 4, 41)
    q = np.array([0.3, 1.2, 0.8, 0.1])
    numeric = numeric_jacobian(lambda p: lorentzian(u, *p), q)
    np.testing.assert_allclose(_lorentz_jac(u, *q[:3]), numeric, atol=1e-8)


def test_decay_jacobian_matches_finite_difference():
    from stirap_lab.fitting.core import _fit_decay

    y = decay() * (1 + 0.05 * np.random.default_rng(2).standard_normal(TIMES.size))
    t_scale = TIMES[-1]
    lm = _fit_decay(TIMES, y, np.ones_like(y), [1e4, 0.4], t_scale, 0.0)
    resid = lambda p: p[0] * np.exp(-TIMES / (p[1] * t_scale)) - y
    numeric = numeric_jacobian(resid, lm.params)
    np.testing.assert_allclose(lm.jacobian, numeric, rtol=1e-6, atol=1e-9 * np.abs(numeric).max())


def test_peak_heights_invariant_under_offset():
    data, _ = three_peaks()
    base = find_resonances(data)
    lifted = find_resonances(data.replace(y=data.y + 5.0))
    for a, b in zip(base, lifted):
        assert b.height == pytest.approx(a.height, rel=1e-6)
        assert b.offset == pytest.approx(a.offset + 5.0, rel=1e-6)


def test_lifetime_error_shrinks_with_points_over_draws():
    def median_err(npts):
        t = np.linspace(0, 400e-6, npts)
        errs = []
        for seed in range(100):
            rng = np.random.default_rng(seed)
            y = decay(times=t) * (1 + 0.1 * rng.standard_normal(npts))
            errs.append(fit_lifetime(ScanData(t, y, None, "time")).stat_err)
        return np.median(errs)

    ratio = median_err(12) / median_err(48)
    assert 2.0 / 1.5 < ratio < 2.0 * 1.5
