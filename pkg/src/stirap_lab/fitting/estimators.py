"""scikit-learn compatible wrappers around the fitting functions.

Each estimator takes a single feature column ``X`` (field, time or detuning)
and a target ``y``; hyperparameters are constructor arguments so the
estimators clone, pickle and sit in pipelines like any other regressor.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y, check_array

from ..dynamics import TWO_PI, LambdaSystem, dark_resonance_scan
from .core import (
    ScanData,
    dipole_shift_model,
    find_resonances,
    fit_dark_resonance,
    fit_dipole,
    fit_lifetime,
    lorentzian,
)

__all__ = [
    "DipoleMomentRegressor",
    "LifetimeRegressor",
    "DarkResonanceRegressor",
    "ResonanceFinder",
]


def _column(X):
    X = check_array(X, ensure_2d=False)
    if X.ndim == 2:
        if X.shape[1] != 1:
            raise ValueError(f"expected a single feature column, got {X.shape[1]}")
        X = X[:, 0]
    return X


def _scan(X, y, sample_weight, axis_kind):
    X, y = check_X_y(np.reshape(X, (len(X), -1)) if np.ndim(X) == 1 else X, y)
    x = _column(X)
    order = np.argsort(x, kind="stable")
    sigma = None
    if sample_weight is not None:
        w = np.asarray(sample_weight, dtype=float)[order]
        sigma = 1.0 / np.sqrt(w)
    return ScanData(x[order], y[order], sigma, axis_kind)


class DipoleMomentRegressor(RegressorMixin, BaseEstimator):
    """Fit a permanent dipole (Debye) to Stark shifts (Hz) versus field (V/m).

    ``sample_weight`` in :meth:`fit` is interpreted as ``1 / sigma_y^2``.

    Attributes
    ----------
    dipole_ : float
    dipole_err_ : float
        Statistical 1-sigma error.
    dipole_sys_err_ : float or None
        Field-calibration systematic, if ``field_sys_frac`` > 0.
    result_ : FitResult
    """

    def __init__(self, b_rot=1.1139e9, n=0, m=0, field_sys_frac=0.0, chi2_gate=None, n_max=10):
        self.b_rot = b_rot
        self.n = n
        self.m = m
        self.field_sys_frac = field_sys_frac
        self.chi2_gate = chi2_gate
        self.n_max = n_max

    def fit(self, X, y, sample_weight=None):
        data = _scan(X, y, sample_weight, "field")
        self.result_ = fit_dipole(data, self.b_rot, self.n, self.m, self.field_sys_frac, self.chi2_gate, self.n_max)
        self.dipole_ = self.result_.value
        self.dipole_err_ = self.result_.stat_err
        self.dipole_sys_err_ = self.result_.sys_err
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "dipole_")
        shifts, _ = dipole_shift_model(self.dipole_, _column(X), self.b_rot, self.n, self.m, self.n_max)
        return shifts


class LifetimeRegressor(RegressorMixin, BaseEstimator):
    """Exponential decay ``N0 exp(-t / tau)`` of counts versus hold time (s)."""

    def __init__(self, noise="relative"):
        self.noise = noise

    def fit(self, X, y, sample_weight=None):
        data = _scan(X, y, sample_weight, "time")
        self.result_ = fit_lifetime(data, noise=self.noise)
        self.tau_ = self.result_.value
        self.tau_err_ = self.result_.stat_err
        self.amplitude_ = self.result_.params["amplitude"]
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "tau_")
        return self.amplitude_ * np.exp(-_column(X) / self.tau_)


class DarkResonanceRegressor(RegressorMixin, BaseEstimator):
    """Pump Rabi frequency from a dark-resonance scan (detuning in Hz)."""

    def __init__(self, omega1_peak=TWO_PI * 0.5e6, gamma_e=TWO_PI * 6e6, delta_one_photon=0.0,
                 pulse_duration=20e-6, scan_axis="down", fit_gamma_e=False):
        self.omega1_peak = omega1_peak
        self.gamma_e = gamma_e
        self.delta_one_photon = delta_one_photon
        self.pulse_duration = pulse_duration
        self.scan_axis = scan_axis
        self.fit_gamma_e = fit_gamma_e

    def _system(self):
        return LambdaSystem(self.omega1_peak, 0.0, delta_one_photon=self.delta_one_photon, gamma_e=self.gamma_e)

    def fit(self, X, y, sample_weight=None):
        data = _scan(X, y, sample_weight, "detuning")
        self.result_ = fit_dark_resonance(data, self._system(), self.pulse_duration, self.scan_axis, self.fit_gamma_e)
        self.omega2_ = self.result_.value
        self.omega2_err_ = self.result_.stat_err
        self.center_ = self.result_.params["center"]
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "omega2_")
        sys = self._system().replace(omega2_peak=self.omega2_)
        if self.fit_gamma_e:
            sys = sys.replace(gamma_e=self.result_.params["gamma_e"])
        x = TWO_PI * (_column(X) - self.center_)
        return self.result_.params["scale"] * dark_resonance_scan(sys, self.pulse_duration, x, self.scan_axis)[:, 1]


class ResonanceFinder(BaseEstimator):
    """Peak detection plus per-peak Lorentzian fits; ``predict`` evaluates the fitted peaks."""

    def __init__(self, prominence=0.2):
        self.prominence = prominence

    def fit(self, X, y):
        data = _scan(X, y, None, "detuning")
        self.resonances_ = find_resonances(data, self.prominence)
        self.centers_ = np.array([r.center for r in self.resonances_])
        self.baseline_ = float(np.median([r.offset for r in self.resonances_])) if self.resonances_ else float(np.median(y))
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "resonances_")
        x = _column(X)
        out = np.full(x.shape, self.baseline_)
        for r in self.resonances_:
            out += lorentzian(x, r.center, r.height, r.width)
        return out
