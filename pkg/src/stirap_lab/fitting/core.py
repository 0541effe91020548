"""Parameter extraction from scan data: dipole moments, lifetimes, resonances, Rabi frequencies."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence

import numpy as np
from scipy.signal import find_peaks, peak_prominences, peak_widths

from ..dynamics import TWO_PI, LambdaSystem, dark_resonance_scan
from ..errors import ConvergenceError, DomainError, FitRejected
from ..stark import StarkModel, coupling_coefficients, perturbative_shift, rotational_energy
from ..units import stark_coupling_hz
from .lm import covariance, levenberg_marquardt, numeric_jacobian

__all__ = [
    "ScanData",
    "FitResult",
    "Resonance",
    "FitQualityWarning",
    "dipole_shift_model",
    "fit_dipole",
    "fit_lifetime",
    "lorentzian",
    "find_resonances",
    "fit_dark_resonance",
    "stark_shift_from_dark_resonance",
]

AxisKind = Literal["field", "time", "detuning"]


class FitQualityWarning(UserWarning):
    """A fit converged but its reduced chi-square exceeds the declared gate."""


@dataclass(frozen=True)
class ScanData:
    """Measured points ``(x, y, sigma_y)``; ``x`` strictly increasing.

    Units follow ``axis_kind``: V/m for ``field``, s for ``time`` and Hz for
    ``detuning``.
    """

    x: np.ndarray
    y: np.ndarray
    sigma: np.ndarray | None = None
    axis_kind: AxisKind = "field"

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape:
            raise DomainError("x and y must be 1-D arrays of equal length")
        if x.size < 3:
            raise DomainError(f"need at least 3 points, got {x.size}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DomainError("x and y must be finite")
        if np.any(np.diff(x) <= 0):
            raise DomainError("x must be strictly increasing")
        if self.axis_kind not in ("field", "time", "detuning"):
            raise DomainError(f"unknown axis kind {self.axis_kind!r}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.sigma is not None:
            s = np.asarray(self.sigma, dtype=float)
            if s.shape != x.shape or np.any(~(s > 0)):
                raise DomainError("sigma must be positive and match x")
            object.__setattr__(self, "sigma", s)

    def __len__(self):
        return self.x.size

    def replace(self, **changes) -> "ScanData":
        kw = dict(x=self.x, y=self.y, sigma=self.sigma, axis_kind=self.axis_kind)
        kw.update(changes)
        return ScanData(**kw)


@dataclass(frozen=True)
class FitResult:
    """Fitted primary parameter with 1-sigma statistical error and fit diagnostics.

    ``params`` holds every fitted parameter by name; ``value`` is the primary
    one. ``sys_err`` is set only when a calibration systematic was declared.
    """

    value: float
    stat_err: float
    chi2_reduced: float
    converged: bool
    sys_err: float | None = None
    params: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    cov: np.ndarray | None = None
    n_points: int = 0
    gradient_cosine: float = 0.0
    flags: tuple = ()

    def correlation(self, a: str, b: str) -> float:
        names = list(self.params)
        i, j = names.index(a), names.index(b)
        denom = np.sqrt(self.cov[i, i] * self.cov[j, j])
        return float(self.cov[i, j] / denom) if denom > 0 else 0.0


def _finish(names, lm, n, weighted, primary, *, sys_err=None, flags=()):
    dof = max(n - len(names), 1)
    chi2_red = 2 * lm.cost / dof
    cov = covariance(lm.jacobian, 1.0 if weighted else chi2_red)
    errs = np.sqrt(np.clip(np.diag(cov), 0, None))
    params = dict(zip(names, lm.params.tolist()))
    errors = dict(zip(names, errs.tolist()))
    return FitResult(
        value=params[primary],
        stat_err=errors[primary],
        chi2_reduced=float(chi2_red),
        converged=lm.converged,
        sys_err=sys_err,
        params=params,
        errors=errors,
        cov=cov,
        n_points=n,
        gradient_cosine=lm.gradient_cosine,
        flags=tuple(flags),
    )


def _r_floor(y, sigma):
    w = y if sigma is None else y / sigma
    return 1e-10 * (np.linalg.norm(w) + 1e-300)


_EPS = np.finfo(float).eps


# --- dipole moment from Stark shifts -------------------------------------------------


def dipole_shift_model(dipole: float, fields, b_rot: float, n: int, m: int, n_max: int = 10):
    """Stark shift (Hz) of branch ``(n, m)`` and its derivative with respect to the dipole.

    The derivative follows from the Hellmann-Feynman theorem: ``dE/dd`` is the
    expectation value of the field coupling per Debye in the branch eigenvector.
    """
    fields = np.atleast_1d(np.asarray(fields, dtype=float))
    m = abs(m)
    k = n - m
    if k < 0 or n > n_max:
        raise DomainError(f"branch N={n}, |m|={m} not representable with n_max={n_max}")
    basis = np.arange(m, n_max + 1)
    diag = b_rot * basis * (basis + 1.0)
    coeff = -coupling_coefficients(n_max, m)
    e0 = rotational_energy(b_rot, n)
    shifts = np.empty(fields.size)
    deriv = np.empty(fields.size)
    for j, f in enumerate(fields):
        per_debye = float(stark_coupling_hz(1.0, f))
        x = dipole * per_debye
        H = np.diag(diag) + np.diag(x * coeff, 1) + np.diag(x * coeff, -1)
        w, v = np.linalg.eigh(H)
        vec = v[:, k]
        shifts[j] = w[k] - e0
        deriv[j] = per_debye * 2.0 * np.sum(coeff * vec[:-1] * vec[1:])
    return shifts, deriv


def _dipole_guess(data: ScanData, b_rot: float, n: int, m: int) -> float:
    unit = StarkModel(b_rot=b_rot, dipole=1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        c = np.array([perturbative_shift(unit, f, n, m).shift for f in data.x])
    w = np.ones_like(c) if data.sigma is None else 1.0 / data.sigma**2
    denom = np.sum(w * c * c)
    if denom <= 0:
        return 0.0
    a = np.sum(w * c * data.y) / denom
    if a > 0:
        return float(np.sqrt(a))
    return 0.0 if not np.any(data.y) else 1e-3


def _fit_dipole_once(data, b_rot, n, m, n_max):
    sig = np.ones_like(data.y) if data.sigma is None else data.sigma

    def resid(p):
        s, _ = dipole_shift_model(p[0], data.x, b_rot, n, m, n_max)
        return (s - data.y) / sig

    def jac(p):
        _, ds = dipole_shift_model(p[0], data.x, b_rot, n, m, n_max)
        return (ds / sig)[:, None]

    # eigenvalues carry an absolute rounding error of about eps * |H|
    h_norm = b_rot * n_max * (n_max + 1.0)
    r_noise = 16 * _EPS * h_norm * np.linalg.norm(1.0 / sig)
    lm = levenberg_marquardt(
        resid, jac, [_dipole_guess(data, b_rot, n, m)], r_floor=_r_floor(data.y, data.sigma), r_noise=r_noise
    )
    if not lm.converged:
        raise ConvergenceError(f"dipole fit did not converge: {lm.message}")
    lm.params = np.abs(lm.params)
    return lm


def fit_dipole(
    data: ScanData,
    b_rot: float,
    n: int = 0,
    m: int = 0,
    field_sys_frac: float = 0.0,
    chi2_gate: float | None = None,
    n_max: int = 10,
) -> FitResult:
    """Fit the permanent dipole moment (Debye) to Stark shifts of branch ``(n, m)``.

    ``data.x`` are fields in V/m and ``data.y`` shifts in Hz relative to the
    zero-field level ``B n (n + 1)``. ``b_rot`` (Hz) is held fixed. When
    ``field_sys_frac`` is nonzero the fit is repeated with every field scaled
    by ``1 +/- field_sys_frac`` and half the spread of the two results is
    reported as ``sys_err``.

    Raises
    ------
    ConvergenceError
        If the damped least-squares iteration does not meet its gradient test.
    """
    if field_sys_frac < 0 or field_sys_frac >= 1:
        raise DomainError("field_sys_frac must be in [0, 1)")
    if np.any(data.x < 0):
        raise DomainError("fields must be non-negative")
    lm = _fit_dipole_once(data, b_rot, n, m, n_max)
    sys_err = None
    if field_sys_frac > 0:
        hi = _fit_dipole_once(data.replace(x=data.x * (1 + field_sys_frac)), b_rot, n, m, n_max)
        lo = _fit_dipole_once(data.replace(x=data.x * (1 - field_sys_frac)), b_rot, n, m, n_max)
        sys_err = 0.5 * abs(lo.params[0] - hi.params[0])
    res = _finish(["dipole"], lm, len(data), data.sigma is not None, "dipole", sys_err=sys_err)
    if chi2_gate is not None and res.chi2_reduced > chi2_gate:
        warnings.warn(
            f"reduced chi-square {res.chi2_reduced:.3g} exceeds gate {chi2_gate:.3g}; "
            "data inconsistent with a rigid-rotor Stark branch",
            FitQualityWarning,
            stacklevel=2,
        )
        res = _with_flag(res, "chi2_gate")
    return res


def _with_flag(res: FitResult, flag: str) -> FitResult:
    return replace(res, flags=res.flags + (flag,))


# --- lifetime ------------------------------------------------------------------------


def _fit_decay(t, y, sig, p0, t_scale, r_floor):
    # parameters: N0, tau / t_scale
    def resid(p):
        return (p[0] * np.exp(-t / (p[1] * t_scale)) - y) / sig

    def jac(p):
        e = np.exp(-t / (p[1] * t_scale))
        return np.column_stack([e, p[0] * e * t / (p[1] ** 2 * t_scale)]) / sig[:, None]

    lm = levenberg_marquardt(resid, jac, p0, r_floor=r_floor)
    if not lm.converged or lm.params[1] <= 0 or lm.params[1] > 1e6:
        raise ConvergenceError(f"lifetime fit did not converge: {lm.message}")
    return lm


def fit_lifetime(data: ScanData, noise: Literal["relative", "absolute"] = "relative", reweight: int = 3) -> FitResult:
    """Fit ``N(t) = N0 exp(-t / tau)`` and report ``tau`` in s.

    The starting point comes from a straight-line fit to ``log N`` over the
    positive counts. Without ``data.sigma`` the scatter is taken to be
    proportional to the signal (``noise="relative"``, the usual case for
    shot-to-shot number fluctuations): the fit is reweighted ``reweight``
    times with uncertainties proportional to the current model, and the
    covariance is scaled by the reduced chi-square, which then estimates the
    squared fractional scatter. ``noise="absolute"`` uses uniform weights
    instead.

    Raises
    ------
    ConvergenceError
        If the counts do not decay or the fit fails to converge.
    """
    t, y = data.x, data.y
    if np.any(y < 0):
        raise DomainError("counts must be non-negative")
    if noise not in ("relative", "absolute"):
        raise DomainError(f"unknown noise model {noise!r}")
    pos = y > 0
    if pos.sum() < 2:
        raise ConvergenceError("not enough positive counts to fit a decay")
    slope, icpt = np.polyfit(t[pos], np.log(y[pos]), 1)
    if slope >= 0:
        raise ConvergenceError("data do not decay; no finite lifetime")
    t_scale = t[-1] - t[0]
    weighted = data.sigma is not None
    sig = data.sigma if weighted else np.ones_like(y)
    p0 = [np.exp(icpt), -1.0 / (slope * t_scale)]
    lm = _fit_decay(t, y, sig, p0, t_scale, _r_floor(y, data.sigma))
    if not weighted and noise == "relative":
        for _ in range(reweight):
            model = lm.params[0] * np.exp(-t / (lm.params[1] * t_scale))
            if np.any(model <= 0):
                break
            sig = model
            lm = _fit_decay(t, y, sig, lm.params, t_scale, _r_floor(y / sig, None))
    res = _finish(["amplitude", "tau"], lm, len(data), weighted, "tau")
    scale = np.diag([1.0, t_scale])
    cov = scale @ res.cov @ scale
    params = dict(amplitude=res.params["amplitude"], tau=res.params["tau"] * t_scale)
    errors = dict(amplitude=res.errors["amplitude"], tau=res.errors["tau"] * t_scale)
    return replace(res, value=params["tau"], stat_err=errors["tau"], params=params, errors=errors, cov=cov)


# --- resonance finding ---------------------------------------------------------------


@dataclass(frozen=True)
class Resonance:
    center: float
    height: float
    width: float
    offset: float = 0.0
    center_err: float = 0.0


def lorentzian(x, center, height, width, offset=0.0):
    """Lorentzian peak with full width at half maximum ``width``."""
    u = 2.0 * (np.asarray(x) - center) / width
    return offset + height / (1.0 + u * u)


def _lorentz_jac(x, c, h, w):
    u = 2.0 * (x - c) / w
    den = 1.0 + u * u
    d_c = h * 2 * u / den**2 * (2.0 / w)
    d_h = 1.0 / den
    d_w = h * 2 * u * u / den**2 / w
    return np.column_stack([d_c, d_h, d_w, np.ones_like(x)])


def find_resonances(data: ScanData, prominence: float = 0.2, min_points: int = 5) -> list[Resonance]:
    """Locate and fit peaks in a spectrum.

    Local maxima whose prominence exceeds ``prominence`` times the data range
    are each fitted with a Lorentzian plus constant offset over a window of
    three half-widths either side. ``height`` is measured above the fitted
    offset. Peaks are returned in ascending order of center; ties go to the
    lower frequency.
    """
    x, y = data.x, data.y
    span = float(np.ptp(y))
    if span == 0 or not np.isfinite(span):
        return []
    idx, props = find_peaks(y, prominence=prominence * span)
    if idx.size == 0:
        return []
    widths, _, left, right = peak_widths(y, idx, rel_height=0.5, prominence_data=(
        props["prominences"], props["left_bases"], props["right_bases"]))
    out = []
    grid = np.arange(x.size)
    for k, p in enumerate(idx):
        half = max(widths[k], 1.0)
        lo = int(max(0, np.floor(p - 3 * half)))
        hi = int(min(x.size, np.ceil(p + 3 * half) + 1))
        while hi - lo < max(min_points, 5) and (lo > 0 or hi < x.size):
            lo, hi = max(0, lo - 1), min(x.size, hi + 1)
        xs, ys = x[lo:hi], y[lo:hi]
        fwhm0 = float(np.interp(right[k], grid, x) - np.interp(left[k], grid, x))
        fwhm0 = fwhm0 if fwhm0 > 0 else float(np.median(np.diff(x)))
        base = float(min(ys[0], ys[-1]))
        p0 = [x[p], y[p] - base, fwhm0, base]
        xscale = fwhm0

        # work in offsets from the peak sample in units of the initial width, so
        # the center keeps full precision far from zero frequency
        x_ref = p0[0]
        us = (xs - x_ref) / xscale

        def resid(q, us=us, ys=ys):
            return lorentzian(us, q[0], q[1], q[2], q[3]) - ys

        def jac(q, us=us):
            return _lorentz_jac(us, q[0], q[1], q[2])

        q0 = [0.0, p0[1], 1.0, p0[3]]
        lm = levenberg_marquardt(resid, jac, q0, r_floor=_r_floor(ys, None), r_noise=16 * _EPS * np.linalg.norm(ys))
        c, h, w, off = x_ref + lm.params[0] * xscale, lm.params[1], abs(lm.params[2]) * xscale, lm.params[3]
        if not (lm.converged and h > 0 and xs[0] <= c <= xs[-1]):
            c, h, w, off = p0[0], p0[1], fwhm0, base
            c_err = float(np.median(np.diff(xs)))
        else:
            dof = max(xs.size - 4, 1)
            cov = covariance(lm.jacobian, 2 * lm.cost / dof)
            c_err = float(np.sqrt(max(cov[0, 0], 0.0)) * xscale)
        out.append(Resonance(float(c), float(h), float(w), float(off), c_err))
    out.sort(key=lambda r: r.center)
    return out


# --- dark resonance ------------------------------------------------------------------


def _dark_model(sys, duration, x_hz, omega2, center_hz, scale, scan_axis, gamma_e=None):
    s = sys.replace(omega2_peak=abs(float(omega2)))
    if gamma_e is not None:
        s = s.replace(gamma_e=abs(float(gamma_e)))
    pops = dark_resonance_scan(s, duration, TWO_PI * (np.asarray(x_hz) - center_hz), scan_axis)[:, 1]
    return scale * pops


def fit_dark_resonance(
    data: ScanData,
    sys_partial: LambdaSystem,
    pulse_duration: float,
    scan_axis: str = "down",
    fit_gamma_e: bool = False,
    min_contrast: float = 0.1,
) -> FitResult:
    """Fit the pump Rabi frequency ``Omega_2`` (rad/s) to a dark-resonance scan.

    ``data.x`` is the scanned detuning in Hz, ``data.y`` the remaining initial
    population in arbitrary units. The forward model is
    :func:`dark_resonance_scan` for ``sys_partial`` (its ``omega2_peak`` is
    ignored) with free pump strength, line center and an overall scale, so the
    result does not depend on the imaging gain. With ``fit_gamma_e`` the
    intermediate-state decay is also released and a ``"degenerate"`` flag is
    raised when its correlation with ``Omega_2`` exceeds 0.99.

    Raises
    ------
    FitRejected
        If the data show no transparency peak or the fitted pump is consistent
        with zero.
    """
    x, y = data.x, data.y
    k = int(np.argmax(y))
    top = y[k]
    depth = top - y.min()
    if top <= 0 or depth < min_contrast * abs(top) or k in (0, x.size - 1):
        raise FitRejected("no transparency window in the data")
    if peak_prominences(y, [k])[0][0] < 0.5 * depth:
        raise FitRejected("maximum does not stand out of the absorption; data look like a loss dip, not a dark resonance")

    sig = np.ones_like(y) if data.sigma is None else data.sigma
    center0 = float(x[k])
    step = float(np.median(np.diff(x)))

    # coarse search over pump strength with the scale solved linearly
    best = None
    for om in np.geomspace(TWO_PI * 1e4, TWO_PI * 1e8, 49):
        f = _dark_model(sys_partial, pulse_duration, x, om, center0, 1.0, scan_axis)
        denom = np.sum(f * f / sig**2)
        if denom <= 0:
            continue
        a = np.sum(f * y / sig**2) / denom
        chi = np.sum(((a * f - y) / sig) ** 2)
        if best is None or chi < best[0]:
            best = (chi, om, a)
    if best is None:
        raise FitRejected("model has no overlap with the data")
    _, om0, a0 = best

    names = ["omega2", "center", "scale"]
    # internal parameters are rescaled to order unity
    p_scale = [om0, step, a0]
    q0 = [1.0, center0 / step, 1.0]
    if fit_gamma_e:
        names.append("gamma_e")
        p_scale.append(sys_partial.gamma_e)
        q0.append(1.0)
    p_scale = np.array(p_scale)

    def unpack(q):
        p = np.asarray(q) * p_scale
        ge = p[3] if fit_gamma_e else None
        return p, ge

    def resid(q):
        p, ge = unpack(q)
        return (_dark_model(sys_partial, pulse_duration, x, p[0], p[1], p[2], scan_axis, ge) - y) / sig

    def jac(q):
        return numeric_jacobian(resid, q, rel_step=1e-6, abs_step=np.full(len(q), 1e-6))

    lm = levenberg_marquardt(resid, jac, q0, gtol=1e-6, r_floor=_r_floor(y, data.sigma))
    if not lm.converged:
        raise ConvergenceError(f"dark-resonance fit did not converge: {lm.message}")
    lm.params = lm.params * p_scale
    lm.jacobian = lm.jacobian / p_scale
    lm.params[0] = abs(lm.params[0])
    if fit_gamma_e:
        lm.params[3] = abs(lm.params[3])
    res = _finish(names, lm, len(data), data.sigma is not None, "omega2")
    if not res.value > 3 * res.stat_err:
        raise FitRejected("fitted pump Rabi frequency is consistent with zero")
    if fit_gamma_e and abs(res.correlation("omega2", "gamma_e")) > 0.99:
        warnings.warn("Omega_2 and gamma_e are degenerate in this scan", FitQualityWarning, stacklevel=2)
        res = _with_flag(res, "degenerate")
    return res


def stark_shift_from_dark_resonance(center_at_field: float, center_at_zero: float) -> float:
    """Final-state Stark shift (Hz) from dark-resonance centers with and without field.

    The initial state is taken to have no dipole, so the whole shift of the
    two-photon line belongs to the final state. Centers must be expressed as
    the final-state energy offset; a negative result means the level moved down.
    """
    return float(center_at_field) - float(center_at_zero)
