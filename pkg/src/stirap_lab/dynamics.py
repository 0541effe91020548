"""Three-level Lambda system driven by two Raman lasers.

Levels are ordered ``|i>, |e>, |g>`` (initial, intermediate, final). The up
leg ``Omega_1`` couples ``|i>`` to ``|e>`` and the down leg ``Omega_2`` couples
``|e>`` to ``|g>``. In the rotating frame the Hamiltonian (units of hbar) is::

    H = 1/2 [[0,      Omega_1,  0      ],
             [Omega_1, -2 Delta, Omega_2],
             [0,      Omega_2,  -2 delta]]

A positive detuning means the lasers sit below the corresponding resonance.
Population leaving ``|e>`` (rate ``gamma_e``) or ``|g>`` (rate ``gamma_g``) is
removed from the system and tallied in ``lost``; nothing decays back into the
Lambda manifold. ``laser_dephasing`` is relative phase noise of the two
lasers, carried by the down leg: a Lindblad term with collapse operator
``sqrt(2 gamma_d) |g><g|`` damps the ``|i><g|`` coherence at ``gamma_d``. The
same noise damps ``|e><g|`` at the same rate, which keeps the evolution
completely positive.

All rates and Rabi frequencies are angular (rad/s); times are in seconds.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm
from scipy.optimize import brentq

from .errors import DomainError, IntegrationError, NoPeakError

TWO_PI = 2.0 * np.pi
RTOL = 1e-9
ATOL = 1e-12

# Gaussian pulses are cut at +/- this many standard deviations.
GAUSS_CUTOFF = 4.0
# Default Gaussian width and Omega_2 -> Omega_1 delay, in units of duration and sigma.
SIGMA_PER_DURATION = 0.25
DELAY_PER_SIGMA = 1.75

I, E, G = 0, 1, 2

__all__ = [
    "LambdaSystem",
    "PulseSchedule",
    "QuantumState",
    "Trajectory",
    "TransferResult",
    "rwa_hamiltonian",
    "evolve",
    "stirap_transfer",
    "stirap_lineshape",
    "dark_resonance_scan",
    "dark_resonance_width",
    "pump_for_width",
]


@dataclass(frozen=True)
class LambdaSystem:
    """Couplings, detunings and loss rates of the Lambda system.

    ``gamma_g`` is ``1 / tau`` for a final state with lifetime ``tau``; use 0
    for a stable final state.
    """

    omega1_peak: float
    omega2_peak: float
    delta_one_photon: float = 0.0
    delta_two_photon: float = 0.0
    gamma_e: float = TWO_PI * 6e6
    gamma_g: float = 0.0
    laser_dephasing: float = 0.0

    def __post_init__(self):
        for name in ("omega1_peak", "omega2_peak", "gamma_e", "gamma_g", "laser_dephasing"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise DomainError(f"{name} must be finite and >= 0, got {value}")
        for name in ("delta_one_photon", "delta_two_photon"):
            if not np.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")

    def replace(self, **changes) -> "LambdaSystem":
        return dataclasses.replace(self, **changes)


Shape = Literal["gaussian", "sine-squared", "constant"]


@dataclass(frozen=True)
class PulseSchedule:
    """Envelopes for one transfer sequence.

    The forward sequence is counterintuitive: the down-leg pulse comes first
    and the up-leg pulse follows after ``delay``. ``reversed=True`` swaps the
    order for the return transfer ``|g> -> |i>``. ``hold`` is the dark wait
    inserted between a forward and a reverse sequence by
    :func:`stirap_transfer`.

    ``duration`` is the length of each pulse. Gaussians use
    ``sigma = duration / 4`` and are cut at +/- 4 sigma, shifted so the
    envelope reaches zero continuously at the cut. Sine-squared pulses last
    exactly ``duration``. ``constant`` switches both fields on together for
    ``duration`` (a square pulse, used for dark-resonance spectroscopy) and
    ignores ``delay``.
    """

    shape: Shape = "gaussian"
    duration: float = 4e-6
    delay: float | None = None
    hold: float = 0.0
    reversed: bool = False

    def __post_init__(self):
        if self.shape not in ("gaussian", "sine-squared", "constant"):
            raise DomainError(f"unknown pulse shape {self.shape!r}")
        if not np.isfinite(self.duration) or self.duration <= 0:
            raise DomainError(f"duration must be positive, got {self.duration}")
        if self.delay is not None and (not np.isfinite(self.delay) or self.delay < 0):
            raise DomainError(f"delay must be >= 0, got {self.delay}")
        if not np.isfinite(self.hold) or self.hold < 0:
            raise DomainError(f"hold must be >= 0, got {self.hold}")

    def replace(self, **changes) -> "PulseSchedule":
        return dataclasses.replace(self, **changes)

    @property
    def sigma(self) -> float:
        return SIGMA_PER_DURATION * self.duration

    @property
    def pulse_delay(self) -> float:
        if self.shape == "constant":
            return 0.0
        if self.delay is not None:
            return self.delay
        if self.shape == "gaussian":
            return DELAY_PER_SIGMA * self.sigma
        return self.duration / 3.0

    @property
    def span(self) -> float:
        """Length of one sequence, from the first field turning on to the last turning off."""
        if self.shape == "gaussian":
            return 2 * GAUSS_CUTOFF * self.sigma + self.pulse_delay
        return self.duration + self.pulse_delay

    def _first_and_second(self, t):
        t = np.asarray(t, dtype=float)
        d = self.pulse_delay
        if self.shape == "constant":
            on = ((t >= 0) & (t <= self.duration)).astype(float)
            return on, on
        if self.shape == "gaussian":
            s = self.sigma
            cut = np.exp(-0.5 * GAUSS_CUTOFF**2)

            def pulse(center):
                x = (t - center) / s
                val = (np.exp(-0.5 * x * x) - cut) / (1.0 - cut)
                return np.where(np.abs(x) <= GAUSS_CUTOFF, val, 0.0)

            c0 = GAUSS_CUTOFF * s
            return pulse(c0), pulse(c0 + d)

        def sine2(start):
            x = (t - start) / self.duration
            return np.where((x >= 0) & (x <= 1), np.sin(np.pi * x) ** 2, 0.0)

        return sine2(0.0), sine2(d)

    def envelopes(self, t):
        """Normalized (up-leg, down-leg) envelopes at time(s) ``t`` (s from sequence start)."""
        first, second = self._first_and_second(t)
        if self.reversed:
            return first, second
        return second, first

    def peak_times(self) -> tuple[float, float]:
        """Times of the (up-leg, down-leg) envelope maxima."""
        if self.shape == "constant":
            return 0.0, 0.0
        if self.shape == "gaussian":
            t0 = GAUSS_CUTOFF * self.sigma
        else:
            t0 = self.duration / 2
        first, second = t0, t0 + self.pulse_delay
        return (first, second) if self.reversed else (second, first)


@dataclass(frozen=True)
class QuantumState:
    """Density matrix over ``|i>, |e>, |g>`` plus the population lost from the system."""

    rho: np.ndarray
    lost: float = 0.0

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (3, 3):
            raise DomainError(f"rho must be 3x3, got shape {rho.shape}")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "lost", float(self.lost))

    @classmethod
    def pure(cls, level: int | Sequence[complex]) -> "QuantumState":
        if np.isscalar(level):
            psi = np.zeros(3, dtype=complex)
            psi[int(level)] = 1.0
        else:
            psi = np.asarray(level, dtype=complex)
            psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @property
    def populations(self) -> np.ndarray:
        return self.rho.diagonal().real.copy()

    @property
    def trace(self) -> float:
        return float(self.rho.trace().real)

    def check(self, tol: float = 1e-8) -> None:
        """Raise ``DomainError`` if the state violates hermiticity, positivity or accounting."""
        rho = self.rho
        if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
            raise DomainError("rho is not Hermitian")
        pops = self.populations
        if np.any(pops < -tol) or np.any(pops > 1 + tol):
            raise DomainError(f"populations out of [0, 1]: {pops}")
        if np.linalg.eigvalsh(rho).min() < -tol:
            raise DomainError("rho is not positive semidefinite")
        if abs(self.trace + self.lost - 1.0) > tol:
            raise DomainError(f"trace + lost = {self.trace + self.lost}, expected 1")


@dataclass(frozen=True)
class Trajectory:
    """Sampled evolution: ``times`` (n,), ``rho`` (n, 3, 3) and ``lost`` (n,)."""

    times: np.ndarray
    rho: np.ndarray
    lost: np.ndarray

    def __len__(self):
        return len(self.times)

    def __getitem__(self, k) -> QuantumState:
        return QuantumState(self.rho[k], self.lost[k])

    @property
    def states(self) -> list[QuantumState]:
        return [self[k] for k in range(len(self))]

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diagonal(self.rho, axis1=1, axis2=2))

    @property
    def final(self) -> QuantumState:
        return self[-1]

    def shifted(self, offset: float) -> "Trajectory":
        return Trajectory(self.times + offset, self.rho, self.lost)

    @staticmethod
    def concatenate(parts: Sequence["Trajectory"]) -> "Trajectory":
        """Join consecutive pieces, dropping each duplicated boundary sample."""
        times, rho, lost = [parts[0].times], [parts[0].rho], [parts[0].lost]
        for p in parts[1:]:
            times.append(p.times[1:])
            rho.append(p.rho[1:])
            lost.append(p.lost[1:])
        return Trajectory(np.concatenate(times), np.concatenate(rho), np.concatenate(lost))


def _static_parts(sys: LambdaSystem):
    h0 = np.diag([0.0, -sys.delta_one_photon, -sys.delta_two_photon]).astype(complex)
    decay = 0.5 * np.diag([0.0, sys.gamma_e, sys.gamma_g])
    return h0, decay


# coherences with |g> damped by the down-leg phase noise
_DEPHASED = ((I, G), (G, I), (E, G), (G, E))

_UP = 0.5 * np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex)
_DOWN = 0.5 * np.array([[0, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=complex)


def rwa_hamiltonian(sys: LambdaSystem, schedule: PulseSchedule, t: float) -> np.ndarray:
    """Rotating-wave Hamiltonian over hbar (rad/s) at time ``t`` of a sequence."""
    if not np.isfinite(t):
        raise DomainError("t must be finite")
    f1, f2 = schedule.envelopes(t)
    h0, _ = _static_parts(sys)
    return h0 + sys.omega1_peak * float(f1) * _UP + sys.omega2_peak * float(f2) * _DOWN


def _rhs_factory(sys: LambdaSystem, schedule: PulseSchedule):
    h0, decay = _static_parts(sys)
    heff0 = h0 - 1j * decay
    up = sys.omega1_peak * _UP
    down = sys.omega2_peak * _DOWN
    ge, gg, gd = sys.gamma_e, sys.gamma_g, sys.laser_dephasing

    def rhs(t, y):
        f1, f2 = schedule.envelopes(t)
        heff = heff0 + float(f1) * up + float(f2) * down
        rho = y[:9].reshape(3, 3)
        hr = heff @ rho
        drho = -1j * (hr - hr.conj().T)
        if gd:
            for a, b in _DEPHASED:
                drho[a, b] -= gd * rho[a, b]
        out = np.empty(10, dtype=complex)
        out[:9] = drho.ravel()
        out[9] = ge * rho[E, E].real + gg * rho[G, G].real
        return out

    return rhs


def evolve(
    sys: LambdaSystem,
    schedule: PulseSchedule,
    rho0: QuantumState,
    t_span: tuple[float, float],
    sample_dt: float | None = None,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> Trajectory:
    """Integrate the master equation over ``t_span`` (times within the sequence).

    Samples are returned every ``sample_dt`` (plus both endpoints); with
    ``sample_dt=None`` only the endpoints are kept. Each sample is
    re-symmetrized to remove the anti-Hermitian integrator noise.

    Raises
    ------
    IntegrationError
        If the adaptive integrator cannot meet the tolerances.
    """
    t0, t1 = map(float, t_span)
    if not (np.isfinite(t0) and np.isfinite(t1)) or t1 < t0:
        raise DomainError(f"t_span must be ordered and finite, got {t_span}")
    if sample_dt is not None and sample_dt <= 0:
        raise DomainError("sample_dt must be positive")
    y0 = np.empty(10, dtype=complex)
    y0[:9] = rho0.rho.ravel()
    y0[9] = rho0.lost

    if sample_dt is None:
        t_eval = np.array([t0, t1])
    else:
        n = int(np.floor((t1 - t0) / sample_dt + 1e-9))
        t_eval = t0 + sample_dt * np.arange(n + 1)
        if t1 - t_eval[-1] > 1e-12 * max(1.0, abs(t1)):
            t_eval = np.append(t_eval, t1)
        t_eval[-1] = t1
    if t1 == t0:
        ys = np.repeat(y0[:, None], len(t_eval), axis=1)
    else:
        if schedule.shape == "gaussian":
            max_step = schedule.sigma / 4
        else:
            max_step = schedule.duration / 16
        sol = solve_ivp(
            _rhs_factory(sys, schedule),
            (t0, t1),
            y0,
            method="DOP853",
            t_eval=t_eval,
            rtol=rtol,
            atol=atol,
            max_step=max_step,
        )
        if sol.status != 0:
            raise IntegrationError(f"integrator failed: {sol.message}", sol.t[-1] if sol.t.size else t0)
        ys = sol.y
    rho = ys[:9].T.reshape(-1, 3, 3)
    rho = 0.5 * (rho + np.conj(np.swapaxes(rho, 1, 2)))
    return Trajectory(t_eval.copy(), rho, ys[9].real.copy())


@dataclass(frozen=True)
class TransferResult:
    """Outcome of a forward + hold + reverse STIRAP run."""

    efficiency: float
    roundtrip: float
    max_e_pop: float
    trajectory: Trajectory


def stirap_transfer(
    sys: LambdaSystem,
    schedule: PulseSchedule,
    sample_dt: float | None = None,
    roundtrip: bool = True,
) -> TransferResult:
    """Run a forward STIRAP sequence from ``|i>`` and optionally the reverse one.

    ``efficiency`` is the ``|g>`` population after the forward sequence,
    ``roundtrip`` the ``|i>`` population after forward, ``schedule.hold`` and
    reverse. ``max_e_pop`` is the largest ``|e>`` population over the forward
    sequence. The returned trajectory spans the whole run; without
    ``sample_dt`` the ``|e>`` peak is taken from a grid of ``sigma / 20`` steps.
    """
    if schedule.reversed:
        raise DomainError("the forward sequence must use counterintuitive ordering (reversed=False)")
    span = schedule.span
    dt = sample_dt if sample_dt is not None else (
        schedule.sigma / 20 if schedule.shape == "gaussian" else schedule.duration / 80
    )
    forward = evolve(sys, schedule, QuantumState.pure(I), (0.0, span), dt)
    efficiency = float(forward.populations[-1, G])
    max_e = float(forward.populations[:, E].max())
    if not roundtrip:
        return TransferResult(efficiency, float("nan"), max_e, forward)

    parts = [forward]
    state = forward.final
    offset = span
    if schedule.hold > 0:
        dark = sys.replace(omega1_peak=0.0, omega2_peak=0.0)
        held = evolve(dark, schedule, state, (0.0, schedule.hold), dt)
        parts.append(held.shifted(offset))
        state = held.final
        offset += schedule.hold
    back = evolve(sys, schedule.replace(reversed=True), state, (0.0, span), dt)
    parts.append(back.shifted(offset))
    rt = float(back.populations[-1, I])
    return TransferResult(efficiency, rt, max_e, Trajectory.concatenate(parts))


def stirap_lineshape(
    sys: LambdaSystem,
    schedule: PulseSchedule,
    two_photon_detunings: Sequence[float],
    map_fn=map,
) -> np.ndarray:
    """STIRAP response versus two-photon detuning (rad/s).

    Returns an array of shape (n, 3): detuning, ``|i>`` population after the
    full round trip, and ``|i>`` population left after the forward sequence.
    """

    def point(delta):
        res = stirap_transfer(sys.replace(delta_two_photon=float(delta)), schedule)
        k_forward = int(np.searchsorted(res.trajectory.times, schedule.span - 1e-15))
        return res.roundtrip, float(res.trajectory.populations[k_forward, I])

    rows = list(map_fn(point, two_photon_detunings))
    return np.column_stack([np.asarray(two_photon_detunings, dtype=float), np.asarray(rows, dtype=float).reshape(-1, 2)])


def _liouvillian(sys: LambdaSystem) -> np.ndarray:
    """Superoperator for constant fields acting on the row-major flattened ``rho``."""
    h0, decay = _static_parts(sys)
    heff = h0 - 1j * decay + sys.omega1_peak * _UP + sys.omega2_peak * _DOWN
    eye = np.eye(3)
    L = -1j * (np.kron(heff, eye) - np.kron(eye, heff.conj()))
    for a, b in _DEPHASED:
        L[a * 3 + b, a * 3 + b] -= sys.laser_dephasing
    return L


ScanAxis = Literal["down", "up", "one-photon"]


def _detuned(sys: LambdaSystem, x: float, scan_axis: ScanAxis) -> LambdaSystem:
    if scan_axis == "down":
        return sys.replace(delta_two_photon=x)
    if scan_axis == "up":
        return sys.replace(delta_two_photon=x, delta_one_photon=sys.delta_one_photon + x)
    if scan_axis == "one-photon":
        return sys.replace(delta_one_photon=x)
    raise DomainError(f"unknown scan axis {scan_axis!r}")


def _remaining_initial(sys: LambdaSystem, duration: float) -> float:
    L = _liouvillian(sys)
    rho_t = expm(L * duration)[:, I * 3 + I]
    return float(rho_t[I * 3 + I].real)


def dark_resonance_scan(
    sys: LambdaSystem,
    pulse_duration: float,
    scan: Sequence[float],
    scan_axis: ScanAxis = "down",
    map_fn=map,
) -> np.ndarray:
    """Population left in ``|i>`` after a square two-color pulse, for each detuning.

    Parameters
    ----------
    sys : LambdaSystem
        Probe (``omega1_peak``) and pump (``omega2_peak``) held constant.
    pulse_duration : float
        Length of the square pulse in s.
    scan : sequence of float
        Detunings in rad/s.
    scan_axis : {"down", "up", "one-photon"}
        ``"down"`` scans the down-leg laser: the two-photon detuning equals the
        scan value and ``Delta`` stays fixed. ``"up"`` scans the up-leg laser,
        shifting both ``Delta`` and ``delta`` by the scan value. ``"one-photon"``
        sets ``Delta`` to the scan value at fixed ``delta``.

    Returns
    -------
    ndarray of shape (len(scan), 2)
        Columns are (detuning, remaining ``|i>`` population).

    The constant-field propagator is exact (matrix exponential of the
    Liouvillian); it agrees with :func:`evolve` on a ``constant`` schedule.
    """
    if not np.isfinite(pulse_duration) or pulse_duration <= 0:
        raise DomainError("pulse_duration must be positive")
    scan = np.asarray(scan, dtype=float)
    pops = list(map_fn(lambda x: _remaining_initial(_detuned(sys, x, scan_axis), pulse_duration), scan))
    return np.column_stack([scan, np.asarray(pops, dtype=float)])


def dark_resonance_width(sys: LambdaSystem, pulse_duration: float) -> float:
    """Full width at half maximum (Hz) of the transparency peak versus two-photon detuning.

    The peak is the ``|i>`` population at the two-photon resonance; its floor
    is the deepest absorption found on each side. Half-maximum crossings are
    bracketed on a logarithmic grid and refined with Brent's method.

    Raises
    ------
    NoPeakError
        If no transparency window rises above the absorption floor.
    """
    def f(x):
        return _remaining_initial(sys.replace(delta_two_photon=x), pulse_duration)

    peak = f(0.0)
    scale = sys.omega1_peak + sys.omega2_peak + sys.gamma_e + abs(sys.delta_one_photon)
    lo = min(1.0 / pulse_duration, scale) * 1e-3
    grid = np.geomspace(lo, 20 * scale + 1e3 / pulse_duration, 600)
    edges = []
    for sign in (1.0, -1.0):
        vals = np.array([f(sign * x) for x in grid])
        floor = vals.min()
        if peak - floor < 1e-3 * max(peak, 1e-300) or peak - floor < 1e-9:
            raise NoPeakError("no transparency window above the absorption floor")
        half = floor + 0.5 * (peak - floor)
        below = np.nonzero(vals < half)[0]
        if below.size == 0:
            raise NoPeakError("transparency peak does not fall to half maximum within the scan")
        k = below[0]
        a = 0.0 if k == 0 else grid[k - 1]
        edges.append(brentq(lambda x: f(sign * x) - half, a, grid[k], xtol=1e-12 * grid[k], rtol=1e-12))
    return float((edges[0] + edges[1]) / TWO_PI)


def pump_for_width(
    sys: LambdaSystem,
    pulse_duration: float,
    target_hz: float,
    bracket: tuple[float, float] = (TWO_PI * 1e4, TWO_PI * 1e8),
) -> float:
    """Pump Rabi frequency (rad/s) giving a transparency window of ``target_hz`` FWHM."""

    def g(log_omega):
        try:
            w = dark_resonance_width(sys.replace(omega2_peak=float(np.exp(log_omega))), pulse_duration)
        except NoPeakError:
            w = 0.0
        return w - target_hz

    lo, hi = np.log(bracket[0]), np.log(bracket[1])
    if g(lo) > 0 or g(hi) < 0:
        raise NoPeakError(f"target width {target_hz} Hz not reachable within the pump bracket")
    return float(np.exp(brentq(g, lo, hi, xtol=1e-10)))
