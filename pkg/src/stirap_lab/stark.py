"""Rigid-rotor molecule in a static electric field.

At fixed projection ``m`` the Stark Hamiltonian is tridiagonal in the rotational
quantum number ``N``: the diagonal carries ``B N (N + 1)`` and the field couples
``N`` to ``N + 1`` (states of opposite parity) through ``-d E cos(theta)``.
Energies are expressed as frequencies ``E / h`` in Hz, measured from the
zero-field ``N = 0`` level; fields are in V/m and dipoles in Debye.
"""

from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ContinuationError, DomainError
from .units import stark_coupling_hz

N_MAX_DEFAULT = 10
N_MAX_FLOOR = 3
CONVERGENCE_HZ = 1.0
MIN_OVERLAP = 0.5

__all__ = [
    "StarkModel",
    "StarkLevel",
    "PerturbativeShift",
    "PerturbationWarning",
    "rotational_energy",
    "coupling_coefficients",
    "stark_matrix",
    "stark_energies",
    "branch_energy",
    "stark_map",
    "perturbative_shift",
]


class PerturbationWarning(UserWarning):
    """Second-order perturbation theory is outside its range of validity."""


@dataclass(frozen=True)
class StarkModel:
    """Rotational constant ``b_rot`` (Hz), dipole (Debye), basis cutoff and projection ``m``."""

    b_rot: float
    dipole: float
    n_max: int = N_MAX_DEFAULT
    m: int = 0

    def __post_init__(self):
        if not np.isfinite(self.b_rot) or self.b_rot <= 0:
            raise DomainError(f"b_rot must be positive, got {self.b_rot}")
        if not np.isfinite(self.dipole) or self.dipole < 0:
            raise DomainError(f"dipole must be >= 0, got {self.dipole}")
        if int(self.n_max) != self.n_max or self.n_max < N_MAX_FLOOR:
            raise DomainError(f"n_max must be an integer >= {N_MAX_FLOOR}, got {self.n_max}")
        if abs(self.m) > self.n_max:
            raise DomainError(f"|m| = {abs(self.m)} exceeds n_max = {self.n_max}")

    def replace(self, **changes) -> "StarkModel":
        return dataclasses.replace(self, **changes)

    @property
    def n_values(self) -> np.ndarray:
        return np.arange(abs(self.m), self.n_max + 1)


@dataclass(frozen=True)
class StarkLevel:
    """One adiabatic branch: zero-field label ``n_label``, ``m_abs`` and its energy curve."""

    n_label: int
    m_abs: int
    fields: np.ndarray
    energies: np.ndarray

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fields.tolist(), self.energies.tolist()))

    @property
    def shifts(self) -> np.ndarray:
        """Energies relative to this branch's zero-field value."""
        return self.energies - self.energies[0]


class PerturbativeShift(NamedTuple):
    shift: float
    reliable: bool


def rotational_energy(b_rot, n):
    """Field-free rotor energy ``B N (N + 1)`` in the units of ``b_rot``."""
    n_arr = np.asarray(n)
    if np.any(n_arr < 0) or np.any(n_arr != np.floor(n_arr)):
        raise DomainError(f"N must be a non-negative integer, got {n}")
    return np.multiply(b_rot, n_arr * (n_arr + 1))[()]


def coupling_coefficients(n_max: int, m: int) -> np.ndarray:
    """``<N+1, m| cos(theta) |N, m>`` for ``N = |m| .. n_max - 1``."""
    n = np.arange(abs(m), n_max)
    return np.sqrt(((n + 1) ** 2 - m**2) / ((2 * n + 1) * (2 * n + 3)))


def _matrix(b_rot: float, x: float, n_max: int, m: int) -> np.ndarray:
    n = np.arange(abs(m), n_max + 1)
    off = -x * coupling_coefficients(n_max, m)
    return np.diag(b_rot * n * (n + 1.0)) + np.diag(off, 1) + np.diag(off, -1)


def stark_matrix(model: StarkModel, field: float) -> np.ndarray:
    """Real symmetric Stark Hamiltonian (Hz) in the ``|N, m>`` basis, ``N = |m| .. n_max``."""
    if not np.isfinite(field) or field < 0:
        raise DomainError(f"field must be >= 0, got {field}")
    return _matrix(model.b_rot, float(stark_coupling_hz(model.dipole, field)), model.n_max, model.m)


def stark_energies(model: StarkModel, field: float) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and eigenvectors of :func:`stark_matrix`."""
    return np.linalg.eigh(stark_matrix(model, field))


def branch_energy(model: StarkModel, fields, n: int) -> np.ndarray:
    """Energy (Hz) of the branch connecting to ``|n, model.m>`` at each field.

    Within one ``|m|`` block the tridiagonal matrix has a non-vanishing
    off-diagonal for any nonzero field, so its eigenvalues never cross and the
    branch is the ``(n - |m|)``-th lowest eigenvalue.
    """
    k = n - abs(model.m)
    if k < 0 or n > model.n_max:
        raise DomainError(f"N = {n} is not in the basis for |m| = {abs(model.m)}")
    return np.array([np.linalg.eigvalsh(stark_matrix(model, f))[k] for f in np.atleast_1d(fields)])


def _track(model: StarkModel, fields: np.ndarray, n_report: int) -> dict[int, np.ndarray]:
    m = abs(model.m)
    labels = list(range(m, min(n_report, model.n_max) + 1))
    if not labels:
        return {}
    n_basis = model.n_max - m + 1
    out = {n: np.empty(len(fields)) for n in labels}
    prev = None
    for j, f in enumerate(fields):
        w, v = stark_energies(model, f)
        if prev is None:
            # zero field: eigenvectors are basis states, labelled by N directly
            order = np.argmax(np.abs(v), axis=0)
            idx = {m + order[c]: c for c in range(n_basis)}
        else:
            overlap = np.abs(prev.T @ v)
            idx = {}
            for n, c_prev in prev_idx.items():
                c = int(np.argmax(overlap[c_prev]))
                if overlap[c_prev, c] < MIN_OVERLAP:
                    raise ContinuationError(
                        f"branch N={n}, |m|={m} lost between {fields[j - 1]:.6g} and {f:.6g} V/m "
                        f"(overlap {overlap[c_prev, c]:.3f}); use a finer field grid"
                    )
                idx[n] = c
            if len(set(idx.values())) != len(idx):
                raise ContinuationError(
                    f"two branches map to the same eigenvector near {f:.6g} V/m; use a finer field grid"
                )
        for n in labels:
            out[n][j] = w[idx[n]]
        # carry eigenvectors with their sign aligned to the previous point
        if prev is not None:
            for c_prev, c in zip(prev_idx.values(), idx.values()):
                if prev[:, c_prev] @ v[:, c] < 0:
                    v[:, c] *= -1
        prev = v
        prev_idx = {n: idx[n] for n in idx}
    return out


def stark_map(
    model: StarkModel,
    fields: Sequence[float],
    n_report: int = 2,
    check_convergence: bool = True,
) -> list[StarkLevel]:
    """Adiabatic Stark branches for every ``N <= n_report`` and every ``|m| <= N``.

    ``fields`` must be ascending and start at 0. Branches are continued from
    one field to the next by maximal eigenvector overlap. ``model.m`` is
    ignored; each ``|m|`` block is diagonalized separately (``+m`` and ``-m``
    are degenerate). With ``check_convergence`` the basis is doubled until the
    reported energies move by less than 1 Hz.

    Returns levels sorted by ``(|m|, N)``.

    Raises
    ------
    ContinuationError
        If the overlap between consecutive field points drops below 0.5.
    """
    fields = np.asarray(fields, dtype=float)
    if fields.ndim != 1 or fields.size == 0 or fields[0] != 0.0:
        raise DomainError("fields must be a 1-D sequence starting at 0")
    if np.any(np.diff(fields) <= 0):
        raise DomainError("fields must be strictly ascending")
    n_max = max(model.n_max, n_report + N_MAX_FLOOR)

    def compute(n_max):
        res = {}
        for m in range(n_report + 1):
            tracked = _track(model.replace(n_max=n_max, m=m), fields, n_report)
            for n, e in tracked.items():
                res[(m, n)] = e
        return res

    result = compute(n_max)
    while check_convergence:
        finer = compute(2 * n_max)
        worst = max(np.max(np.abs(finer[k] - result[k])) for k in result)
        result = finer
        n_max *= 2
        if worst < CONVERGENCE_HZ or n_max > 256:
            break
    return [StarkLevel(n, m, fields.copy(), e) for (m, n), e in sorted(result.items())]


def perturbative_shift(model: StarkModel, field: float, n: int, m: int) -> PerturbativeShift:
    """Second-order Stark shift (Hz) of ``|n, m>``.

    For ``N = 0`` this is ``-(dE/h)^2 / (6B)``; for ``N > 0`` it is
    ``(dE/h)^2 / (2B) * (N(N+1) - 3m^2) / (N(N+1)(2N-1)(2N+3))``.
    The result is flagged unreliable (and a :class:`PerturbationWarning` is
    issued) when ``dE/h > 0.3 B``.
    """
    if n < 0 or abs(m) > n:
        raise DomainError(f"invalid state N={n}, m={m}")
    if not np.isfinite(field) or field < 0:
        raise DomainError(f"field must be >= 0, got {field}")
    x = float(stark_coupling_hz(model.dipole, field))
    b = model.b_rot
    if n == 0:
        shift = -(x**2) / (6 * b)
    else:
        nn = n * (n + 1)
        shift = x**2 / (2 * b) * (nn - 3 * m**2) / (nn * (2 * n - 1) * (2 * n + 3))
    reliable = x <= 0.3 * b
    if not reliable:
        warnings.warn(
            f"dE/h = {x:.4g} Hz exceeds 0.3 B; second-order shift is unreliable",
            PerturbationWarning,
            stacklevel=2,
        )
    return PerturbativeShift(shift, reliable)
