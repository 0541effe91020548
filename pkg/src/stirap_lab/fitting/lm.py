"""Damped least squares (Levenberg-Marquardt) for small, smooth problems.

The cost ``0.5 * |r|^2`` never increases between accepted iterates beyond
floating-point rounding: a step is taken if it lowers the cost, or if the cost
is flat to rounding and the gradient test improves. The iteration stops successfully when every Jacobian column is orthogonal to the
residual to within ``gtol`` (the scale-free gradient test used by MINPACK),
or when the residual norm falls below ``r_floor``. Callers whose residuals are
much smaller than the data they are computed from may pass ``r_noise``, the
rounding level of the residual vector; a gradient component no larger than
``|J_k| * r_noise`` cannot be resolved and counts as zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

# relative cost change treated as rounding noise
_FLAT = 64 * np.finfo(float).eps

__all__ = ["LMResult", "levenberg_marquardt", "numeric_jacobian", "covariance"]


@dataclass
class LMResult:
    params: np.ndarray
    residuals: np.ndarray
    jacobian: np.ndarray
    cost: float
    n_iter: int
    converged: bool
    gradient_cosine: float
    message: str


def numeric_jacobian(fun: Callable, p: np.ndarray, rel_step: float = 1e-6, abs_step=None) -> np.ndarray:
    """Central-difference Jacobian of ``fun`` at ``p``."""
    p = np.asarray(p, dtype=float)
    if abs_step is None:
        abs_step = np.full_like(p, 1e-12)
    cols = []
    for k in range(p.size):
        h = max(rel_step * abs(p[k]), abs_step[k])
        up, dn = p.copy(), p.copy()
        up[k] += h
        dn[k] -= h
        cols.append((np.asarray(fun(up)) - np.asarray(fun(dn))) / (2 * h))
    return np.column_stack(cols)


def _gradient_cosine(J: np.ndarray, r: np.ndarray) -> float:
    rnorm = np.linalg.norm(r)
    if rnorm == 0:
        return 0.0
    g = J.T @ r
    cnorm = np.linalg.norm(J, axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos = np.where(cnorm > 0, np.abs(g) / (cnorm * rnorm), 0.0)
    return float(np.max(cos)) if cos.size else 0.0


def _at_rounding_level(J: np.ndarray, r: np.ndarray, r_noise: float) -> bool:
    return bool(np.all(np.abs(J.T @ r) <= np.linalg.norm(J, axis=0) * r_noise))


def levenberg_marquardt(
    fun: Callable[[np.ndarray], np.ndarray],
    jac: Callable[[np.ndarray], np.ndarray],
    p0,
    gtol: float = 1e-10,
    max_iter: int = 200,
    r_floor: float = 0.0,
    lam0: float = 1e-3,
    r_noise: float = 0.0,
) -> LMResult:
    """Minimize ``0.5 * |fun(p)|^2`` starting from ``p0``.

    ``jac(p)`` returns the Jacobian of the residual vector, shape
    ``(n_residuals, n_params)``. Marquardt's diagonal scaling is used for the
    damping term.
    """
    p = np.array(p0, dtype=float)
    r = np.asarray(fun(p), dtype=float)
    J = np.asarray(jac(p), dtype=float)
    cost = 0.5 * r @ r
    lam = lam0
    message = "maximum number of iterations reached"
    converged = False
    it = 0
    for it in range(max_iter + 1):
        cos = _gradient_cosine(J, r)
        if cos <= gtol:
            converged, message = True, "gradient below tolerance"
            break
        if r_noise > 0 and _at_rounding_level(J, r, r_noise):
            converged, message = True, "gradient at the rounding level of the residuals"
            break
        if np.sqrt(2 * cost) <= r_floor:
            converged, message = True, "residual below floor"
            break
        if it == max_iter:
            break
        A = J.T @ J
        g = J.T @ r
        d = np.diag(A).copy()
        d[d <= 0] = 1.0
        J_new = None
        while True:
            try:
                step = np.linalg.solve(A + lam * np.diag(d), -g)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(A + lam * np.diag(d), -g, rcond=None)[0]
            p_new = p + step
            r_new = np.asarray(fun(p_new), dtype=float)
            # cost change from the residual difference stays accurate near the optimum
            dcost = 0.5 * (r_new - r) @ (r_new + r)
            if np.isfinite(dcost) and dcost <= 0:
                break
            if np.isfinite(dcost) and dcost <= _FLAT * cost:
                # cost flat to rounding: accept only if the gradient test improves
                J_new = np.asarray(jac(p_new), dtype=float)
                if _gradient_cosine(J_new, r_new) < cos:
                    break
                J_new = None
            lam *= 10.0
            if lam > 1e20:
                break
        if lam > 1e20:
            message = "damping diverged; no downhill step"
            break
        p, r = p_new, r_new
        cost = 0.5 * r @ r
        J = J_new if J_new is not None else np.asarray(jac(p), dtype=float)
        lam = max(lam / 10.0, 1e-12)
    return LMResult(p, r, J, float(cost), it, converged, _gradient_cosine(J, r), message)


def covariance(J: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """Linearized parameter covariance ``scale * (J^T J)^+``."""
    return scale * np.linalg.pinv(J.T @ J)
