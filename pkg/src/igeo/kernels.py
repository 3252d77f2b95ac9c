"""Scalar kernels behind the balanced chart.

``theta(y) = y + log y`` maps ``(0, inf)`` onto the real line; ``psi`` is its
inverse. Every chart, divergence and connection coefficient in the package is
assembled from ``psi`` and the family ``xi_alpha``.

All functions are elementwise and accept scalars or arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidAlpha, NumericsError

# exp() stays finite and psi(z) stays a normal double inside this range
Z_LIMIT = 700.0


@dataclass(frozen=True)
class ToleranceConfig:
    root_abs_tol: float = 1e-14
    max_iter: int = 200
    fd_step: float = 1e-4

    def __post_init__(self):
        if not self.root_abs_tol > 0:
            raise DomainError(f"root_abs_tol must be positive, got {self.root_abs_tol}")
        if self.max_iter < 1:
            raise DomainError(f"max_iter must be >= 1, got {self.max_iter}")
        if not self.fd_step > 0:
            raise DomainError(f"fd_step must be positive, got {self.fd_step}")


DEFAULT_TOL = ToleranceConfig()


def check_alpha(alpha) -> float:
    alpha = float(alpha)
    if not -1.0 <= alpha <= 1.0:
        raise InvalidAlpha(f"alpha must lie in [-1, 1], got {alpha}")
    return alpha


def _out(x: np.ndarray, like):
    return float(x) if np.ndim(like) == 0 else x


def theta(y):
    """``y + log y`` for ``y > 0``."""
    y_arr = np.asarray(y, dtype=float)
    if np.any(~(y_arr > 0)):
        raise DomainError("theta is defined for y > 0 only")
    return _out(y_arr + np.log(y_arr), y)


def psi(z, cfg: ToleranceConfig = DEFAULT_TOL):
    """Inverse of :func:`theta`.

    Newton's method is run on ``t = log y`` (where ``e^t + t - z`` is convex and
    increasing), with a bisection fallback on the bracket
    ``[min(e^(z-1), 1), max(1, z)]`` for entries that fail to settle.
    """
    z_arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z_arr)):
        raise DomainError("psi requires finite arguments")
    if np.any(np.abs(z_arr) > Z_LIMIT):
        raise DomainError(f"psi argument outside [-{Z_LIMIT}, {Z_LIMIT}]")
    zf = z_arr.reshape(-1)

    # seeds y0 = e^z (z < 0), y0 = 1 (0 <= z < 1), y0 = z (z >= 1), in log form
    t = np.where(zf < 0, zf, np.where(zf >= 1, np.log(np.maximum(zf, 1.0)), 0.0))
    active = np.ones(zf.shape, dtype=bool)
    scale = 1.0 + np.abs(zf)
    for _ in range(cfg.max_iter):
        if not active.any():
            break
        ta = t[active]
        et = np.exp(ta)
        step = (et + ta - zf[active]) / (et + 1.0)
        t[active] = ta - step
        done = np.abs(step) <= cfg.root_abs_tol * (1.0 + np.abs(ta))
        idx = np.flatnonzero(active)
        active[idx[done]] = False

    if active.any():
        t = _psi_bisect_log(zf, t, active, cfg)
    y = np.exp(t)
    residual = np.abs(y + t - zf)
    if np.any(residual > 1e3 * cfg.root_abs_tol * scale):
        raise NumericsError("psi root finder did not converge; check ToleranceConfig")
    return _out(y.reshape(z_arr.shape), z)


def _psi_bisect_log(zf, t, active, cfg):
    lo = np.minimum(zf - 1.0, 0.0)
    hi = np.log(np.maximum(1.0, zf))
    for _ in range(cfg.max_iter):
        mid = 0.5 * (lo + hi)
        f = np.exp(mid) + mid - zf
        lo = np.where(f < 0, mid, lo)
        hi = np.where(f < 0, hi, mid)
        if np.all((hi - lo)[active] <= cfg.root_abs_tol * (1.0 + np.abs(mid[active]))):
            break
    else:
        raise NumericsError(f"psi bisection did not converge in {cfg.max_iter} steps")
    t = t.copy()
    t[active] = 0.5 * (lo + hi)[active]
    return t


def _psi_derivs_from_value(y, order: int):
    if order == 1:
        return y / (1.0 + y)
    if order == 2:
        return y / (1.0 + y) ** 3
    if order == 3:
        return y * (1.0 - 2.0 * y) / (1.0 + y) ** 5
    if order == 4:
        return y * (1.0 - 8.0 * y + 6.0 * y * y) / (1.0 + y) ** 7
    raise DomainError(f"psi_deriv order must be in 1..4, got {order}")


def psi_deriv(z, order: int = 1, cfg: ToleranceConfig = DEFAULT_TOL):
    """Derivative of ``psi`` of the given order (1 to 4).

    Each order is a rational function of ``y = psi(z)``, obtained by repeatedly
    applying ``d/dz f(psi) = f'(psi) * psi / (1 + psi)``.
    """
    if order not in (1, 2, 3, 4):
        raise DomainError(f"psi_deriv order must be in 1..4, got {order}")
    y = np.asarray(psi(z, cfg), dtype=float)
    return _out(_psi_derivs_from_value(y, order), z)


def xi_from_psi(alpha: float, y, order: int = 0, z=None):
    """``xi_alpha`` and its derivatives expressed through ``y = psi(z)``.

    ``z`` is unused except that it may be supplied for the ``alpha = 1``
    branch; ``log y`` is used there since it equals ``z - y`` without the
    cancellation.
    """
    y = np.asarray(y, dtype=float)
    b = (1.0 - alpha) / 2.0
    c = 1.0 - b
    yb = y**b
    if order == 0:
        if alpha == 1.0:
            return np.log(y)
        return yb / b
    if order == 1:
        return yb / (1.0 + y)
    if order == 2:
        return yb * (b - c * y) / (1.0 + y) ** 3
    if order == 3:
        poly = b * b + y * (b * b - b * c - c - 3.0 * b) + y * y * (2.0 * c - b * c)
        return yb * poly / (1.0 + y) ** 5
    raise DomainError(f"xi_alpha order must be in 0..3, got {order}")


def xi_alpha(alpha, z, order: int = 0, cfg: ToleranceConfig = DEFAULT_TOL):
    """``xi_alpha(z) = (2/(1-alpha)) psi(z)^((1-alpha)/2)``, or ``log psi(z)`` at alpha = 1.

    ``order`` selects the derivative (0 to 3). ``xi_{-1}`` is ``psi`` itself.
    """
    alpha = check_alpha(alpha)
    if order not in (0, 1, 2, 3):
        raise DomainError(f"xi_alpha order must be in 0..3, got {order}")
    y = np.asarray(psi(z, cfg), dtype=float)
    if alpha == -1.0 and order == 0:
        return _out(y, z)
    return _out(xi_from_psi(alpha, y, order), z)
