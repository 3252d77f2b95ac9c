"""The centred chart on probability measures.

``phi(P) = phi_tilde(P) - E phi_tilde(P)`` takes values in mean-zero vectors.
Its inverse needs the normalisation constant ``Z(a)``, the unique root of
``E psi(a + z) = 1``; ``rho(a) = a + Z(a)`` is the inclusion of the
probability measures expressed in the two charts.

Functions taking a centred vector ``a`` also accept a stack of them (shape
``(..., n)``) where noted; that is what the sweeps in :mod:`igeo.verify` use.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NotProbability, NumericsError
from .kernels import DEFAULT_TOL, ToleranceConfig, psi
from .measures import FiniteMeasure, SampleSpace, chart_forward, expectation

PROB_TOL = 1e-10


@dataclass(frozen=True)
class NormalizationResult:
    z: float | np.ndarray
    residual: float | np.ndarray
    iterations: int


def center(space: SampleSpace, a_tilde) -> np.ndarray:
    a_tilde = space.check_vector(a_tilde, "chart vector")
    return a_tilde - np.expand_dims(expectation(space, a_tilde), -1)


def check_centred(space: SampleSpace, a, name: str = "a") -> np.ndarray:
    a = space.check_vector(a, name)
    m = np.abs(expectation(space, a))
    scale = 1.0 + np.max(np.abs(a), axis=-1)
    if np.any(m > 1e-12 * scale):
        raise DomainError(f"{name} must have zero mean under the reference weights")
    return a


def solve_Z(space: SampleSpace, a, cfg: ToleranceConfig = DEFAULT_TOL) -> NormalizationResult:
    """Root ``z`` of ``E_mu psi(a + z) = 1``.

    The map ``z -> E psi(a + z)`` is smooth, convex and strictly increasing.
    A bracket is grown by doubling from ``z = 1`` and a safeguarded Newton
    iteration (bisection whenever Newton leaves the bracket) is run inside it.
    Accepts a single vector or a stack of vectors.
    """
    a = check_centred(space, a)
    w = space.weights
    batch = a.reshape(-1, space.n)
    m = batch.shape[0]

    def Psi(z):
        y = psi(batch + z[:, None], cfg)
        return y @ w - 1.0, (y / (1.0 + y)) @ w

    # bracket: lo where Psi < 1, hi where Psi > 1
    lo = np.full(m, 1.0)
    hi = np.full(m, 1.0)
    f_lo, _ = Psi(lo)
    width = 1.0
    for _ in range(cfg.max_iter):
        need_lo = f_lo > 0
        need_hi = Psi(hi)[0] < 0
        if not (need_lo.any() or need_hi.any()):
            break
        lo = np.where(need_lo, lo - width, lo)
        hi = np.where(need_hi, hi + width, hi)
        f_lo = Psi(lo)[0]
        width *= 2.0
    else:
        raise NumericsError("could not bracket the normalisation constant")

    z = np.clip(np.ones(m), lo, hi)
    active = np.ones(m, dtype=bool)
    iterations = 0
    f = np.zeros(m)
    for iterations in range(1, cfg.max_iter + 1):
        f, df = Psi(z)
        lo = np.where(f < 0, z, lo)
        hi = np.where(f > 0, z, hi)
        active = np.abs(f) > cfg.root_abs_tol
        if not active.any():
            break
        newton = z - f / df
        bisect = 0.5 * (lo + hi)
        inside = (newton > lo) & (newton < hi)
        z_new = np.where(inside, newton, bisect)
        stalled = z_new == z
        z = np.where(active, z_new, z)
        # a root resolved to the last ulp cannot improve further
        if np.all(stalled | ~active):
            break
    f, _ = Psi(z)
    if np.any(np.abs(f) > 1e2 * cfg.root_abs_tol):
        raise NumericsError(f"normalisation constant did not converge (residual {np.max(np.abs(f)):.3g})")

    shape = a.shape[:-1]
    if shape == ():
        return NormalizationResult(float(z[0]), float(f[0]), iterations)
    return NormalizationResult(z.reshape(shape), f.reshape(shape), iterations)


def _require_probability(P: FiniteMeasure) -> None:
    if not P.is_probability(PROB_TOL):
        raise NotProbability(f"measure has total mass {P.mass!r}, expected 1")


def phi_forward(P: FiniteMeasure) -> np.ndarray:
    """``p - 1 + log p - E log p``."""
    _require_probability(P)
    return center(P.space, chart_forward(P))


def rho(space: SampleSpace, a, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """``a + Z(a)``: the balanced-chart coordinates of ``phi^{-1}(a)``."""
    res = solve_Z(space, a, cfg)
    return np.asarray(a, dtype=float) + np.expand_dims(res.z, -1)


def phi_inverse(space: SampleSpace, a, cfg: ToleranceConfig = DEFAULT_TOL) -> FiniteMeasure:
    p = psi(rho(space, a, cfg), cfg)
    return FiniteMeasure(space, p)


def _psi1_weights(space, a, cfg):
    a_t = rho(space, a, cfg)
    p = psi(a_t, cfg)
    return p, p / (1.0 + p)


def d_rho(space: SampleSpace, a, u, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """First derivative ``u - E[psi'(rho(a)) u] / E[psi'(rho(a))]``."""
    a = check_centred(space, a)
    u = check_centred(space, u, "u")
    _, w1 = _psi1_weights(space, a, cfg)
    return _d_rho_with(space, w1, u)


def _d_rho_with(space, w1, u):
    return u - expectation(space, w1 * u) / expectation(space, w1)


def d2_rho(space: SampleSpace, a, u, v, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Second derivative of ``rho``; a constant vector.

    ``-E[psi'(rho(a)) Drho u Drho v / (1+p)^2] / E[psi'(rho(a))]``.
    """
    a = check_centred(space, a)
    u = check_centred(space, u, "u")
    v = check_centred(space, v, "v")
    p, w1 = _psi1_weights(space, a, cfg)
    du = _d_rho_with(space, w1, u)
    dv = _d_rho_with(space, w1, v)
    val = -expectation(space, w1 * (du * dv) / (1.0 + p) ** 2) / expectation(space, w1)
    return np.full(space.n, val)


def tangent_split(P: FiniteMeasure, v_tilde, cfg: ToleranceConfig = DEFAULT_TOL):
    """Split an ambient tangent direction at ``P`` into ``(u, y)``.

    ``v_tilde = d_rho(a, u) + y * psi'(rho(a))``, with ``y`` the L2(mu)
    projection onto the normal line spanned by ``psi'(rho(a))``.
    """
    _require_probability(P)
    space = P.space
    v_tilde = space.check_vector(v_tilde, "v_tilde")
    p = P.density
    e = p / (1.0 + p)
    y = expectation(space, v_tilde * e) / expectation(space, e * e)
    rest = v_tilde - y * e
    return center(space, rest), float(y)


def normal_direction(P: FiniteMeasure) -> np.ndarray:
    """``psi'(phi_tilde(P)) = p / (1 + p)``, spanning the complement of ``T_P M``."""
    p = P.density
    return p / (1.0 + p)
