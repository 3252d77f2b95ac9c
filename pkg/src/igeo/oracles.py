"""Independent reference computations used to cross-check the main routines.

Nothing here calls the closed-form derivative code it is meant to check:
roots come from plain bisection, divergences from the textbook sums,
derivatives from central finite differences, and exponential-family
geometry from moments under ``P_y``.
"""
from __future__ import annotations

import math

import numpy as np

from .measures import SampleSpace

RNG_ALGORITHM = "numpy.random.PCG64"


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def psi_bisect(z: float, iters: int = 300) -> float:
    """Root of ``y + log y = z`` by bisection on ``log y`` in ``[z - 1, log max(1, z)]``."""
    lo, hi = min(z - 1.0, 0.0), math.log(max(1.0, z))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if math.exp(mid) + mid < z:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * (1.0 + abs(mid)):
            break
    return math.exp(0.5 * (lo + hi))


def normalizer_bisect(weights, a, iters: int = 300) -> float:
    """Root of ``sum_i w_i psi(a_i + z) = 1`` by bisection, with ``psi`` from :func:`psi_bisect`."""

    def mass(z):
        return sum(w * psi_bisect(ai + z) for w, ai in zip(weights, a))

    lo, hi = -1.0, 1.0
    while mass(lo) > 1.0:
        lo *= 2.0
    while mass(hi) < 1.0:
        hi *= 2.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mass(mid) < 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * (1.0 + abs(mid)):
            break
    return 0.5 * (lo + hi)


def divergence_direct(alpha: float, weights, p, q) -> float:
    """Extended alpha-divergence by literal summation of its three-branch definition."""
    w, p, q = (np.asarray(x, dtype=float) for x in (weights, p, q))
    P, Q = w @ p, w @ q
    if alpha == -1.0:
        return float(Q - P + w @ (p * np.log(p / q)))
    if alpha == 1.0:
        return float(P - Q + w @ (q * np.log(q / p)))
    return float(2.0 / (1.0 + alpha) * P + 2.0 / (1.0 - alpha) * Q
                 - 4.0 / (1.0 - alpha**2) * (w @ (p ** ((1 - alpha) / 2) * q ** ((1 + alpha) / 2))))


def fd_mixed_second(f, h: float) -> float:
    """``d^2 f(s, t) / ds dt`` at 0 from the four-point stencil."""
    return (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h)


def fd_mixed_third(f, h: float) -> float:
    """``d^3 f(s, t, r) / ds dt dr`` at 0 from the eight-point stencil."""
    total = 0.0
    for s in (1, -1):
        for t in (1, -1):
            for r in (1, -1):
                total += s * t * r * f(s * h, t * h, r * h)
    return total / (8.0 * h**3)


def fd_derivative(f, x: float, h: float) -> float:
    return (f(x + h) - f(x - h)) / (2.0 * h)


def expfam_moments(space: SampleSpace, statistics, y):
    """Covariance and third central moments of the statistics under ``P_y``."""
    eta = np.atleast_2d(np.asarray(statistics, dtype=float))
    y = np.asarray(y, dtype=float)
    s = y @ eta
    unnorm = space.weights * np.exp(s - s.max())
    prob = unnorm / unnorm.sum()  # P_y({x}) for each sample point
    m = eta.T - prob @ eta.T
    cov = np.einsum("x,xi,xj->ij", prob, m, m)
    third = np.einsum("x,xi,xj,xl->ijl", prob, m, m, m)
    return cov, third


def expfam_christoffel(space: SampleSpace, statistics, y, alpha: float) -> np.ndarray:
    """``(1-alpha)/2 g^{kl} E_P[m_i m_j m_l]`` indexed ``[k, i, j]``."""
    cov, third = expfam_moments(space, statistics, y)
    return (1.0 - alpha) / 2.0 * np.einsum("kl,ijl->kij", np.linalg.inv(cov), third)


def christoffel_fd(family, y, alpha: float, divergence_fn, h: float = 1e-3) -> np.ndarray:
    """``-g^{kl} d_i d_j d_l D_alpha`` with ``d_i, d_j`` on the first argument, by finite differences.

    ``divergence_fn(alpha, p, q)`` must return the divergence between the
    densities ``p`` and ``q``. The metric is itself taken from a mixed second
    difference, so no closed form enters.
    """
    y = np.asarray(y, dtype=float)
    d = family.dim
    E = np.eye(d)

    def D(y1, y2):
        return divergence_fn(alpha, family.density(y1), family.density(y2))

    g = np.empty((d, d))
    for i in range(d):
        for j in range(d):
            g[i, j] = -fd_mixed_second(lambda s, t: D(y + s * E[i], y + t * E[j]), h)
    T = np.empty((d, d, d))
    for i in range(d):
        for j in range(d):
            for l in range(d):
                T[i, j, l] = fd_mixed_third(
                    lambda s, t, r: D(y + s * E[i] + t * E[j], y + r * E[l]), h)
    return -np.einsum("kl,ijl->kij", np.linalg.inv(g), T)


def random_space(rng: np.random.Generator, n: int) -> SampleSpace:
    w = rng.uniform(0.2, 1.0, size=n)
    w = w / w.sum()
    # exact renormalisation keeps the weights summing to 1 within an ulp or two
    w[-1] = 1.0 - w[:-1].sum()
    return SampleSpace(w)


def random_centred(rng: np.random.Generator, space: SampleSpace, size=None, scale: float = 3.0):
    shape = (space.n,) if size is None else (size, space.n)
    a = rng.uniform(-scale, scale, size=shape)
    return a - np.expand_dims(a @ space.weights, -1)
