"""Registered invariant sweeps behind ``igeo verify``.

Each check draws its inputs from a seeded generator, returns the largest
violation it observed, and passes when that value is at most its tolerance.
Inequality checks report ``max(lhs - rhs, 0)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import divergence_geometry as dv
from .kernels import ToleranceConfig, psi, psi_deriv, theta
from .measures import FiniteMeasure, alpha_embed, chart_forward, chart_inverse, expectation, l2_inner
from .oracles import (
    christoffel_fd,
    expfam_christoffel,
    expfam_moments,
    fd_mixed_second,
    fd_mixed_third,
    make_rng,
    psi_bisect,
    random_centred,
    random_space,
)
from .prob_chart import center, d_rho, phi_forward, phi_inverse, rho
from .submanifolds import (
    christoffel,
    expfam_build,
    fisher_matrix,
    geodesic,
    line_path,
    parallel_transport,
)

ALPHA_GRID = (-1.0, -0.9, -0.5, 0.0, 0.5, 0.9, 1.0)
OPEN_ALPHA_GRID = (-0.9, -0.5, 0.0, 0.5, 0.9)


@dataclass(frozen=True)
class Invariant:
    name: str
    tolerance: float
    check: Callable[[np.random.Generator, int], float]


REGISTRY: list[Invariant] = []


def invariant(name: str, tolerance: float):
    def register(fn):
        REGISTRY.append(Invariant(name, tolerance, fn))
        return fn
    return register


def _space(rng, lo=3, hi=12):
    return random_space(rng, int(rng.integers(lo, hi + 1)))


@invariant("psi_round_trip", 1e-12)
def _psi_round_trip(rng, samples):
    z = np.arange(-500, 501) / 10.0
    return float(np.max(np.abs(theta(psi(z)) - z)))


@invariant("psi_bisection_agreement", 1e-12)
def _psi_bisection(rng, samples):
    z = rng.uniform(-50, 50, size=min(samples, 200))
    ref = np.array([psi_bisect(x) for x in z])
    return float(np.max(np.abs(psi(z) - ref) / (1.0 + ref)))


@invariant("psi_derivative_fd", 1e-6)
def _psi_fd(rng, samples):
    z = np.linspace(-20, 20, 81)
    h = 1e-4
    worst = np.max(np.abs(psi_deriv(z, 1) - (psi(z + h) - psi(z - h)) / (2 * h)))
    for k in (2, 3, 4):
        fd = (psi_deriv(z + h, k - 1) - psi_deriv(z - h, k - 1)) / (2 * h)
        worst = max(worst, np.max(np.abs(psi_deriv(z, k) - fd)))
    return float(worst)


@invariant("chart_bijection", 1e-10)
def _chart_bijection(rng, samples):
    worst = 0.0
    for _ in range(samples):
        S = _space(rng)
        a = rng.uniform(-10, 10, S.n)
        worst = max(worst, np.max(np.abs(chart_forward(chart_inverse(S, a)) - a)))
        P = FiniteMeasure(S, rng.uniform(0.01, 10, S.n))
        q = chart_inverse(S, chart_forward(P)).density
        worst = max(worst, np.max(np.abs(q - P.density) / P.density))
    return float(worst)


@invariant("centred_chart_bijection", 1e-10)
def _phi_bijection(rng, samples):
    worst = 0.0
    for _ in range(samples):
        S = _space(rng)
        a = random_centred(rng, S)
        worst = max(worst, np.max(np.abs(phi_forward(phi_inverse(S, a)) - a)))
    return float(worst)


@invariant("normalisation", 1e-12)
def _normalisation(rng, samples):
    S = _space(rng, 8, 8)
    a = random_centred(rng, S, samples, scale=5.0)
    return float(np.max(np.abs(expectation(S, psi(rho(S, a))) - 1.0)))


def _random_pair(rng, S):
    p = rng.uniform(0.05, 5.0, S.n)
    q = rng.uniform(0.05, 5.0, S.n)
    return FiniteMeasure(S, p), FiniteMeasure(S, q)


@invariant("divergence_nonnegative", 0.0)
def _nonneg(rng, samples):
    worst = 0.0
    for _ in range(samples):
        S = _space(rng)
        P, Q = _random_pair(rng, S)
        for al in ALPHA_GRID:
            worst = max(worst, -dv.divergence(al, P, Q), abs(dv.divergence(al, P, P)))
    return worst


@invariant("divergence_skew_symmetry", 1e-12)
def _skew(rng, samples):
    worst = 0.0
    for _ in range(samples):
        S = _space(rng)
        P, Q = _random_pair(rng, S)
        for al in ALPHA_GRID:
            worst = max(worst, abs(dv.divergence(al, P, Q) - dv.divergence(-al, Q, P)))
    return worst


@invariant("divergence_kernel_route", 1e-12)
def _kernel_route(rng, samples):
    worst = 0.0
    for _ in range(samples):
        S = _space(rng)
        P, Q = _random_pair(rng, S)
        for al in ALPHA_GRID:
            worst = max(worst, abs(dv.divergence(al, P, Q) - dv.divergence_via_kernels(
                al, S, chart_forward(P), chart_forward(Q))))
    return worst


def _fd_divergence(S):
    def D(al, x, y):
        return dv.divergence(al, chart_inverse(S, x), chart_inverse(S, y))
    return D


@invariant("fisher_metric_fd", 1e-6)
def _fisher_fd(rng, samples):
    worst = 0.0
    for _ in range(max(samples // 20, 3)):
        S = _space(rng)
        D = _fd_divergence(S)
        a = rng.uniform(-2, 2, S.n)
        u, v = rng.normal(size=(2, S.n))
        ref = dv.fisher_inner(chart_inverse(S, a), u, v)
        for al in ALPHA_GRID:
            fd = -fd_mixed_second(lambda s, t: D(al, a + s * u, a + t * v), 1e-4)
            worst = max(worst, abs(fd - ref) / max(abs(ref), 1e-3))
    return worst


@invariant("third_derivative_fd", 1e-5)
def _third_fd(rng, samples):
    worst = 0.0
    for _ in range(max(samples // 20, 3)):
        S = _space(rng)
        D = _fd_divergence(S)
        a = rng.uniform(-2, 2, S.n)
        u, v, w = rng.normal(size=(3, S.n))
        P = chart_inverse(S, a)
        for al in ALPHA_GRID:
            fd = fd_mixed_third(lambda s, t, r: D(al, a + s * u + t * v, a + r * w), 1e-4)
            contraction = -expectation(S, dv.fisher_weight(P.density) * dv.gamma_tilde(al, a, u, v) * w)
            worst = max(worst, abs(fd - contraction))
    return worst


@invariant("l2_representation", 1e-12)
def _l2rep(rng, samples):
    worst = 0.0
    for _ in range(samples):
        S = _space(rng)
        P, Q = _random_pair(rng, S)
        for al in OPEN_ALPHA_GRID:
            lhs = l2_inner(S, alpha_embed(al, P), alpha_embed(-al, Q))
            rhs = 4.0 / (1 - al**2) * expectation(S, P.density ** ((1 - al) / 2) * Q.density ** ((1 + al) / 2))
            worst = max(worst, abs(lhs - rhs) / abs(rhs))
    return worst


def _probability_batch(rng, samples):
    S = _space(rng, 8, 8)
    a = random_centred(rng, S, samples, scale=4.0)
    p = psi(rho(S, a))
    return S, a, p


@invariant("inequality_relbnd", 0.0)
def _relbnd(rng, samples):
    S, a, p = _probability_batch(rng, samples)
    ones = np.ones_like(p)
    lhs = dv.divergence_batch(-1.0, S, p, ones) + dv.divergence_batch(1.0, S, p, ones)
    rhs = expectation(S, a * a) / 2.0
    return float(max(np.max(lhs - rhs), 0.0))


@invariant("inequality_logrho", 0.0)
def _logrho(rng, samples):
    S, a, p = _probability_batch(rng, samples)
    lhs = -np.log(expectation(S, p / (1.0 + p)))
    rhs = dv.divergence_batch(1.0, S, p, np.ones_like(p)) + np.log(2.0)
    return float(max(np.max(lhs - rhs), 0.0))


@invariant("inequality_fishdom", 0.0)
def _fishdom(rng, samples):
    S, a, p = _probability_batch(rng, samples)
    u = rng.normal(size=p.shape) * rng.uniform(0.1, 10.0, size=(p.shape[0], 1))
    lhs = expectation(S, dv.fisher_weight(p) * u * u)
    rhs = expectation(S, u * u)
    return float(max(np.max(lhs - rhs), 0.0))


@invariant("tangent_orthogonality", 1e-12)
def _orthogonality(rng, samples):
    worst = 0.0
    for _ in range(samples):
        S = _space(rng)
        a = random_centred(rng, S)
        u = random_centred(rng, S)
        p = psi(rho(S, a))
        du = d_rho(S, a, u)
        worst = max(worst, abs(expectation(S, p / (1 + p) * du)) / (1 + np.max(np.abs(du))),
                    np.max(np.abs(center(S, du) - u)))
    return float(worst)


def _field_family(rng, n):
    A = rng.normal(size=(n, n)) * 0.3
    c1, c2, c3 = rng.normal(size=(3, n))
    U = dv.VectorField(lambda P: np.sin(chart_forward(P)) * c1,
                       lambda P, d: np.cos(chart_forward(P)) * c1 * d)
    V = dv.VectorField(lambda P: A @ chart_forward(P) + c2, lambda P, d: A @ d)
    W = dv.VectorField(lambda P: np.tanh(chart_forward(P)) * c3,
                       lambda P, d: c3 * d / np.cosh(chart_forward(P)) ** 2)
    return U, V, W


@invariant("duality_residual", 1e-8)
def _duality(rng, samples):
    worst = 0.0
    for _ in range(max(samples // 20, 3)):
        S = _space(rng)
        U, V, W = _field_family(rng, S.n)
        P = chart_inverse(S, rng.uniform(-2, 2, S.n))
        for al in ALPHA_GRID:
            worst = max(worst, dv.duality_residual(al, U, V, W, P))
    return worst


def _centred_fields(rng, S):
    B = rng.normal(size=(S.n, S.n)) * 0.3
    c1, c2 = rng.normal(size=(2, S.n))

    def cen(x):
        return x - x @ S.weights

    U = dv.VectorField(lambda P: cen(np.sin(phi_forward(P)) * c1), on_manifold=True)
    V = dv.VectorField(lambda P: cen(B @ phi_forward(P) + c2),
                       lambda P, d: cen(B @ d), on_manifold=True)
    return U, V


@invariant("decomposition_residual", 1e-8)
def _decomposition(rng, samples):
    cfg = ToleranceConfig(fd_step=1e-5)
    worst = 0.0
    for _ in range(max(samples // 40, 2)):
        S = _space(rng, 3, 8)
        U, V = _centred_fields(rng, S)
        P = phi_inverse(S, random_centred(rng, S))
        for al in (-1.0, 0.0, 0.5, 1.0):
            lhs = dv.alpha_derivative_ambient(al, dv.ambient_extension(U, cfg), dv.ambient_extension(V, cfg), P, cfg)
            rhs = dv.ambient_from_M(al, U, V, P, cfg)
            worst = max(worst, np.max(np.abs(lhs - rhs)))
    return float(worst)


def _random_expfam(rng, d=2):
    S = _space(rng, d + 2, 10)
    eta = rng.normal(size=(d, S.n))
    eta -= (eta @ S.weights)[:, None]
    return S, eta, expfam_build(S, eta, lo=[-4] * d, hi=[4] * d)


@invariant("expfam_fisher_covariance", 1e-10)
def _expfam_fisher(rng, samples):
    worst = 0.0
    for _ in range(max(samples // 10, 3)):
        S, eta, F = _random_expfam(rng, int(rng.integers(1, 5)))
        y = rng.uniform(-1, 1, F.dim)
        cov, _ = expfam_moments(S, eta, y)
        worst = max(worst, np.max(np.abs(fisher_matrix(F, y) - cov)))
    return float(worst)


@invariant("expfam_christoffel_moments", 1e-8)
def _expfam_christoffel(rng, samples):
    worst = 0.0
    for _ in range(max(samples // 10, 3)):
        S, eta, F = _random_expfam(rng, int(rng.integers(1, 5)))
        y = rng.uniform(-1, 1, F.dim)
        for al in ALPHA_GRID:
            worst = max(worst, np.max(np.abs(christoffel(F, y, al).christoffel - expfam_christoffel(S, eta, y, al))))
    return float(worst)


@invariant("christoffel_fd", 1e-4)
def _christoffel_fd(rng, samples):
    worst = 0.0
    S, eta, F = _random_expfam(rng, 2)
    y = rng.uniform(-1, 1, 2)
    for al in (-1.0, 0.0, 1.0):
        ref = christoffel_fd(F, y, al, lambda a, p, q: dv.divergence_batch(a, S, p, q))
        worst = max(worst, np.max(np.abs(christoffel(F, y, al).christoffel - ref)))
    return float(worst)


@invariant("geodesic_affine_alpha_one", 1e-10)
def _affine(rng, samples):
    S, eta, F = _random_expfam(rng, 2)
    y0 = rng.uniform(-0.5, 0.5, 2)
    v0 = rng.uniform(-0.5, 0.5, 2)
    tr = geodesic(F, 1.0, y0, v0, 1.0, 0.01)
    return float(np.max(np.abs(tr.y - (y0 + tr.t[:, None] * v0))))


@invariant("dual_transport_drift", 1e-6)
def _dual_transport(rng, samples):
    S, eta, F = _random_expfam(rng, 2)
    y0 = rng.uniform(-0.5, 0.5, 2)
    path = line_path(y0, rng.uniform(-0.5, 0.5, 2))
    tr = parallel_transport(F, 0.5, path, rng.normal(size=2), 1.0, 1e-3, dual_v0=rng.normal(size=2))
    return float(np.max(np.abs(tr.product - tr.product[0])))


def run_all(seed: int, samples: int, tolerance_override: float | None = None):
    """Run every registered invariant; returns ``(rows, all_passed)``.

    Each invariant draws from its own generator seeded by ``(seed, index)`` so
    results do not depend on the order or number of checks.
    """
    rows = []
    ok = True
    for idx, inv in enumerate(REGISTRY):
        violation = float(inv.check(make_rng([seed, idx]), samples))
        tol = inv.tolerance if tolerance_override is None else tolerance_override
        passed = bool(violation <= tol)
        ok &= passed
        rows.append((inv.name, violation, tol, passed))
    return rows, ok
