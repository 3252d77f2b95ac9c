"""Finite-dimensional families embedded in the finite measures.

A :class:`ParametricFamily` supplies the balanced-chart coordinates
``a_tilde(y)``, the tangent basis ``w_i = d a_tilde / d y^i`` and the second
derivatives ``d^2 a_tilde / d y^i d y^j``. From these the Fisher matrix, the
alpha-Christoffel symbols, geodesics, parallel transport and natural-gradient
descent follow.

Christoffel arrays are indexed ``gamma[k, i, j]`` (upper index first).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from .divergence_geometry import _gamma_tilde_p, divergence_batch, first_derivative_density, fisher_weight
from .errors import (
    DependentGenerators,
    DomainError,
    OutOfDomain,
    SingularGram,
    SingularMetric,
)
from .kernels import DEFAULT_TOL, ToleranceConfig, check_alpha, psi
from .measures import FiniteMeasure, SampleSpace, expectation, same_space

MAX_CONDITION = 1e12


class ParametricFamily:
    """A d-dimensional family ``y -> phi_tilde^{-1}(a_tilde(y))`` on a box ``[lo, hi]``.

    Subclasses override :meth:`chart_map`, :meth:`jacobian` (shape ``(n, d)``)
    and :meth:`hessian` (shape ``(n, d, d)``). The plain class wraps three
    callables.
    """

    in_M = False

    def __init__(self, space: SampleSpace, dim: int, chart_map=None, jacobian=None, hessian=None,
                 lo=None, hi=None, in_M: bool = False, cfg: ToleranceConfig = DEFAULT_TOL):
        self.space = space
        self.dim = int(dim)
        self.lo = np.full(self.dim, -np.inf) if lo is None else np.asarray(lo, dtype=float)
        self.hi = np.full(self.dim, np.inf) if hi is None else np.asarray(hi, dtype=float)
        if self.lo.shape != (self.dim,) or self.hi.shape != (self.dim,) or np.any(self.lo >= self.hi):
            raise DomainError("parameter box must satisfy lo < hi componentwise in every dimension")
        self._chart_map = chart_map
        self._jacobian = jacobian
        self._hessian = hessian
        self.in_M = in_M
        self.cfg = cfg

    def chart_map(self, y) -> np.ndarray:
        return np.asarray(self._chart_map(self._param(y)), dtype=float)

    def jacobian(self, y) -> np.ndarray:
        return np.asarray(self._jacobian(self._param(y)), dtype=float)

    def hessian(self, y) -> np.ndarray:
        if self._hessian is None:
            raise DomainError("family has no second derivatives; wrap it with with_fd_hessian()")
        return np.asarray(self._hessian(self._param(y)), dtype=float)

    def density(self, y) -> np.ndarray:
        return psi(self.chart_map(y), self.cfg)

    def measure(self, y) -> FiniteMeasure:
        return FiniteMeasure(self.space, self.density(y))

    def contains(self, y) -> bool:
        y = np.asarray(y, dtype=float)
        return bool(np.all(y > self.lo) and np.all(y < self.hi))

    def _param(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float).reshape(-1)
        if y.shape != (self.dim,):
            raise DomainError(f"expected a parameter of length {self.dim}, got {y.shape}")
        return y


class BalancedLinearFamily(ParametricFamily):
    """``a_tilde(y) = sum_i y^i eta_i``: a flat family in the balanced chart."""

    def __init__(self, space: SampleSpace, generators, lo=None, hi=None, cfg: ToleranceConfig = DEFAULT_TOL):
        eta = np.atleast_2d(np.asarray(generators, dtype=float))
        space.check_vector(eta, "generator")
        if np.linalg.matrix_rank(eta) < eta.shape[0]:
            raise DependentGenerators("generators must be linearly independent")
        super().__init__(space, eta.shape[0], lo=lo, hi=hi, in_M=False, cfg=cfg)
        self.generators = eta

    def chart_map(self, y):
        return self._param(y) @ self.generators

    def jacobian(self, y):
        self._param(y)
        return self.generators.T.copy()

    def hessian(self, y):
        self._param(y)
        return np.zeros((self.space.n, self.dim, self.dim))


class ExponentialFamily(ParametricFamily):
    """``dP_y/dmu = exp(sum_i y^i eta_i - c(y))`` with centred statistics ``eta_i``."""

    def __init__(self, space: SampleSpace, statistics, lo=None, hi=None, cfg: ToleranceConfig = DEFAULT_TOL):
        eta = np.atleast_2d(np.asarray(statistics, dtype=float))
        space.check_vector(eta, "statistic")
        means = expectation(space, eta)
        if np.any(np.abs(means) > 1e-10 * (1.0 + np.abs(eta).max())):
            raise DomainError("exponential-family statistics must have zero mean under mu")
        gram = (eta * space.weights) @ eta.T
        if np.linalg.matrix_rank(gram) < eta.shape[0] or np.linalg.cond(gram) > MAX_CONDITION:
            raise SingularGram("Gram matrix of the statistics is singular")
        super().__init__(space, eta.shape[0], lo=lo, hi=hi, in_M=True, cfg=cfg)
        self.statistics = eta
        self.gram = gram

    def log_partition(self, y) -> float:
        y = self._param(y)
        return float(logsumexp(y @ self.statistics, b=self.space.weights))

    def density(self, y):
        y = self._param(y)
        return np.exp(y @ self.statistics - self.log_partition(y))

    def _centred_stats(self, y):
        p = self.density(y)
        mean_p = (self.statistics * self.space.weights) @ p
        return p, self.statistics.T - mean_p

    def chart_map(self, y):
        y = self._param(y)
        log_p = y @ self.statistics - self.log_partition(y)
        return np.exp(log_p) + log_p

    def jacobian(self, y):
        p, m = self._centred_stats(y)
        return (1.0 + p)[:, None] * m

    def hessian(self, y):
        p, m = self._centred_stats(y)
        cov = (m * (self.space.weights * p)[:, None]).T @ m
        return p[:, None, None] * m[:, :, None] * m[:, None, :] - (1.0 + p)[:, None, None] * cov

    def recover_parameters(self, P: FiniteMeasure) -> np.ndarray:
        """``A^{-1} <log p, eta>``; exact on the family, an L2 projection off it."""
        same_space(P.space, self.space)
        rhs = (self.statistics * self.space.weights) @ np.log(P.density)
        return np.linalg.solve(self.gram, rhs)


def expfam_build(space: SampleSpace, statistics, lo=None, hi=None, cfg: ToleranceConfig = DEFAULT_TOL):
    return ExponentialFamily(space, statistics, lo, hi, cfg)


def balanced_linear_build(space: SampleSpace, generators, lo=None, hi=None, cfg: ToleranceConfig = DEFAULT_TOL):
    return BalancedLinearFamily(space, generators, lo, hi, cfg)


def expfam_recover_parameters(family: ExponentialFamily, P: FiniteMeasure) -> np.ndarray:
    return family.recover_parameters(P)


def with_fd_hessian(family: ParametricFamily, step: float = 1e-4) -> ParametricFamily:
    """Wrap ``family`` so its Hessian is a central difference of its Jacobian.

    Accuracy is roughly ``step**2`` times the third derivatives; meant for
    prototyping families that lack analytic second derivatives.
    """

    def hess(y):
        cols = []
        for j in range(family.dim):
            e = np.zeros(family.dim)
            e[j] = step
            cols.append((family.jacobian(y + e) - family.jacobian(y - e)) / (2.0 * step))
        h = np.stack(cols, axis=-1)
        return 0.5 * (h + np.swapaxes(h, 1, 2))

    return ParametricFamily(family.space, family.dim, family.chart_map, family.jacobian, hess,
                            family.lo, family.hi, family.in_M, family.cfg)


# --------------------------------------------------------------------------
# metric and connection
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConnectionData:
    g: np.ndarray
    g_inv: np.ndarray
    christoffel: np.ndarray | None = None


def _metric_from(space, p, W):
    wgt = space.weights * fisher_weight(p)
    g = (W * wgt[:, None]).T @ W
    return 0.5 * (g + g.T)


def _checked_inverse(g):
    if np.linalg.cond(g) > MAX_CONDITION:
        raise SingularMetric("Fisher matrix is numerically singular; tangent vectors are nearly dependent")
    return np.linalg.inv(g)


def fisher_matrix(family: ParametricFamily, y) -> np.ndarray:
    """``g_ij = E_mu[p/(1+p)^2 w_i w_j]``."""
    W = family.jacobian(y)
    g = _metric_from(family.space, family.density(y), W)
    _checked_inverse(g)
    return g


def christoffel(family: ParametricFamily, y, alpha, include_hessian: bool = True) -> ConnectionData:
    """Alpha-Christoffel symbols ``gamma[k, i, j]`` of the family at ``y``.

    ``g^{kl} E_mu[p/(1+p)^2 (Gamma_tilde_alpha(a, w_i, w_j) + d_i d_j a) w_l]``.
    This is the chain-rule expansion of ``-g^{kl} d_i d_j d_l D_alpha``;
    ``include_hessian=False`` drops the second-derivative term, which is only
    correct for families that are flat in the balanced chart.
    """
    g, g_inv, (gamma,) = _christoffel_many(family, y, [check_alpha(alpha)], include_hessian)
    return ConnectionData(g, g_inv, gamma)


def _christoffel_many(family, y, alphas, include_hessian=True):
    """Metric, inverse and the symbols for several alphas, sharing the common work."""
    space = family.space
    p = family.density(y)
    W = family.jacobian(y)
    g = _metric_from(space, p, W)
    g_inv = _checked_inverse(g)
    hess = family.hessian(y) if include_hessian else 0.0
    wgt = space.weights * fisher_weight(p)
    out = []
    for alpha in alphas:
        gt = _gamma_tilde_p(alpha, p[:, None, None], W[:, :, None], W[:, None, :]) + hess
        lowered = np.einsum("x,xij,xl->ijl", wgt, gt, W)
        gamma = np.einsum("kl,ijl->kij", g_inv, lowered)
        out.append(0.5 * (gamma + np.swapaxes(gamma, 1, 2)))
    return g, g_inv, out


# --------------------------------------------------------------------------
# dynamics
# --------------------------------------------------------------------------

@dataclass
class GeodesicTrace:
    t: np.ndarray
    y: np.ndarray
    ydot: np.ndarray
    energy: np.ndarray
    status: str = "ok"


@dataclass
class TransportTrace:
    t: np.ndarray
    y: np.ndarray
    u: np.ndarray
    norm_sq: np.ndarray
    status: str = "ok"
    v: np.ndarray | None = None
    product: np.ndarray | None = None


def _rk4_step(f, t, x, h):
    k1 = f(t, x)
    k2 = f(t + h / 2, x + h / 2 * k1)
    k3 = f(t + h / 2, x + h / 2 * k2)
    k4 = f(t + h, x + h * k3)
    return x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _time_grid(t_end, step):
    if not step > 0:
        raise DomainError("step must be positive")
    if not t_end >= 0:
        raise DomainError("t_end must be non-negative")
    n = int(np.ceil(t_end / step - 1e-9))
    return np.linspace(0.0, t_end, n + 1) if n > 0 else np.array([0.0])


def geodesic(family: ParametricFamily, alpha, y0, ydot0, t_end: float, step: float) -> GeodesicTrace:
    """Integrate ``y'' + Gamma^k_ij y'^i y'^j = 0`` with fixed-step RK4.

    The grid is ``t_end`` split into equal steps no longer than ``step``.
    Raises :class:`OutOfDomain` carrying the partial trace if the path leaves
    the parameter box.
    """
    alpha = check_alpha(alpha)
    d = family.dim
    y0 = family._param(y0)
    ydot0 = np.asarray(ydot0, dtype=float).reshape(d)
    if not family.contains(y0):
        raise DomainError("initial point lies outside the parameter box")
    grid = _time_grid(t_end, step)

    def rhs(t, x):
        y, v = x[:d], x[d:]
        if not family.contains(y):
            raise _Escaped()
        gam = christoffel(family, y, alpha).christoffel
        return np.concatenate([v, -np.einsum("kij,i,j->k", gam, v, v)])

    states = [np.concatenate([y0, ydot0])]
    status = "ok"
    for k in range(len(grid) - 1):
        try:
            nxt = _rk4_step(rhs, grid[k], states[-1], grid[k + 1] - grid[k])
        except _Escaped:
            status = "out_of_domain"
            break
        if not family.contains(nxt[:d]):
            status = "out_of_domain"
            break
        states.append(nxt)
    X = np.array(states)
    ys, vs = X[:, :d], X[:, d:]
    energy = np.array([v @ fisher_matrix(family, y) @ v for y, v in zip(ys, vs)])
    trace = GeodesicTrace(grid[: len(X)], ys, vs, energy, status)
    if status != "ok":
        raise OutOfDomain(f"geodesic left the parameter box after t={trace.t[-1]:.6g}", trace)
    return trace


class _Escaped(Exception):
    pass


def line_path(y0, velocity) -> Callable[[float], tuple[np.ndarray, np.ndarray]]:
    """The straight parameter path ``t -> y0 + t * velocity`` and its velocity."""
    y0 = np.asarray(y0, dtype=float)
    velocity = np.asarray(velocity, dtype=float)
    return lambda t: (y0 + t * velocity, velocity)


def parallel_transport(family: ParametricFamily, alpha, path, u0, t_end: float, step: float,
                       dual_v0=None) -> TransportTrace:
    """Transport ``u0`` along ``path`` with the alpha-connection (RK4).

    ``path(t)`` returns ``(y(t), y'(t))``. If ``dual_v0`` is given it is
    transported with the ``-alpha`` connection alongside, and the trace records
    their Fisher product ``u^T g v``, which is conserved.
    """
    alpha = check_alpha(alpha)
    d = family.dim
    u0 = np.asarray(u0, dtype=float).reshape(d)
    dual = dual_v0 is not None
    grid = _time_grid(t_end, step)

    alphas = [alpha, -alpha] if dual else [alpha]
    cache = {}

    def connection(t):
        # RK4 visits each half-step time twice; keep the last few evaluations
        if t not in cache:
            y, ydot = path(t)
            if not family.contains(y):
                raise _Escaped()
            if len(cache) > 4:
                cache.clear()
            cache[t] = (ydot, _christoffel_many(family, y, alphas)[2])
        return cache[t]

    def rhs(t, x):
        ydot, gammas = connection(t)
        du = -np.einsum("kij,i,j->k", gammas[0], ydot, x[:d])
        if not dual:
            return du
        dv = -np.einsum("kij,i,j->k", gammas[1], ydot, x[d:])
        return np.concatenate([du, dv])

    x0 = u0 if not dual else np.concatenate([u0, np.asarray(dual_v0, dtype=float).reshape(d)])
    if not family.contains(path(0.0)[0]):
        raise DomainError("path starts outside the parameter box")
    states = [x0]
    status = "ok"
    for k in range(len(grid) - 1):
        try:
            states.append(_rk4_step(rhs, grid[k], states[-1], grid[k + 1] - grid[k]))
        except _Escaped:
            status = "out_of_domain"
            break
    X = np.array(states)
    t = grid[: len(X)]
    ys = np.array([path(s)[0] for s in t])
    gs = [fisher_matrix(family, y) for y in ys]
    us = X[:, :d]
    trace = TransportTrace(t, ys, us, np.array([u @ g @ u for u, g in zip(us, gs)]), status)
    if dual:
        vs = X[:, d:]
        trace.v = vs
        trace.product = np.array([u @ g @ v for u, g, v in zip(us, gs, vs)])
    if status != "ok":
        raise OutOfDomain(f"transport path left the parameter box after t={t[-1]:.6g}", trace)
    return trace


# --------------------------------------------------------------------------
# natural gradient
# --------------------------------------------------------------------------

@dataclass
class NGDTrace:
    y: np.ndarray
    objective: np.ndarray
    grad_norm: np.ndarray
    step_size: np.ndarray
    status: str
    iterations: int = field(default=0)


def objective_and_gradient(family: ParametricFamily, alpha, y, target: FiniteMeasure):
    """``D_alpha(P_y | target)`` and its gradient in ``y``."""
    space = same_space(family.space, target.space)
    a = family.chart_map(y)
    b = target.density + np.log(target.density)
    p = psi(a, family.cfg)
    f = float(divergence_batch(alpha, space, p, target.density))
    k = first_derivative_density(alpha, space, a, b, 1, family.cfg)
    grad = family.jacobian(y).T @ (space.weights * k)
    return f, grad


def natural_gradient_descent(family: ParametricFamily, alpha, target: FiniteMeasure, y_init,
                             max_iters: int = 100, grad_tol: float = 1e-10,
                             armijo: float = 1e-4, max_halvings: int = 60) -> NGDTrace:
    """Minimise ``y -> D_alpha(P_y | target)`` by steps ``-s g^{-1} grad``.

    The step size starts at 1 and is halved until the objective does not
    increase, the Armijo condition holds, and the new point stays in the box.
    """
    alpha = check_alpha(alpha)
    y = family._param(y_init).copy()
    if not family.contains(y):
        raise DomainError("initial point lies outside the parameter box")
    f, grad = objective_and_gradient(family, alpha, y, target)
    ys, fs, gn, ss = [y.copy()], [f], [float(np.linalg.norm(grad))], [0.0]
    status = "max_iters"
    for _ in range(max_iters):
        if gn[-1] <= grad_tol:
            status = "converged"
            break
        g = fisher_matrix(family, y)
        direction = -np.linalg.solve(g, grad)
        decrease = float(grad @ direction)
        s = 1.0
        for _ in range(max_halvings):
            y_new = y + s * direction
            if family.contains(y_new):
                f_new, grad_new = objective_and_gradient(family, alpha, y_new, target)
                if f_new <= f and f_new <= f + armijo * s * decrease:
                    break
            s *= 0.5
        else:
            status = "stalled"
            break
        y, f, grad = y_new, f_new, grad_new
        ys.append(y.copy())
        fs.append(f)
        gn.append(float(np.linalg.norm(grad)))
        ss.append(s)
    if status == "max_iters" and gn[-1] <= grad_tol:
        status = "converged"
    return NGDTrace(np.array(ys), np.array(fs), np.array(gn), np.array(ss), status, len(ys) - 1)
