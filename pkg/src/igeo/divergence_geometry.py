"""Alpha-divergences, the Fisher metric and alpha-derivatives.

Ambient quantities act on balanced-chart coordinates ``a_tilde`` and tangent
directions ``u_tilde`` (plain arrays over the sample points). Quantities on
the probability measures act on centred coordinates ``a`` and centred
directions ``u``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, MissingDerivative, NotProbability
from .kernels import DEFAULT_TOL, ToleranceConfig, check_alpha, psi, xi_from_psi
from .measures import (
    FiniteMeasure,
    SampleSpace,
    chart_forward,
    chart_inverse,
    expectation,
    same_space,
)
from .prob_chart import (
    PROB_TOL,
    center,
    check_centred,
    d_rho,
    phi_forward,
    phi_inverse,
)


# --------------------------------------------------------------------------
# divergences
# --------------------------------------------------------------------------

def _pointwise_divergence(alpha: float, p, q):
    """Integrand of the extended alpha-divergence, written as ``q * h(p/q)``.

    ``h`` is evaluated with ``expm1``/``log`` so that the result keeps full
    relative accuracy when ``p`` is close to ``q`` and when ``alpha`` is close
    to +-1.
    """
    if alpha == -1.0:
        r = p / q
        return q * (r * np.log(r) - (r - 1.0))
    if alpha == 1.0:
        r = q / p
        return p * (r * np.log(r) - (r - 1.0))
    b = (1.0 - alpha) / 2.0
    L = np.log(p) - np.log(q)
    return q * (b * np.expm1(L) - np.expm1(b * L)) / (b * (1.0 - b))


def divergence(alpha, P: FiniteMeasure, Q: FiniteMeasure) -> float:
    """Extended alpha-divergence ``D_alpha(P | Q)`` between finite measures.

    ``alpha = -1`` is the (extended) Kullback-Leibler divergence of P from Q.
    """
    alpha = check_alpha(alpha)
    space = same_space(P.space, Q.space)
    val = expectation(space, _pointwise_divergence(alpha, P.density, Q.density))
    # each integrand is non-negative; only rounding can push the sum below 0
    return max(float(val), 0.0)


def divergence_batch(alpha, space: SampleSpace, p, q) -> np.ndarray:
    """Vectorised :func:`divergence` over stacks of densities of shape ``(..., n)``."""
    alpha = check_alpha(alpha)
    p = space.check_vector(p)
    q = space.check_vector(q)
    return np.maximum(expectation(space, _pointwise_divergence(alpha, p, q)), 0.0)


def divergence_via_kernels(alpha, space: SampleSpace, a_tilde, b_tilde,
                           cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    """The same divergence assembled from ``psi``, ``xi`` and the product kernel ``upsilon``."""
    alpha = check_alpha(alpha)
    a_tilde = space.check_vector(a_tilde)
    b_tilde = space.check_vector(b_tilde)
    pa = psi(a_tilde, cfg)
    pb = psi(b_tilde, cfg)
    if alpha == -1.0:
        integrand = pb - pa + _ups(-1.0, pa, pa) - _ups(-1.0, pa, pb)
    elif alpha == 1.0:
        integrand = pa - pb + _ups(1.0, pb, pb) - _ups(1.0, pa, pb)
    else:
        integrand = 2.0 / (1.0 + alpha) * pa + 2.0 / (1.0 - alpha) * pb - _ups(alpha, pa, pb)
    return float(expectation(space, integrand))


def _ups(alpha, ya, yb, i=0, j=0):
    return xi_from_psi(alpha, ya, i) * xi_from_psi(-alpha, yb, j)


def upsilon(alpha, a_tilde, b_tilde, i: int = 0, j: int = 0, directions=(),
            cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Pointwise ``xi_alpha^(i)(a) xi_{-alpha}^(j)(b)`` times the product of ``directions``.

    The first ``i`` directions act on the first argument and the remaining
    ``j`` on the second; ``i + j`` may not exceed 3.
    """
    alpha = check_alpha(alpha)
    if i < 0 or j < 0 or i + j > 3:
        raise DomainError(f"upsilon derivative orders must satisfy i + j <= 3, got ({i}, {j})")
    if len(directions) != i + j:
        raise DomainError(f"expected {i + j} directions, got {len(directions)}")
    out = _ups(alpha, psi(a_tilde, cfg), psi(b_tilde, cfg), i, j)
    for d in directions:
        out = out * np.asarray(d, dtype=float)
    return out


def fisher_weight(p) -> np.ndarray:
    """``p / (1+p)^2``, the pointwise density of the Fisher metric in the balanced chart."""
    p = np.asarray(p, dtype=float)
    return p / (1.0 + p) ** 2


def fisher_inner(P: FiniteMeasure, u_tilde, v_tilde) -> float:
    """Fisher inner product ``E_mu[p/(1+p)^2 u v]`` of two ambient tangent directions."""
    u = P.space.check_vector(u_tilde, "u")
    v = P.space.check_vector(v_tilde, "v")
    return float(expectation(P.space, fisher_weight(P.density) * (u * v)))


def gamma_tilde(alpha, a_tilde, u_tilde, v_tilde, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Ambient connection coefficient field ``[(1-alpha)/2 - (1+alpha)/2 p] u v / (1+p)^2``."""
    alpha = check_alpha(alpha)
    p = psi(a_tilde, cfg)
    return _gamma_tilde_p(alpha, p, np.asarray(u_tilde, float), np.asarray(v_tilde, float))


def _gamma_tilde_p(alpha, p, u, v):
    return ((1.0 - alpha) / 2.0 - (1.0 + alpha) / 2.0 * p) * u * v / (1.0 + p) ** 2


def _xi_difference(alpha, ya, yb):
    """``xi_alpha(a) - xi_alpha(b)`` from ``ya = psi(a)``, ``yb = psi(b)`` without cancellation."""
    la, lb = np.log(ya), np.log(yb)
    if alpha == 1.0:
        return la - lb
    b = (1.0 - alpha) / 2.0
    return np.exp(b * lb) * np.expm1(b * (la - lb)) / b


def first_derivative_density(alpha, space: SampleSpace, a_tilde, b_tilde,
                             slot: int = 1, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Pointwise density ``k`` with ``D_slot D_alpha[u] = E_mu[k u]``.

    ``slot = 1`` differentiates the first argument, ``slot = 2`` the second.
    """
    alpha = check_alpha(alpha)
    ya = psi(space.check_vector(a_tilde), cfg)
    yb = psi(space.check_vector(b_tilde), cfg)
    if slot == 1:
        # xi'_alpha(a) (xi_{-alpha}(a) - xi_{-alpha}(b))
        return xi_from_psi(alpha, ya, 1) * _xi_difference(-alpha, ya, yb)
    if slot == 2:
        # xi'_{-alpha}(b) (xi_alpha(b) - xi_alpha(a))
        return xi_from_psi(-alpha, yb, 1) * _xi_difference(alpha, yb, ya)
    raise DomainError(f"slot must be 1 or 2, got {slot}")


_SUPPORTED_ORDERS = {(1, 0): 1, (0, 1): 1, (1, 1): 2, (2, 1): 3}


def divergence_derivative(alpha, space: SampleSpace, a_tilde, b_tilde, order, directions,
                          cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    """Partial derivative of ``(a, b) -> D_alpha(phi_tilde^{-1}(a) | phi_tilde^{-1}(b))``.

    ``order = (i, j)`` counts derivatives in the first and second argument and
    must be one of ``(1, 0)``, ``(0, 1)``, ``(1, 1)`` or ``(2, 1)``. The first
    ``i`` entries of ``directions`` act on ``a``, the rest on ``b``.
    """
    alpha = check_alpha(alpha)
    order = tuple(order)
    if order not in _SUPPORTED_ORDERS:
        raise DomainError(f"unsupported derivative order {order}")
    if len(directions) != _SUPPORTED_ORDERS[order]:
        raise DomainError(f"order {order} needs {_SUPPORTED_ORDERS[order]} directions")
    a_tilde = space.check_vector(a_tilde)
    b_tilde = space.check_vector(b_tilde)
    dirs = [space.check_vector(d, "direction") for d in directions]
    diagonal = np.array_equal(a_tilde, b_tilde)

    if order in ((1, 0), (0, 1)):
        if diagonal:
            return 0.0
        slot = 1 if order == (1, 0) else 2
        k = first_derivative_density(alpha, space, a_tilde, b_tilde, slot, cfg)
        return float(expectation(space, k * dirs[0]))

    if diagonal:
        p = psi(a_tilde, cfg)
        wgt = fisher_weight(p)
        if order == (1, 1):
            return -float(expectation(space, wgt * dirs[0] * dirs[1]))
        g = _gamma_tilde_p(alpha, p, dirs[0], dirs[1])
        return -float(expectation(space, wgt * g * dirs[2]))

    i, j = order
    ups = upsilon(alpha, a_tilde, b_tilde, i, j, dirs, cfg)
    return -float(expectation(space, ups))


# --------------------------------------------------------------------------
# vector fields and alpha-derivatives
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class VectorField:
    """A tangent vector field given through its chart representation.

    ``value(P)`` returns the direction at ``P`` (balanced-chart direction for
    ambient fields, centred direction for fields on the probability measures).
    ``derivative(P, u)``, if given, returns the derivative of that
    representation along the chart direction ``u``.
    """

    value: Callable[[FiniteMeasure], np.ndarray]
    derivative: Optional[Callable[[FiniteMeasure, np.ndarray], np.ndarray]] = None
    on_manifold: bool = False

    def __call__(self, P: FiniteMeasure) -> np.ndarray:
        v = P.space.check_vector(self.value(P), "field value")
        if self.on_manifold:
            check_centred(P.space, v, "field value")
        return v


def constant_field(direction, on_manifold: bool = False) -> VectorField:
    direction = np.asarray(direction, dtype=float)
    return VectorField(lambda P: direction, lambda P, u: np.zeros_like(direction), on_manifold)


def _fd_step(cfg, base):
    return cfg.fd_step * (1.0 + float(np.max(np.abs(base))))


def field_derivative(V: VectorField, P: FiniteMeasure, direction, cfg: ToleranceConfig = DEFAULT_TOL,
                     allow_fd: bool = True, h: float | None = None) -> np.ndarray:
    """Derivative of ``V``'s chart representation at ``P`` along ``direction``.

    Uses ``V.derivative`` when present, otherwise a central difference in the
    chart matching ``V.on_manifold``.
    """
    direction = np.asarray(direction, dtype=float)
    if V.derivative is not None:
        return P.space.check_vector(V.derivative(P, direction))
    if not allow_fd:
        raise MissingDerivative("vector field has no derivative and finite differences are disabled")
    space = P.space
    if V.on_manifold:
        base = phi_forward(P)
        h = h or _fd_step(cfg, base)
        plus = V(phi_inverse(space, base + h * direction, cfg))
        minus = V(phi_inverse(space, base - h * direction, cfg))
    else:
        base = chart_forward(P)
        h = h or _fd_step(cfg, base)
        plus = V(chart_inverse(space, base + h * direction, cfg))
        minus = V(chart_inverse(space, base - h * direction, cfg))
    return (plus - minus) / (2.0 * h)


def alpha_derivative_ambient(alpha, U: VectorField, V: VectorField, P: FiniteMeasure,
                             cfg: ToleranceConfig = DEFAULT_TOL, allow_fd: bool = True) -> np.ndarray:
    """Chart direction of the ambient alpha-derivative of ``V`` along ``U`` at ``P``.

    ``U v_P + Gamma_tilde_alpha(a, u(P), v(P))``.
    """
    alpha = check_alpha(alpha)
    u = U(P)
    v = V(P)
    dv = field_derivative(V, P, u, cfg, allow_fd)
    return dv + _gamma_tilde_p(alpha, P.density, u, v)


def duality_residual(alpha, U: VectorField, V: VectorField, W: VectorField, P: FiniteMeasure,
                     h: float = 1e-5, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    """``|U<V,W> - <nabla^alpha_U V, W> - <V, nabla^{-alpha}_U W>|`` at ``P``.

    ``U<V,W>`` is a central difference of the Fisher product along ``U``.
    """
    alpha = check_alpha(alpha)
    space = P.space
    a_t = chart_forward(P)
    u = U(P)

    def product(Q):
        return fisher_inner(Q, V(Q), W(Q))

    lhs = (product(chart_inverse(space, a_t + h * u, cfg))
           - product(chart_inverse(space, a_t - h * u, cfg))) / (2.0 * h)
    rhs = (fisher_inner(P, alpha_derivative_ambient(alpha, U, V, P, cfg), W(P))
           + fisher_inner(P, V(P), alpha_derivative_ambient(-alpha, U, W, P, cfg)))
    return abs(lhs - rhs)


def gamma_M(alpha, space: SampleSpace, a, u, v, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Connection coefficient field on the probability measures (centred output).

    With ``X = Drho u Drho v / (1+p)^2``:
    ``(1-alpha)/2 (X - E X) - (1+alpha)/2 p (X - <U,V>_P)``.
    """
    alpha = check_alpha(alpha)
    a = check_centred(space, a)
    du = d_rho(space, a, u, cfg)
    dv = d_rho(space, a, v, cfg)
    P = phi_inverse(space, a, cfg)
    p = P.density
    x = du * dv / (1.0 + p) ** 2
    uv = fisher_inner(P, du, dv)
    return (1.0 - alpha) / 2.0 * (x - expectation(space, x)) - (1.0 + alpha) / 2.0 * p * (x - uv)


def _require_on_manifold(P, *fields):
    if not P.is_probability(PROB_TOL):
        raise NotProbability(f"measure has total mass {P.mass!r}, expected 1")
    for F in fields:
        if not F.on_manifold:
            raise DomainError("alpha_derivative_M needs fields declared on the probability measures")


def alpha_derivative_M(alpha, U: VectorField, V: VectorField, P: FiniteMeasure,
                       cfg: ToleranceConfig = DEFAULT_TOL, allow_fd: bool = True) -> np.ndarray:
    """Centred chart direction of the alpha-derivative on the probability measures."""
    alpha = check_alpha(alpha)
    _require_on_manifold(P, U, V)
    a = phi_forward(P)
    u = U(P)
    v = V(P)
    dv = field_derivative(V, P, u, cfg, allow_fd)
    return dv + gamma_M(alpha, P.space, a, u, v, cfg)


def ambient_from_M(alpha, U: VectorField, V: VectorField, P: FiniteMeasure,
                   cfg: ToleranceConfig = DEFAULT_TOL, allow_fd: bool = True) -> np.ndarray:
    """Balanced-chart form of the ambient alpha-derivative rebuilt from the one on M.

    ``Drho_a(nabla^alpha_U V) - (1+alpha)/2 (1+p) <U,V>_P``; the second term is
    Fisher-orthogonal to every tangent vector of the probability measures.
    """
    alpha = check_alpha(alpha)
    a = phi_forward(P)
    space = P.space
    inner = alpha_derivative_M(alpha, U, V, P, cfg, allow_fd)
    uv = fisher_inner(P, d_rho(space, a, U(P), cfg), d_rho(space, a, V(P), cfg))
    return d_rho(space, a, inner, cfg) - (1.0 + alpha) / 2.0 * (1.0 + P.density) * uv


def ambient_extension(V: VectorField, cfg: ToleranceConfig = DEFAULT_TOL) -> VectorField:
    """Extend a field on the probability measures to all finite measures.

    At a finite measure ``Q`` the value is ``Drho_b v(pi(Q))`` with
    ``b = centre(phi_tilde(Q))`` and ``pi(Q) = phi^{-1}(b)``, so it agrees with
    the pushforward of ``V`` on the probability measures.
    """
    if not V.on_manifold:
        raise DomainError("ambient_extension expects a field on the probability measures")

    def value(Q):
        b = center(Q.space, chart_forward(Q))
        return d_rho(Q.space, b, V(phi_inverse(Q.space, b, cfg)), cfg)

    return VectorField(value)
