"""Finite sample spaces, positive measures and the balanced chart.

Chart vectors and tangent directions are plain ``numpy`` arrays over the
sample points. Measures keep a reference to their :class:`SampleSpace`; two
measures may only be combined when their spaces carry identical weights.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError
from .kernels import DEFAULT_TOL, ToleranceConfig, check_alpha, psi

DENSITY_FLOOR = 1e-300


class SampleSpace:
    """A finite set of points carrying strictly positive probability weights."""

    __slots__ = ("weights",)

    def __init__(self, weights):
        w = np.array(weights, dtype=float)
        if w.ndim != 1:
            raise ShapeError("sample-space weights must be a flat vector")
        if w.size == 0:
            raise DomainError("a sample space needs at least one point")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise DomainError("sample-space weights must be finite and strictly positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise DomainError(f"sample-space weights must sum to 1, got {float(w.sum())!r}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __setattr__(self, name, value):
        raise AttributeError("SampleSpace is immutable")

    @classmethod
    def uniform(cls, n: int) -> "SampleSpace":
        return cls(np.full(n, 1.0 / n))

    @property
    def n(self) -> int:
        return self.weights.size

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, SampleSpace):
            return NotImplemented
        return self is other or np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash(self.weights.tobytes())

    def __repr__(self):
        return f"SampleSpace(n={self.n})"

    def check_vector(self, f, name: str = "vector") -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape[-1:] != (self.n,):
            raise ShapeError(f"{name} has trailing length {f.shape[-1:]} but the space has {self.n} points")
        return f


def same_space(a: SampleSpace, b: SampleSpace) -> SampleSpace:
    if a != b:
        raise ShapeError("objects live on different sample spaces")
    return a


@dataclass(frozen=True, eq=False)
class FiniteMeasure:
    """A finite measure given by its density with respect to the space weights."""

    space: SampleSpace
    density: np.ndarray

    def __post_init__(self):
        p = np.array(self.density, dtype=float).reshape(-1)
        if p.shape != (self.space.n,):
            raise ShapeError(f"density has length {p.size}, space has {self.space.n} points")
        if not np.all(np.isfinite(p)):
            raise DomainError("density must be finite")
        if np.any(p < DENSITY_FLOOR):
            raise DomainError(f"density entries must be >= {DENSITY_FLOOR:g} (strictly positive)")
        p.setflags(write=False)
        object.__setattr__(self, "density", p)

    @property
    def mass(self) -> float:
        return expectation(self.space, self.density)

    def is_probability(self, tol: float = 1e-10) -> bool:
        return abs(self.mass - 1.0) <= tol

    def __eq__(self, other):
        if not isinstance(other, FiniteMeasure):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.density, other.density)

    def __repr__(self):
        return f"FiniteMeasure(n={self.space.n}, mass={self.mass:.6g})"


def expectation(space: SampleSpace, f) -> float | np.ndarray:
    """``E_mu f``; reduces over the last axis so batches of vectors are allowed."""
    f = space.check_vector(f)
    out = f @ space.weights
    return float(out) if out.ndim == 0 else out


def lp_norm(space: SampleSpace, f, r: float = 2.0) -> float:
    if not r >= 1:
        raise DomainError(f"L^r norm needs r >= 1, got {r}")
    f = space.check_vector(f)
    return float(expectation(space, np.abs(f) ** r) ** (1.0 / r))


def l2_inner(space: SampleSpace, f, g) -> float:
    return expectation(space, space.check_vector(f) * space.check_vector(g))


def chart_forward(P: FiniteMeasure) -> np.ndarray:
    """Balanced chart ``p + log p``."""
    p = P.density
    return p + np.log(p)


def chart_inverse(space: SampleSpace, a_tilde, cfg: ToleranceConfig = DEFAULT_TOL) -> FiniteMeasure:
    a_tilde = space.check_vector(a_tilde, "chart vector")
    return FiniteMeasure(space, psi(a_tilde, cfg))


def alpha_embed(alpha, P: FiniteMeasure) -> np.ndarray:
    """The alpha-embedding: ``(2/(1-alpha)) p^((1-alpha)/2)``, ``log p`` at alpha = 1.

    Equal to ``xi_alpha`` applied to the balanced chart, but evaluated from the
    density directly so that ``F_{-1} = p`` and ``F_1 = log p`` hold exactly.
    """
    alpha = check_alpha(alpha)
    p = P.density
    if alpha == 1.0:
        return np.log(p)
    if alpha == -1.0:
        return p.copy()
    b = (1.0 - alpha) / 2.0
    return p**b / b


@dataclass(frozen=True)
class MembershipReport:
    moment_p: float
    moment_log_p: float
    mass: float
    min_density: float
    lam: float


def membership_diagnostics(P: FiniteMeasure, lam: float = 4.0) -> MembershipReport:
    """Integrability diagnostics ``E p^lam``, ``E |log p|^lam``, ``E p`` and ``min p``.

    All are finite on a finite space; they are reported to flag near-degenerate
    densities. ``lam`` must be at least 2.
    """
    if not lam >= 2:
        raise DomainError(f"lambda must be >= 2, got {lam}")
    p = P.density
    return MembershipReport(
        moment_p=expectation(P.space, p**lam),
        moment_log_p=expectation(P.space, np.abs(np.log(p)) ** lam),
        mass=P.mass,
        min_density=float(p.min()),
        lam=float(lam),
    )
