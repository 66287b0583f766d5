"""Target-distribution abstractions and the quadratic-folding algebra.

A sampling target has negative log-density f + g, where f is smooth and
strongly convex with declared curvature bounds, and g is convex but
possibly nonsmooth (set indicators, l1 penalties, ...).  All access to g
goes through oracles keyed by an isotropic Gaussian factor (lam, v)
encoding the quadratic (1/(2*lam))*||x - v||^2:

* proximal map: argmin_x (1/(2*lam))*||x - v||^2 + g(x),
* restricted Gaussian sampler: exact draw from the density proportional
  to exp(-(1/(2*lam))*||x - v||^2 - g(x)).

Keeping every quadratic in factor form lets the sampler fold products of
Gaussians and absorb linear tilts mechanically, without touching the
oracle implementations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

Vector = np.ndarray
Rng = np.random.Generator


@dataclass(frozen=True)
class SmoothPotential:
    """Smooth, strongly convex potential with declared constants.

    ``value``/``grad`` give the negative log-density contribution (nats)
    and its gradient.  ``smoothness`` and ``strong_convexity`` are trusted
    as declared, never estimated: every step size downstream is a closed
    form in them.
    """

    value: Callable[[Vector], float]
    grad: Callable[[Vector], Vector]
    smoothness: float
    strong_convexity: float
    dim: int

    def __post_init__(self) -> None:
        if not np.isfinite(self.smoothness) or self.smoothness <= 0:
            raise ValueError(f"smoothness must be finite and positive, got {self.smoothness}")
        if not 0 < self.strong_convexity <= self.smoothness:
            raise ValueError(
                "need 0 < strong_convexity <= smoothness, got "
                f"mu={self.strong_convexity}, L={self.smoothness}"
            )
        if self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")

    @property
    def condition_number(self) -> float:
        return self.smoothness / self.strong_convexity


@dataclass(frozen=True)
class CompositePotential:
    """Convex, possibly nonsmooth potential accessed through oracles.

    ``value`` may return +inf outside the support (indicator convention).
    ``rgo(lam, v, rng)`` draws exactly from exp(-(1/(2*lam))*||x-v||^2
    - g(x)) and must return points with finite ``value``.  ``prox`` is
    optional; when present it minimizes (1/(2*lam))*||x-v||^2 + g(x).
    """

    value: Callable[[Vector], float]
    rgo: Callable[[float, Vector, Rng], Vector]
    prox: Optional[Callable[[float, Vector], Vector]] = None


@dataclass(frozen=True)
class IsotropicGaussianFactor:
    """The quadratic (1/(2*lam))*||x - v||^2 in (scale, center) form."""

    lam: float
    v: Vector

    def __post_init__(self) -> None:
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))
        if not np.isfinite(self.lam) or self.lam <= 0:
            raise ValueError(f"factor scale must be finite and positive, got {self.lam}")

    def exponent(self, x: Vector) -> float:
        """The quadratic's value at x (for algebra checks)."""
        d = np.asarray(x, dtype=float) - self.v
        return float(d @ d) / (2.0 * self.lam)


@dataclass(frozen=True)
class CompositeTarget:
    """Composite density exp(-f(x) - g(x)), optionally with a cached minimizer."""

    f: SmoothPotential
    g: CompositePotential
    x_star: Optional[Vector] = None

    def __post_init__(self) -> None:
        if self.x_star is not None:
            xs = np.asarray(self.x_star, dtype=float)
            if xs.shape != (self.f.dim,):
                raise ValueError(
                    f"x_star has shape {xs.shape}, expected ({self.f.dim},)"
                )
            object.__setattr__(self, "x_star", xs)


def fold_factors(
    a: IsotropicGaussianFactor, b: Optional[IsotropicGaussianFactor] = None
) -> IsotropicGaussianFactor:
    """Collapse a product of two isotropic Gaussian factors into one.

    The summed exponents differ from the folded exponent only by a
    constant in x, so oracle calls see an equivalent factor.  ``b=None``
    is the vacuous-factor limit (lam -> inf): returns ``a`` unchanged.
    """
    if b is None:
        return a
    if a.v.shape != b.v.shape:
        raise ValueError(f"factor dimension mismatch: {a.v.shape} vs {b.v.shape}")
    inv = 1.0 / a.lam + 1.0 / b.lam
    lam = 1.0 / inv
    v = lam * (a.v / a.lam + b.v / b.lam)
    return IsotropicGaussianFactor(lam, v)


def shift_linear(target: CompositeTarget, c: Vector) -> CompositeTarget:
    """Move a linear term <c, x> from f to g, preserving f + g pointwise.

    With c = grad f(x*) at the minimizer x* of f + g, first-order
    optimality makes both shifted parts share the minimizer x*, which is
    what the sampler's coupling construction requires.  The shifted
    oracles absorb c into the factor center: prox and rgo are delegated
    at (lam, v - lam*c), and the smoothness/strong-convexity constants
    are unchanged.
    """
    c = np.asarray(c, dtype=float)
    if c.shape != (target.f.dim,):
        raise ValueError(f"shift has shape {c.shape}, expected ({target.f.dim},)")
    if not np.all(np.isfinite(c)):
        raise ValueError("shift vector must be finite")

    f, g = target.f, target.g

    f_shift = SmoothPotential(
        value=lambda x, _f=f.value, _c=c: _f(x) - float(_c @ x),
        grad=lambda x, _g=f.grad, _c=c: _g(x) - _c,
        smoothness=f.smoothness,
        strong_convexity=f.strong_convexity,
        dim=f.dim,
    )

    prox = None
    if g.prox is not None:
        prox = lambda lam, v, _p=g.prox, _c=c: _p(lam, v - lam * _c)  # noqa: E731

    g_shift = CompositePotential(
        value=lambda x, _g=g.value, _c=c: _g(x) + float(_c @ x),
        rgo=lambda lam, v, rng, _r=g.rgo, _c=c: _r(lam, v - lam * _c, rng),
        prox=prox,
    )
    return CompositeTarget(f=f_shift, g=g_shift, x_star=target.x_star)


def quadratic_potential(
    precision: Vector,
    mean: Vector,
    smoothness: Optional[float] = None,
    strong_convexity: Optional[float] = None,
) -> SmoothPotential:
    """f(x) = 0.5*(x - mean)^T P (x - mean) for SPD P (dense or diagonal).

    Curvature constants default to the extreme eigenvalues of P; callers
    that built P from a known spectrum can pass them to skip the
    eigendecomposition.
    """
    mean = np.asarray(mean, dtype=float)
    precision = np.asarray(precision, dtype=float)
    d = mean.shape[0]
    if precision.ndim == 1:
        if precision.shape != (d,):
            raise ValueError("diagonal precision length must match mean")
        lo, hi = float(np.min(precision)), float(np.max(precision))

        def value(x: Vector) -> float:
            r = np.asarray(x, dtype=float) - mean
            return 0.5 * float(r @ (precision * r))

        def grad(x: Vector) -> Vector:
            return precision * (np.asarray(x, dtype=float) - mean)

    else:
        if precision.shape != (d, d):
            raise ValueError("precision must be (d, d) or (d,)")
        eigs = np.linalg.eigvalsh(precision)
        lo, hi = float(eigs[0]), float(eigs[-1])

        def value(x: Vector) -> float:
            r = np.asarray(x, dtype=float) - mean
            return 0.5 * float(r @ (precision @ r))

        def grad(x: Vector) -> Vector:
            return precision @ (np.asarray(x, dtype=float) - mean)

    return SmoothPotential(
        value=value,
        grad=grad,
        smoothness=hi if smoothness is None else smoothness,
        strong_convexity=lo if strong_convexity is None else strong_convexity,
        dim=d,
    )


def isotropic_quadratic(curvature: float, center: Vector) -> SmoothPotential:
    """f(x) = (curvature/2)*||x - center||^2; smoothness == strong convexity."""
    center = np.asarray(center, dtype=float)

    def value(x: Vector) -> float:
        r = np.asarray(x, dtype=float) - center
        return 0.5 * curvature * float(r @ r)

    def grad(x: Vector) -> Vector:
        return curvature * (np.asarray(x, dtype=float) - center)

    return SmoothPotential(
        value=value,
        grad=grad,
        smoothness=curvature,
        strong_convexity=curvature,
        dim=center.shape[0],
    )


def pseudo_huber_potential(
    scale: float, dim: int, strong_convexity: float = 1e-9
) -> SmoothPotential:
    """Smoothed absolute value sum_i s^2*(sqrt(1 + (x_i/s)^2) - 1).

    1-smooth and convex for any s > 0; approaches sum_i |x_i| away from
    the origin.  Strong convexity decays in the tails, so the declared
    constant is a nominal floor for callers that only need convexity.
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    s2 = scale * scale

    def value(x: Vector) -> float:
        x = np.asarray(x, dtype=float)
        return float(np.sum(s2 * (np.sqrt(1.0 + (x / scale) ** 2) - 1.0)))

    def grad(x: Vector) -> Vector:
        x = np.asarray(x, dtype=float)
        return x / np.sqrt(1.0 + (x / scale) ** 2)

    return SmoothPotential(
        value=value,
        grad=grad,
        smoothness=1.0,
        strong_convexity=strong_convexity,
        dim=dim,
    )
