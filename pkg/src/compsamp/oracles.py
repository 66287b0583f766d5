"""Exact restricted Gaussian oracles and the 1-D truncated-normal primitive.

All oracles here are exact samplers (inverse-CDF plus tail rejection),
not approximate inner MCMC: the outer sampler's error accounting assumes
oracle error is negligible, and exact oracles make it zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, log_ndtr, ndtr, ndtri

from .model import CompositePotential, Rng, Vector

# Standardized distance from the mean past which inverse-CDF evaluation is
# handed off to exponential-proposal rejection; double-precision CDFs
# degrade in far tails.
TAIL_CROSSOVER = 4.0

_MAX_TAIL_ROUNDS = 10_000


class IntervalUnderflowError(ValueError):
    """Raised when a truncation interval's probability underflows double precision."""


@dataclass(frozen=True)
class TruncSpec:
    """One-dimensional normal N(mean, sd^2) conditioned on [lo, hi]."""

    mean: float
    sd: float
    lo: float = -np.inf
    hi: float = np.inf

    def __post_init__(self) -> None:
        if not (np.isfinite(self.sd) and self.sd > 0):
            raise ValueError(f"sd must be finite and positive, got {self.sd}")
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi}]")
        if not np.isfinite(self.mean):
            raise ValueError("mean must be finite")


@dataclass(frozen=True)
class OrthantSpec:
    """Coordinatewise sign restriction: sign_i * x_i >= 0."""

    signs: Vector

    def __post_init__(self) -> None:
        s = np.asarray(self.signs, dtype=float)
        if s.ndim != 1 or not np.all(np.abs(s) == 1.0):
            raise ValueError("signs must be a 1-D vector of +1/-1 entries")
        object.__setattr__(self, "signs", s)

    @property
    def dim(self) -> int:
        return self.signs.shape[0]

    def contains(self, x: Vector) -> bool:
        return bool(np.all(self.signs * np.asarray(x, dtype=float) >= 0.0))


def _tail_rejection(a: Vector, b: Vector, rng: Rng) -> tuple[Vector, int]:
    """Standard-normal draws conditioned on far-tail intervals [a, b], a >= TAIL_CROSSOVER.

    Proposal is the rate-alpha exponential restricted to [a, b] with
    alpha = (a + sqrt(a^2 + 4))/2; restricting the proposal (instead of
    rejecting out-of-interval draws) keeps acceptance away from zero for
    narrow intervals.  Returns the draws and the number of rejection
    rounds used.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    alpha = 0.5 * (a + np.sqrt(a * a + 4.0))
    out = np.empty_like(a)
    pending = np.arange(a.size)
    rounds = 0
    while pending.size:
        rounds += 1
        if rounds > _MAX_TAIL_ROUNDS:
            raise RuntimeError("tail rejection failed to accept; interval is pathological")
        aa, bb, al = a[pending], b[pending], alpha[pending]
        u = rng.random(pending.size)
        with np.errstate(divide="ignore"):
            z = np.where(
                np.isinf(bb),
                aa - np.log1p(-u) / al,
                aa - np.log1p(u * np.expm1(-al * (bb - aa))) / al,
            )
        log_acc = -0.5 * (z - al) ** 2
        accept = np.log(rng.random(pending.size)) <= log_acc
        out[pending[accept]] = z[accept]
        pending = pending[~accept]
    return out, rounds


_P_FLOOR = np.nextafter(0.0, 1.0)
_P_CEIL = np.nextafter(1.0, 0.0)


def _central_inverse_cdf(a: Vector, b: Vector, rng: Rng) -> Vector:
    pa = ndtr(a)
    pb = ndtr(b)
    if np.any(pb <= pa):
        i = int(np.argmax(pb <= pa))
        raise IntervalUnderflowError(
            f"truncation interval [{a[i]:.17g}, {b[i]:.17g}] (standardized) "
            "has probability that underflows the double-precision CDF",
            i,
        )
    p = pa + rng.random(a.shape[0]) * (pb - pa)
    # u ~ U[0,1) keeps p < pb mathematically; clamp float-rounded
    # endpoints so ndtri cannot return +-inf.
    np.clip(p, _P_FLOOR, _P_CEIL, out=p)
    return ndtri(p)


def _trunc_std_normal(a: Vector, b: Vector, rng: Rng) -> Vector:
    """Exact standard-normal draws conditioned on [a_i, b_i], vectorized.

    Central intervals go through inverse-CDF sampling; intervals lying
    beyond TAIL_CROSSOVER standard deviations use exponential-proposal
    rejection (which only ever needs the conditional law, so far-tail
    intervals with unrepresentably small absolute mass still sample
    exactly).  Raises IntervalUnderflowError when double precision cannot
    resolve the interval at all: inverse-CDF endpoints that coincide, or
    an interval narrower than the float spacing at its location.
    """
    tail_hi = a >= TAIL_CROSSOVER
    tail_lo = b <= -TAIL_CROSSOVER
    if not tail_hi.any() and not tail_lo.any():
        return _central_inverse_cdf(a, b, rng)  # hot path: no far tails

    z = np.empty_like(a)
    at = np.where(tail_lo, -b, a)  # reflect lower tails onto upper ones
    bt = np.where(tail_lo, -a, b)
    tail = tail_hi | tail_lo
    ta, tb = at[tail], bt[tail]
    bad = ~np.isinf(tb) & (np.nextafter(ta, np.inf) >= tb)
    if np.any(bad):
        i = int(np.nonzero(tail)[0][np.argmax(bad)])
        raise IntervalUnderflowError(
            f"truncation interval [{a[i]:.17g}, {b[i]:.17g}] (standardized) "
            "is narrower than double-precision spacing",
            i,
        )
    zt, _ = _tail_rejection(ta, tb, rng)
    z[tail] = np.where(tail_lo[tail], -zt, zt)
    central = ~tail
    if central.any():
        try:
            z[central] = _central_inverse_cdf(a[central], b[central], rng)
        except IntervalUnderflowError as err:
            i = int(np.nonzero(central)[0][err.args[1]])
            raise IntervalUnderflowError(err.args[0], i) from None
    return z


def _trunc_normal_vec(mean: Vector, sd: float, lo: Vector, hi: Vector, rng: Rng) -> Vector:
    mean = np.asarray(mean, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    a = (lo - mean) / sd
    b = (hi - mean) / sd
    try:
        z = _trunc_std_normal(a, b, rng)
    except IntervalUnderflowError as err:
        i = err.args[1] if len(err.args) > 1 else 0
        raise IntervalUnderflowError(
            f"truncation interval [{lo.flat[i]:.17g}, {hi.flat[i]:.17g}] around "
            f"mean {mean.flat[i]:.17g} (sd {sd:.17g}) underflows double precision"
        ) from err
    x = mean + sd * z
    return np.clip(x, lo, hi)


def sample_trunc_normal_1d(spec: TruncSpec, rng: Rng) -> float:
    """Exact draw from N(mean, sd^2) conditioned on [lo, hi]."""
    x = _trunc_normal_vec(
        np.array([spec.mean]), spec.sd, np.array([spec.lo]), np.array([spec.hi]), rng
    )
    return float(x[0])


def rgo_orthant(lam: float, v: Vector, spec: OrthantSpec, rng: Rng) -> Vector:
    """Exact draw from exp(-(1/(2*lam))*||x-v||^2) restricted to an orthant.

    Coordinates are independent truncated normals with sd sqrt(lam);
    outputs satisfy the sign constraints exactly.
    """
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    v = np.asarray(v, dtype=float)
    if v.shape != (spec.dim,):
        raise ValueError(f"center has shape {v.shape}, expected ({spec.dim},)")
    lo = np.where(spec.signs > 0, 0.0, -np.inf)
    hi = np.where(spec.signs > 0, np.inf, 0.0)
    return _trunc_normal_vec(v, float(np.sqrt(lam)), lo, hi, rng)


def rgo_box(lam: float, v: Vector, lo: Vector, hi: Vector, rng: Rng) -> Vector:
    """Exact draw from exp(-(1/(2*lam))*||x-v||^2) restricted to a box."""
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    v = np.asarray(v, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), v.shape)
    hi = np.broadcast_to(np.asarray(hi, dtype=float), v.shape)
    if not np.all(lo < hi):
        raise ValueError("box needs lo < hi coordinatewise")
    return _trunc_normal_vec(v, float(np.sqrt(lam)), lo, hi, rng)


def rgo_l1(lam: float, v: Vector, alpha: float, rng: Rng) -> Vector:
    """Exact draw from exp(-(1/(2*lam))*||x-v||^2 - alpha*||x||_1).

    Per coordinate the density is a two-piece Gaussian: N(v - alpha*lam,
    lam) on [0, inf) mixed with N(v + alpha*lam, lam) on (-inf, 0].
    Mixture log-weights are computed through log-CDFs, so large
    alpha*lam cannot overflow or cancel.
    """
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    v = np.asarray(v, dtype=float)
    sd = float(np.sqrt(lam))
    mu_pos = v - alpha * lam
    mu_neg = v + alpha * lam
    # log weights up to a shared constant: completing the square on each side
    lw_pos = -alpha * v + log_ndtr(mu_pos / sd)
    lw_neg = alpha * v + log_ndtr(-mu_neg / sd)
    p_pos = expit(lw_pos - lw_neg)
    take_pos = rng.random(v.shape[0]) < p_pos
    mean = np.where(take_pos, mu_pos, mu_neg)
    lo = np.where(take_pos, 0.0, -np.inf)
    hi = np.where(take_pos, np.inf, 0.0)
    return _trunc_normal_vec(mean, sd, lo, hi, rng)


def rgo_quadratic(lam: float, v: Vector, a_diag: Vector, b: Vector, rng: Rng) -> Vector:
    """Exact Gaussian draw from exp(-(1/(2*lam))*||x-v||^2 - x^T diag(a) x / 2 - <b, x>).

    Folding the quadratics gives per-coordinate precision 1/lam + a_i and
    mean (v_i/lam - b_i)/(1/lam + a_i); used for closed-form end-to-end
    checks where the whole target is Gaussian.
    """
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    v = np.asarray(v, dtype=float)
    a_diag = np.broadcast_to(np.asarray(a_diag, dtype=float), v.shape)
    b = np.broadcast_to(np.asarray(b, dtype=float), v.shape)
    if np.any(a_diag < 0):
        raise ValueError("quadratic diagonal must be nonnegative")
    prec = 1.0 / lam + a_diag
    mean = (v / lam - b) / prec
    return mean + rng.standard_normal(v.shape[0]) / np.sqrt(prec)


def zero_potential(dim: int) -> CompositePotential:
    """g = 0: the oracle degenerates to a plain Gaussian sampler."""

    def rgo(lam: float, v: Vector, rng: Rng) -> Vector:
        return np.asarray(v, dtype=float) + np.sqrt(lam) * rng.standard_normal(dim)

    return CompositePotential(
        value=lambda x: 0.0,
        rgo=rgo,
        prox=lambda lam, v: np.asarray(v, dtype=float),
    )


def orthant_potential(spec: OrthantSpec) -> CompositePotential:
    """Indicator of a coordinatewise sign orthant (0 inside, +inf outside)."""

    def value(x: Vector) -> float:
        return 0.0 if spec.contains(x) else np.inf

    def prox(lam: float, v: Vector) -> Vector:
        v = np.asarray(v, dtype=float)
        return spec.signs * np.maximum(spec.signs * v, 0.0)

    return CompositePotential(
        value=value,
        rgo=lambda lam, v, rng: rgo_orthant(lam, v, spec, rng),
        prox=prox,
    )


def box_potential(lo: Vector, hi: Vector) -> CompositePotential:
    """Indicator of the box [lo, hi] (coordinatewise)."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if not np.all(lo < hi):
        raise ValueError("box needs lo < hi coordinatewise")

    def value(x: Vector) -> float:
        x = np.asarray(x, dtype=float)
        return 0.0 if bool(np.all((x >= lo) & (x <= hi))) else np.inf

    return CompositePotential(
        value=value,
        rgo=lambda lam, v, rng: rgo_box(lam, v, lo, hi, rng),
        prox=lambda lam, v: np.clip(np.asarray(v, dtype=float), lo, hi),
    )


def l1_potential(alpha: float, dim: int) -> CompositePotential:
    """g(x) = alpha * ||x||_1 with soft-threshold prox and exact oracle."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")

    def value(x: Vector) -> float:
        return float(alpha * np.sum(np.abs(np.asarray(x, dtype=float))))

    def prox(lam: float, v: Vector) -> Vector:
        v = np.asarray(v, dtype=float)
        return np.sign(v) * np.maximum(np.abs(v) - lam * alpha, 0.0)

    return CompositePotential(
        value=value,
        rgo=lambda lam, v, rng: rgo_l1(lam, v, alpha, rng),
        prox=prox,
    )


def diagonal_quadratic_potential(a_diag: Vector, b: Vector) -> CompositePotential:
    """g(x) = x^T diag(a) x / 2 + <b, x>, the fully Gaussian test oracle."""
    a_diag = np.asarray(a_diag, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a_diag < 0):
        raise ValueError("quadratic diagonal must be nonnegative")

    def value(x: Vector) -> float:
        x = np.asarray(x, dtype=float)
        return 0.5 * float(x @ (a_diag * x)) + float(b @ x)

    def prox(lam: float, v: Vector) -> Vector:
        v = np.asarray(v, dtype=float)
        return (v / lam - b) / (1.0 / lam + a_diag)

    return CompositePotential(
        value=value,
        rgo=lambda lam, v, rng: rgo_quadratic(lam, v, a_diag, b, rng),
        prox=prox,
    )
