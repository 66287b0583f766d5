"""Reference samplers: hit-and-run on a restricted Gaussian, and naive rejection."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .model import Rng, Vector
from .oracles import OrthantSpec, TruncSpec, sample_trunc_normal_1d


@dataclass(frozen=True)
class RestrictedGaussian:
    """Gaussian N(mean, Sigma), optionally restricted to a sign orthant.

    Stores the lower-triangular Cholesky factor of Sigma (for exact
    unrestricted draws) alongside the cached precision matrix (for the
    1-D conditionals hit-and-run needs).
    """

    mean: Vector
    covariance_factor: Vector  # lower-triangular, factor @ factor.T == Sigma
    precision: Vector
    orthant: Optional[OrthantSpec] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float))
        object.__setattr__(
            self, "covariance_factor", np.asarray(self.covariance_factor, dtype=float)
        )
        object.__setattr__(self, "precision", np.asarray(self.precision, dtype=float))
        d = self.mean.shape[0]
        if self.covariance_factor.shape != (d, d) or self.precision.shape != (d, d):
            raise ValueError("factor and precision must be (d, d) matrices")
        if self.orthant is not None and self.orthant.dim != d:
            raise ValueError("orthant dimension mismatch")

    @classmethod
    def from_covariance(
        cls, mean: Vector, covariance: Vector, orthant: Optional[OrthantSpec] = None
    ) -> "RestrictedGaussian":
        covariance = np.asarray(covariance, dtype=float)
        covariance = 0.5 * (covariance + covariance.T)
        factor = np.linalg.cholesky(covariance)
        eye = np.eye(covariance.shape[0])
        # Sigma^{-1} via the Cholesky factor: solve L L^T X = I.
        precision = np.linalg.solve(factor.T, np.linalg.solve(factor, eye))
        precision = 0.5 * (precision + precision.T)
        return cls(mean=mean, covariance_factor=factor, precision=precision, orthant=orthant)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True)
class RejectionResult:
    """Samples plus the trial count; completed=False means the budget ran out."""

    samples: Vector
    trials: int
    completed: bool


def feasible_interval(
    target: RestrictedGaussian, x: Vector, direction: Vector
) -> tuple[float, float]:
    """The t-interval keeping x + t*direction inside the orthant."""
    if target.orthant is None:
        return -np.inf, np.inf
    s = target.orthant.signs
    su = s * np.asarray(direction, dtype=float)
    sx = s * np.asarray(x, dtype=float)
    # s_i*(x_i + t*u_i) >= 0  <=>  t >= -sx/su (su > 0) or t <= -sx/su (su < 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        bound = -sx / su
    t_lo = np.max(bound[su > 0.0], initial=-np.inf)
    t_hi = np.min(bound[su < 0.0], initial=np.inf)
    return float(t_lo), float(t_hi)


def hit_and_run_step(target: RestrictedGaussian, x: Vector, rng: Rng) -> Vector:
    """One hit-and-run move: exact Gaussian chord resampling.

    Draws a uniform unit direction u, intersects the line with the
    orthant, and samples t from the exact 1-D conditional along the chord:
    a normal with mean -(u^T P (x - m))/(u^T P u) and variance
    1/(u^T P u), truncated to the feasible interval.
    """
    x = np.asarray(x, dtype=float)
    if target.orthant is not None and not bool(
        np.all(target.orthant.signs * x > 0.0)
    ):
        raise ValueError("hit-and-run state must lie strictly inside the orthant")
    u = rng.standard_normal(target.dim)
    u /= np.linalg.norm(u)
    t_lo, t_hi = feasible_interval(target, x, u)
    pu = target.precision @ u
    quad = float(u @ pu)
    lin = float(pu @ (x - target.mean))
    spec = TruncSpec(mean=-lin / quad, sd=float(np.sqrt(1.0 / quad)), lo=t_lo, hi=t_hi)
    t = sample_trunc_normal_1d(spec, rng)
    return x + t * u


def hit_and_run_chain(
    target: RestrictedGaussian, x0: Vector, rng: Rng
) -> Iterator[Vector]:
    """Open-ended hit-and-run iterate stream starting at x0 (yielded first)."""
    x = np.asarray(x0, dtype=float)
    yield x
    while True:
        x = hit_and_run_step(target, x, rng)
        yield x


def initial_interior_point(target: RestrictedGaussian) -> Vector:
    """Deterministic strictly-interior start: coordinatewise |m_i| + sigma_i, signed."""
    sigma = np.sqrt(np.sum(target.covariance_factor**2, axis=1))
    mag = np.abs(target.mean) + sigma
    if target.orthant is None:
        return target.mean.copy()
    return target.orthant.signs * mag


def naive_rejection(
    target: RestrictedGaussian,
    n: int,
    rng: Rng,
    max_trials: int = 1_000_000_000,
) -> RejectionResult:
    """Exact orthant-restricted draws by rejecting unrestricted Gaussians.

    Draws x = m + F z with standard-normal z until n samples land in the
    orthant; the output law is exactly the restricted target.  If the
    trial budget is exhausted first, the partial sample set is returned
    with completed=False.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    d = target.dim
    out = np.empty((n, d))
    got = 0
    trials = 0
    batch = max(256, min(65536, 4 * n))
    while got < n and trials < max_trials:
        take = min(batch, max_trials - trials)
        z = rng.standard_normal((take, d))
        xs = target.mean + z @ target.covariance_factor.T
        if target.orthant is None:
            hits = np.arange(take)
        else:
            hits = np.nonzero(np.all(target.orthant.signs * xs >= 0.0, axis=1))[0]
        need = n - got
        if hits.size >= need:
            # count only the draws up to the one completing the quota
            trials += int(hits[need - 1]) + 1
            out[got:n] = xs[hits[:need]]
            got = n
        else:
            trials += take
            out[got : got + hits.size] = xs[hits]
            got += hits.size
    return RejectionResult(samples=out[:got], trials=trials, completed=got == n)
