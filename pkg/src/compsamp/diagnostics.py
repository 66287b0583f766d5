"""Chain-quality metrics and the 1-D quadrature oracles used by exactness tests.

Everything here is a pure function.  The quadrature routines are the
independent reference implementation that sampler outputs are checked
against, so they deliberately share no code with the samplers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import logsumexp

Vector = np.ndarray


class DegenerateSeriesError(ValueError):
    """Raised for constant (zero-variance) chains, which have no usable diagnostics."""


class QuadratureError(RuntimeError):
    """Raised when node doubling fails to converge within the node budget."""


@dataclass(frozen=True)
class EssReport:
    """Per-coordinate effective sample sizes of a chain, clamped to [1, N]."""

    ess_per_coordinate: Vector
    min_ess: float
    lags_used: Vector


def _autocov(series: Vector) -> Vector:
    """Biased centered autocovariances c_0..c_{n-1} via FFT."""
    x = np.asarray(series, dtype=float)
    n = x.shape[0]
    xc = x - x.mean(axis=0)
    m = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xc, n=m, axis=0)
    acov = np.fft.irfft(f * np.conj(f), n=m, axis=0)[:n]
    return acov / n


def autocorrelation(series: Sequence[float], max_lag: int) -> Vector:
    """Normalized sample autocorrelation at lags 0..max_lag.

    Uses the centered, biased estimator c_k / c_0 with
    c_k = (1/n) * sum_t (x_t - xbar)(x_{t+k} - xbar).
    """
    x = np.asarray(series, dtype=float)
    if max_lag < 1:
        raise ValueError(f"max_lag must be >= 1, got {max_lag}")
    if x.ndim != 1 or x.shape[0] <= max_lag:
        raise ValueError("series must be 1-D with length > max_lag")
    acov = _autocov(x)
    if acov[0] <= 0.0:
        raise DegenerateSeriesError("series has zero variance")
    return acov[: max_lag + 1] / acov[0]


def _geyer_tau(rho: Vector) -> tuple[float, int]:
    """Integrated autocorrelation time with initial-monotone-positive truncation.

    Returns (tau, last_lag_used).  Consecutive-lag pair sums are kept
    while positive, then forced non-increasing; tau = 2*sum(pairs) - 1.
    """
    n = rho.shape[0]
    n_pairs = n // 2
    if n_pairs == 0:
        return 1.0, 0
    pair = rho[0 : 2 * n_pairs : 2] + rho[1 : 2 * n_pairs + 1 : 2]
    pos = np.nonzero(pair <= 0.0)[0]
    cut = int(pos[0]) if pos.size else n_pairs
    if cut == 0:
        return 1.0, 0
    kept = np.minimum.accumulate(pair[:cut])
    tau = 2.0 * float(np.sum(kept)) - 1.0
    return tau, 2 * cut - 1


def ess(series: Sequence[float]) -> float:
    """Effective sample size N / (1 + 2*sum rho(k)), Geyer-truncated.

    Clamped to [1, N]: antithetic chains can push the raw formula past N,
    and clamping keeps a min-ESS mixing criterion monotone.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.shape[0] < 4:
        raise ValueError("series must be 1-D with at least 4 points")
    acov = _autocov(x)
    if acov[0] <= 0.0:
        raise DegenerateSeriesError("series has zero variance")
    tau, _ = _geyer_tau(acov / acov[0])
    n = x.shape[0]
    return float(np.clip(n / max(tau, 1.0 / n), 1.0, n))


def ess_report(chain: Vector) -> EssReport:
    """Column-wise ESS for an (n, d) chain matrix."""
    chain = np.asarray(chain, dtype=float)
    if chain.ndim == 1:
        chain = chain[:, None]
    n, d = chain.shape
    if n < 4:
        raise ValueError("chain must have at least 4 rows")
    acov = _autocov(chain)
    if np.any(acov[0] <= 0.0):
        raise DegenerateSeriesError("chain has a zero-variance coordinate")
    out = np.empty(d)
    lags = np.empty(d, dtype=int)
    for j in range(d):
        tau, lag = _geyer_tau(acov[:, j] / acov[0, j])
        out[j] = np.clip(n / max(tau, 1.0 / n), 1.0, n)
        lags[j] = lag
    return EssReport(ess_per_coordinate=out, min_ess=float(out.min()), lags_used=lags)


def mixing_time(
    chain_factory: Callable[[], Iterator[Vector]],
    ess_threshold: float = 10.0,
    step_block: int = 200,
    max_steps: int = 100_000,
    burn_in_fraction: float = 0.1,
) -> int:
    """Smallest step count (at step_block granularity) with min-coordinate ESS above threshold.

    The factory returns a fresh iterator of chain states.  The leading
    burn_in_fraction of the collected trace is discarded before each ESS
    evaluation.  Returns -1 if max_steps is exceeded.
    """
    chain = chain_factory()
    states: list[Vector] = []
    taken = 0
    while taken < max_steps:
        for _ in range(step_block):
            states.append(np.atleast_1d(np.asarray(next(chain), dtype=float)))
        taken += step_block
        arr = np.asarray(states)
        arr = arr[int(burn_in_fraction * arr.shape[0]) :]
        if arr.shape[0] < 8:
            continue
        try:
            report = ess_report(arr)
        except DegenerateSeriesError:
            continue
        if report.min_ess > ess_threshold:
            return taken
    return -1


def ks_two_sample(a: Sequence[float], b: Sequence[float]) -> float:
    """Sup-distance between the empirical CDFs of two samples."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_against_cdf(samples: Sequence[float], cdf: Callable[[Vector], Vector]) -> float:
    """Sup-distance between an empirical CDF and an exact CDF callable."""
    s = np.sort(np.asarray(samples, dtype=float))
    n = s.size
    if n == 0:
        raise ValueError("samples must be nonempty")
    f = np.asarray(cdf(s), dtype=float)
    upper = np.max(np.arange(1, n + 1) / n - f)
    lower = np.max(f - np.arange(0, n) / n)
    return float(max(upper, lower))


_QUAD_ORDER = 16
_MAX_NODES = 1 << 20
_REL_TOL = 1e-10


def _panel_nodes(lo: float, hi: float, panels: int, order: int) -> tuple[Vector, Vector]:
    """Gauss-Legendre nodes/weights tiled over equal panels of [lo, hi]."""
    t, w = leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _moments_once(
    log_density: Callable[[Vector], Vector], lo: float, hi: float, panels: int
) -> tuple[float, float, float]:
    nodes, weights = _panel_nodes(lo, hi, panels, _QUAD_ORDER)
    lf = np.asarray(log_density(nodes), dtype=float)
    lf = np.where(np.isfinite(lf), lf, -np.inf)
    lw = lf + np.log(weights)
    log_z = float(logsumexp(lw))
    if not np.isfinite(log_z):
        raise QuadratureError(f"density integrates to zero on [{lo}, {hi}]")
    p = np.exp(lw - log_z)
    mean = float(p @ nodes)
    var = float(p @ (nodes - mean) ** 2)
    return log_z, mean, var


def quadrature_1d(
    log_density: Callable[[Vector], Vector],
    lo: float,
    hi: float,
    n_nodes: int = 256,
) -> tuple[float, float, float]:
    """Log-partition, mean and variance of exp(log_density) on [lo, hi].

    Composite Gauss-Legendre with panel doubling until all three outputs
    are stable to 1e-10 relative; raises QuadratureError past 2^20 nodes.
    ``log_density`` must accept numpy arrays (vectorized); non-finite
    values are treated as -inf (zero density).
    """
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise ValueError(f"need finite lo < hi, got [{lo}, {hi}]")
    panels = max(1, int(np.ceil(n_nodes / _QUAD_ORDER)))
    prev = None
    while panels * _QUAD_ORDER <= _MAX_NODES:
        cur = _moments_once(log_density, lo, hi, panels)
        if prev is not None:
            ok = all(
                abs(c - p) <= _REL_TOL * (1.0 + abs(c)) for c, p in zip(cur, prev)
            )
            if ok:
                return cur
        prev = cur
        panels *= 2
    raise QuadratureError(
        f"quadrature on [{lo}, {hi}] did not stabilize within {_MAX_NODES} nodes"
    )


def quadrature_cdf(
    log_density: Callable[[Vector], Vector],
    lo: float,
    hi: float,
    n_panels: int = 2048,
    order: int = 8,
) -> Callable[[Vector], Vector]:
    """Normalized CDF of exp(log_density) on [lo, hi] as a vectorized callable.

    Panel masses are accumulated once; queries add an exact partial-panel
    Gauss-Legendre integral, so accuracy is set by the per-panel rule, not
    interpolation.
    """
    edges = np.linspace(lo, hi, n_panels + 1)
    t, w = leggauss(order)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = mid[:, None] + half[:, None] * t[None, :]
    lf = np.asarray(log_density(nodes.ravel()), dtype=float).reshape(nodes.shape)
    lf = np.where(np.isfinite(lf), lf, -np.inf)
    shift = float(lf.max())
    masses = (half[:, None] * w[None, :] * np.exp(lf - shift)).sum(axis=1)
    cum = np.concatenate([[0.0], np.cumsum(masses)])
    total = cum[-1]
    if total <= 0.0:
        raise QuadratureError(f"density integrates to zero on [{lo}, {hi}]")

    def cdf(xs: Vector) -> Vector:
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        x = np.clip(xs, lo, hi)
        idx = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, n_panels - 1)
        a = edges[idx]
        h = 0.5 * (x - a)
        pts = (a + h)[:, None] + h[:, None] * t[None, :]
        plf = np.asarray(log_density(pts.ravel()), dtype=float).reshape(pts.shape)
        plf = np.where(np.isfinite(plf), plf, -np.inf)
        partial = (h[:, None] * w[None, :] * np.exp(plf - shift)).sum(axis=1)
        out = (cum[idx] + partial) / total
        return np.clip(out, 0.0, 1.0)

    return cdf
