"""Composite sampler: alternating oracle chain with an outer rejection filter.

The stack, top to bottom:

* ``sample_composite``: tilts f and g so they share the composite
  minimizer x*, then delegates.
* ``sample_composite_shared_min``: draws chain endpoints and filters them
  through an unbiased density-ratio estimate, accepting with probability
  (ratio estimate)/4 inside a high-probability ball around x*.
* ``sample_joint_chain``: Gibbs-style alternation on an extended (x, y)
  space whose x-marginal approximates the target; x-updates call the
  restricted Gaussian oracle on a folded factor, y-updates call
  ``sample_perturbed_gaussian``.
* ``sample_perturbed_gaussian``: exact rejection sampler for a Gaussian
  perturbed by the smooth potential, with a Metropolized-Langevin
  fallback far from the minimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

import numpy as np

from .model import (
    CompositePotential,
    CompositeTarget,
    Rng,
    SmoothPotential,
    Vector,
    shift_linear,
)
from .optimize import minimize_target

# Hard upper bound on the outer ratio estimate; exceeding it means the
# declared smoothness or the coupling scale is wrong.
RATIO_BOUND = 4.0
# The filter's validity premise: eta * L^2 * omega_radius^2 <= 1/2 (holds
# with equality at the default coupling scale).
FILTER_PREMISE = 0.5
# Conservative iteration-count constant restored by paper_faithful mode.
FAITHFUL_LOOP_CONSTANT = float(2**26 * 100)
# Fallback chain sizing: steps = ceil(FALLBACK_STEPS_CONST * d * log(d/delta)),
# step size 1/sqrt((L + 1/eta) * d).
FALLBACK_STEPS_CONST = 20.0


@dataclass
class SamplerStats:
    """Mutable counters threaded through a sampling run."""

    gradient_calls: int = 0
    oracle_calls: int = 0
    outer_loops: int = 0
    y_proposals: int = 0
    filter_evaluations: int = 0
    fallback_steps: int = 0
    fallback_accepts: int = 0


@dataclass(frozen=True)
class SamplerParams:
    """Resolved run parameters for the sampler stack.

    ``eta`` is the coupling scale of the extended distribution, ``k_iters``
    the inner chain length, ``omega_radius`` the acceptance ball around
    x*, and ``delta`` the inner total-variation budget.  ``loop_constant``
    scales ``k_iters``; the default 10 replaces the conservative
    2^26 * 100 (restored by ``paper_faithful`` in ``resolve_params``),
    which makes desk-scale runs impossible.
    """

    epsilon: float
    eta: float
    k_iters: int
    loop_constant: float
    omega_radius: float
    delta: float

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if self.eta <= 0 or not np.isfinite(self.eta):
            raise ValueError(f"eta must be finite and positive, got {self.eta}")
        if self.k_iters < 1:
            raise ValueError(f"k_iters must be >= 1, got {self.k_iters}")
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")

    def filter_premise_holds(self, smoothness: float) -> bool:
        """Whether the outer rejection filter's ratio bound is in force."""
        lhs = self.eta * smoothness**2 * self.omega_radius**2
        return lhs <= FILTER_PREMISE * (1.0 + 1e-9)


@dataclass
class ChainTrace:
    """Iterates and bookkeeping from one joint-chain run."""

    iterates: Vector  # (k_iters + 1, d); row 0 is the start point
    y_iterates: Optional[Vector]  # (k_iters, d) when recorded
    gradient_calls: int
    oracle_calls: int
    seed: Optional[int]
    params: SamplerParams

    @property
    def final(self) -> Vector:
        return self.iterates[-1]


def confinement_radius(dim: int, strong_convexity: float, log_arg: float) -> float:
    """High-probability radius 4*sqrt(d*log(log_arg)/mu) around the minimizer.

    A single formula serves both the outer acceptance ball (log argument
    288*kappa/epsilon) and the inner chain's ball (16*kappa/delta).
    """
    if log_arg <= 1.0:
        raise ValueError(f"log argument must exceed 1, got {log_arg}")
    return 4.0 * math.sqrt(dim * math.log(log_arg) / strong_convexity)


def default_coupling_scale(f: SmoothPotential, delta: float) -> float:
    """Theory step 1/(32*L*kappa*d*log(16*kappa/delta))."""
    kappa = f.condition_number
    return 1.0 / (32.0 * f.smoothness * kappa * f.dim * math.log(16.0 * kappa / delta))


def resolve_params(
    f: SmoothPotential,
    epsilon: float,
    eta: Optional[float] = None,
    k_iters: Optional[int] = None,
    loop_constant: float = 10.0,
    paper_faithful: bool = False,
) -> SamplerParams:
    """Fill in defaults for one sampling run against the smooth part f."""
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    delta = epsilon / 18.0
    kappa = f.condition_number
    if paper_faithful:
        loop_constant = FAITHFUL_LOOP_CONSTANT
    if eta is None:
        eta = default_coupling_scale(f, delta)
    if k_iters is None:
        log_arg = max(f.dim * math.log(16.0 * kappa) / (4.0 * delta), math.e)
        k_iters = int(
            math.ceil(loop_constant / (eta * f.strong_convexity) * math.log(log_arg))
        )
    omega_radius = confinement_radius(
        f.dim, f.strong_convexity, 288.0 * kappa / epsilon
    )
    return SamplerParams(
        epsilon=epsilon,
        eta=eta,
        k_iters=k_iters,
        loop_constant=loop_constant,
        omega_radius=omega_radius,
        delta=delta,
    )


def mala_log_accept(
    potential_value: Callable[[Vector], float],
    potential_grad: Callable[[Vector], Vector],
    current: Vector,
    proposal: Vector,
    step_size: float,
) -> float:
    """Log Metropolis ratio for the Langevin proposal N(y - (h^2/2) grad U(y), h^2 I)."""
    h2 = step_size * step_size
    fwd = proposal - (current - 0.5 * h2 * potential_grad(current))
    bwd = current - (proposal - 0.5 * h2 * potential_grad(proposal))
    return float(
        potential_value(current)
        - potential_value(proposal)
        + (fwd @ fwd - bwd @ bwd) / (2.0 * h2)
    )


def mala_chain(
    potential_value: Callable[[Vector], float],
    potential_grad: Callable[[Vector], Vector],
    x0: Vector,
    steps: int,
    step_size: float,
    rng: Rng,
    stats: Optional[SamplerStats] = None,
) -> Vector:
    """Metropolis-adjusted Langevin chain; returns the final state.

    One-leapfrog-step proposals y' ~ N(y - (h^2/2) grad U(y), h^2 I) with
    the exact Metropolis correction for that proposal pair.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    y = np.asarray(x0, dtype=float).copy()
    h2 = step_size * step_size
    val = potential_value(y)
    grd = potential_grad(y)
    accepts = 0
    for _ in range(steps):
        mean_fwd = y - 0.5 * h2 * grd
        prop = mean_fwd + step_size * rng.standard_normal(y.shape[0])
        val_p = potential_value(prop)
        grd_p = potential_grad(prop)
        fwd = prop - mean_fwd
        bwd = y - (prop - 0.5 * h2 * grd_p)
        log_r = val - val_p + (fwd @ fwd - bwd @ bwd) / (2.0 * h2)
        if math.log(rng.random()) <= log_r:
            y, val, grd = prop, val_p, grd_p
            accepts += 1
    if stats is not None:
        stats.fallback_steps += steps
        stats.fallback_accepts += accepts
        stats.gradient_calls += steps + 1
    return y


def graded_radius(f: SmoothPotential, delta: float) -> float:
    """Radius sqrt(kappa*d*log(16*kappa/delta)) times the confinement radius.

    Inside it the linearized rejection sampler is provably cheap; outside,
    the Metropolized fallback takes over.
    """
    kappa = f.condition_number
    return math.sqrt(
        kappa * f.dim * math.log(16.0 * kappa / delta)
    ) * confinement_radius(f.dim, f.strong_convexity, 16.0 * kappa / delta)


def sample_perturbed_gaussian(
    f: SmoothPotential,
    x: Vector,
    eta: float,
    delta: float,
    x_star: Vector,
    rng: Rng,
    stats: Optional[SamplerStats] = None,
    near_radius: Optional[float] = None,
) -> tuple[Vector, int]:
    """Draw y from the density proportional to exp(-f(y) - ||y - x||^2/(2*eta)).

    Near the minimizer (within ``graded_radius``) this is exact rejection
    sampling from the linearized proposal N(x - eta*grad f(x), eta*I),
    accepted with probability exp(f(x) + <grad f(x), y - x> - f(y)) which
    convexity keeps at most 1.  Outside, a Metropolized Langevin chain on
    f(y) + ||y - x||^2/(2*eta) runs for ceil(20*d*log(d/delta)) steps.
    ``near_radius`` lets chain loops pass the precomputed radius.

    Returns (y, iterations_used).
    """
    if eta * f.smoothness >= 1.0:
        raise ValueError(
            f"need eta*L < 1, got eta*L = {eta * f.smoothness:.3g}"
        )
    x = np.asarray(x, dtype=float)
    d = f.dim
    if near_radius is None:
        near_radius = graded_radius(f, delta)

    dxs = x - x_star
    if math.sqrt(float(dxs @ dxs)) <= near_radius:
        fx = f.value(x)
        gx = f.grad(x)
        if stats is not None:
            stats.gradient_calls += 1
        root_eta = math.sqrt(eta)
        iters = 0
        while True:
            iters += 1
            y = x - eta * gx + root_eta * rng.standard_normal(d)
            fy = f.value(y)
            log_acc = fx + float(gx @ (y - x)) - fy
            if log_acc > 1e-12 * (1.0 + abs(fx) + abs(fy)):
                raise AssertionError(
                    "rejection acceptance exceeded 1: smooth part is not convex "
                    f"(log acceptance {log_acc:.3e})"
                )
            if stats is not None:
                stats.y_proposals += 1
            if math.log(rng.random()) <= log_acc:
                return y, iters

    # Far field: Metropolized Langevin on the coupled potential, started
    # at the proposal mean.
    inv_eta = 1.0 / eta

    def u_value(y: Vector) -> float:
        r = y - x
        return f.value(y) + 0.5 * inv_eta * float(r @ r)

    def u_grad(y: Vector) -> Vector:
        return f.grad(y) + inv_eta * (y - x)

    steps = max(1, int(math.ceil(FALLBACK_STEPS_CONST * d * math.log(max(d / delta, math.e)))))
    step_size = 1.0 / math.sqrt((f.smoothness + inv_eta) * d)
    g0 = f.grad(x)
    if stats is not None:
        stats.gradient_calls += 1
    y = mala_chain(u_value, u_grad, x - eta * g0, steps, step_size, rng, stats=stats)
    return y, steps


def log_ratio_estimate(
    f: SmoothPotential,
    x: Vector,
    x_star: Vector,
    eta: float,
    smoothness: float,
    y: Vector,
) -> float:
    """Log of the one-sample unbiased estimate of the target/auxiliary density ratio.

    With y drawn from the perturbed-Gaussian conditional at x, the
    estimate is

        (1 + eta*L)^{d/2} * exp(f(y) - f(x) - <grad f(x), y - x>
            - (L/2)*||y-x||^2 - eta*||grad f(x)||^2 / (2*(1 + eta*L))
            + (eta*L^2/2)*||x - x*||^2).

    The gradient-norm term must carry a minus sign: averaging over y pulls
    out a factor exp(+eta*||grad f(x)||^2/(2*(1+eta*L))) from the Gaussian
    integral, and only the minus cancels it to leave exactly the density
    ratio (checked against 1-D quadrature in the tests).  The composite
    part g appears with opposite signs in the two factors of the estimator
    and cancels algebraically, so it is never evaluated (essential when g
    is an indicator).  Computed entirely in log space.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    L = smoothness
    gx = f.grad(x)
    dxy = y - x
    dxs = x - np.asarray(x_star, dtype=float)
    curvature_gap = (
        f.value(y) - f.value(x) - float(gx @ dxy) - 0.5 * L * float(dxy @ dxy)
    )
    return (
        0.5 * f.dim * math.log1p(eta * L)
        + curvature_gap
        - eta * float(gx @ gx) / (2.0 * (1.0 + eta * L))
        + 0.5 * eta * L * L * float(dxs @ dxs)
    )


def _chain_rounds(
    f: SmoothPotential,
    g: CompositePotential,
    x_star: Vector,
    params: SamplerParams,
    rng: Rng,
    stats: Optional[SamplerStats],
    delta_inner: float,
) -> Iterator[tuple[Vector, Optional[Vector]]]:
    """Yield (x, y) states of the alternating chain; first item is (x0, None).

    x0 comes from the oracle at factor (1/(L + eta*L^2), x*); each round
    draws y from the perturbed-Gaussian conditional, then x from the
    oracle at the fold of (eta, y) with (1/(eta*L^2), x*).
    """
    eta = params.eta
    L = f.smoothness
    x_star = np.asarray(x_star, dtype=float)

    lam0 = 1.0 / (L + eta * L * L)
    x = np.asarray(g.rgo(lam0, x_star, rng), dtype=float)
    if stats is not None:
        stats.oracle_calls += 1
    yield x, None

    # fold of (eta, y) and (1/(eta*L^2), x*), precomputed coefficients:
    # lam = 1/(1/eta + eta*L^2), v = lam*(y/eta + eta*L^2*x*)
    lam_x = 1.0 / (1.0 / eta + eta * L * L)
    y_coef = lam_x / eta
    star_term = lam_x * eta * L * L * x_star
    near_radius = graded_radius(f, delta_inner)
    while True:
        y, _ = sample_perturbed_gaussian(
            f, x, eta, delta_inner, x_star, rng, stats, near_radius=near_radius
        )
        x = np.asarray(g.rgo(lam_x, y_coef * y + star_term, rng), dtype=float)
        if stats is not None:
            stats.oracle_calls += 1
        yield x, y


def inner_y_tolerance(params: SamplerParams, dim: int, kappa: float) -> float:
    """Per-call TV budget for the y-sampler: delta/(2*K*d*log(d*kappa/delta))."""
    log_arg = max(dim * kappa / params.delta, math.e)
    return params.delta / (2.0 * params.k_iters * dim * math.log(log_arg))


def joint_chain_steps(
    f: SmoothPotential,
    g: CompositePotential,
    x_star: Vector,
    params: SamplerParams,
    rng: Rng,
    stats: Optional[SamplerStats] = None,
) -> Iterator[Vector]:
    """Open-ended x-iterate stream of the alternating chain (for diagnostics)."""
    delta_inner = inner_y_tolerance(params, f.dim, f.condition_number)
    for x, _ in _chain_rounds(f, g, x_star, params, rng, stats, delta_inner):
        yield x


def sample_joint_chain(
    f: SmoothPotential,
    g: CompositePotential,
    x_star: Vector,
    delta: float,
    params: SamplerParams,
    rng: Rng,
    keep_y: bool = False,
    seed: Optional[int] = None,
    stats: Optional[SamplerStats] = None,
) -> ChainTrace:
    """Run the alternating chain for params.k_iters rounds and return its trace.

    ``delta`` is the chain's total-variation budget; it only enters
    through the per-call tolerance handed to the y-sampler.
    """
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    local = stats if stats is not None else SamplerStats()
    grad0, oracle0 = local.gradient_calls, local.oracle_calls
    k = params.k_iters
    d = f.dim
    iterates = np.empty((k + 1, d))
    ys = np.empty((k, d)) if keep_y else None

    log_arg = max(d * f.condition_number / delta, math.e)
    delta_inner = delta / (2.0 * k * d * math.log(log_arg))
    rounds = _chain_rounds(f, g, x_star, params, rng, local, delta_inner)
    iterates[0], _ = next(rounds)
    for i in range(1, k + 1):
        x, y = next(rounds)
        iterates[i] = x
        if keep_y:
            ys[i - 1] = y
    rounds.close()
    return ChainTrace(
        iterates=iterates,
        y_iterates=ys,
        gradient_calls=local.gradient_calls - grad0,
        oracle_calls=local.oracle_calls - oracle0,
        seed=seed,
        params=params,
    )


def sample_composite_shared_min(
    f: SmoothPotential,
    g: CompositePotential,
    x_star: Vector,
    epsilon: float,
    rng: Rng,
    params: Optional[SamplerParams] = None,
    stats: Optional[SamplerStats] = None,
    max_outer: int = 10_000,
) -> Vector:
    """Draw one sample from exp(-f - g) when f and g share the minimizer x*.

    Chain endpoints inside the acceptance ball are filtered with
    probability (ratio estimate)/4.  A ratio estimate above 4 inside the
    ball contradicts the filter's validity bound and raises; it means the
    declared smoothness or the coupling scale is wrong.  When the
    resolved parameters violate the filter's premise
    (eta*L^2*omega_radius^2 <= 1/2, impossible under large empirical step
    sizes), the filter is skipped and the chain endpoint is returned
    directly -- matching how oversized steps are used in practice.
    """
    if params is None:
        params = resolve_params(f, epsilon)
    x_star = np.asarray(x_star, dtype=float)
    delta = epsilon / 18.0
    filter_on = params.filter_premise_holds(f.smoothness)
    log_bound = math.log(RATIO_BOUND)

    for _ in range(max_outer):
        if stats is not None:
            stats.outer_loops += 1
        trace = sample_joint_chain(f, g, x_star, delta, params, rng, stats=stats)
        x = trace.final
        if not filter_on:
            return x
        if float(np.linalg.norm(x - x_star)) > params.omega_radius:
            continue
        y, _ = sample_perturbed_gaussian(f, x, params.eta, delta, x_star, rng, stats)
        log_ratio = log_ratio_estimate(f, x, x_star, params.eta, f.smoothness, y)
        if stats is not None:
            stats.filter_evaluations += 1
        if log_ratio > log_bound + 1e-9 * (1.0 + abs(log_ratio)):
            raise AssertionError(
                f"ratio estimate exp({log_ratio:.6f}) exceeded its bound {RATIO_BOUND}; "
                "declared smoothness or coupling scale is inconsistent with the target"
            )
        if math.log(rng.random()) <= log_ratio - log_bound:
            return x
    raise RuntimeError(f"no sample accepted in {max_outer} outer loops")


def prepare_shared_min(
    target: CompositeTarget,
) -> tuple[SmoothPotential, CompositePotential, Vector]:
    """Resolve x* and tilt (f, g) by grad f(x*) so both are minimized at x*."""
    if target.x_star is not None:
        x_star = np.asarray(target.x_star, dtype=float)
    else:
        if target.g.prox is None:
            raise ValueError(
                "target has no cached minimizer and g has no proximal map to compute one"
            )
        result = minimize_target(target)
        if not result.converged:
            raise RuntimeError(
                f"minimizer search did not converge (residual {result.residual:.3e})"
            )
        x_star = result.x_star
    c = np.asarray(target.f.grad(x_star), dtype=float)
    shifted = shift_linear(
        CompositeTarget(f=target.f, g=target.g, x_star=x_star), c
    )
    return shifted.f, shifted.g, x_star


def sample_composite(
    target: CompositeTarget,
    epsilon: float,
    rng: Rng,
    params: Optional[SamplerParams] = None,
    stats: Optional[SamplerStats] = None,
) -> Vector:
    """Draw one sample within total variation epsilon of exp(-f - g)."""
    f, g, x_star = prepare_shared_min(target)
    if params is None:
        params = resolve_params(f, epsilon)
    return sample_composite_shared_min(
        f, g, x_star, epsilon, rng, params=params, stats=stats
    )
