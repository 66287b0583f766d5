"""Composite logconcave sampling through restricted Gaussian oracles.

Draws from densities proportional to exp(-f(x) - g(x)) where f is smooth
and strongly convex and g is convex but possibly nonsmooth, given exact
samplers for Gaussians restricted by g.  Includes concrete oracles
(orthant, box, l1, quadratic), an accelerated proximal-gradient
minimizer, hit-and-run and rejection baselines, chain diagnostics, and a
benchmark CLI (``compsamp``).
"""

from .baselines import (
    RejectionResult,
    RestrictedGaussian,
    hit_and_run_chain,
    hit_and_run_step,
    initial_interior_point,
    naive_rejection,
)
from .diagnostics import (
    DegenerateSeriesError,
    EssReport,
    QuadratureError,
    autocorrelation,
    ess,
    ess_report,
    ks_against_cdf,
    ks_two_sample,
    mixing_time,
    quadrature_1d,
    quadrature_cdf,
)
from .model import (
    CompositePotential,
    CompositeTarget,
    IsotropicGaussianFactor,
    SmoothPotential,
    fold_factors,
    isotropic_quadratic,
    pseudo_huber_potential,
    quadratic_potential,
    shift_linear,
)
from .optimize import OptResult, fista, minimize_target
from .oracles import (
    IntervalUnderflowError,
    OrthantSpec,
    TruncSpec,
    box_potential,
    diagonal_quadratic_potential,
    l1_potential,
    orthant_potential,
    rgo_box,
    rgo_l1,
    rgo_orthant,
    rgo_quadratic,
    sample_trunc_normal_1d,
    zero_potential,
)
from .sampler import (
    ChainTrace,
    SamplerParams,
    SamplerStats,
    confinement_radius,
    default_coupling_scale,
    joint_chain_steps,
    log_ratio_estimate,
    mala_chain,
    mala_log_accept,
    prepare_shared_min,
    resolve_params,
    sample_composite,
    sample_composite_shared_min,
    sample_joint_chain,
    sample_perturbed_gaussian,
)

__version__ = "0.1.0"
