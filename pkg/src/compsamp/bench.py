"""Benchmark harness: random restricted-Gaussian targets, experiment runners, CSV artifacts.

Four experiments, each writing CSVs plus a ``params.json`` sidecar:

* ``verify``    -- low-dimensional agreement check between the composite
                   sampler and naive rejection, on random projections.
* ``scaling``   -- mixing steps (min-coordinate ESS > 10) versus dimension
                   for the composite sampler and hit-and-run.
* ``autocorr``  -- trajectory autocorrelation of both algorithms on one
                   instance, projected on a random direction.
* ``sample``    -- general entry point: draw from a built-in target family.

All randomness is keyed by (seed, purpose tags) through SeedSequence, so a
config with fixed seeds reproduces output bytes exactly (wall-clock
columns excepted).
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .baselines import (
    RestrictedGaussian,
    hit_and_run_chain,
    initial_interior_point,
    naive_rejection,
)
from .diagnostics import autocorrelation, ks_two_sample, mixing_time
from .model import CompositeTarget, Rng, Vector, quadratic_potential
from .optimize import minimize_target
from .oracles import (
    OrthantSpec,
    box_potential,
    l1_potential,
    orthant_potential,
    zero_potential,
)
from .sampler import (
    SamplerParams,
    SamplerStats,
    joint_chain_steps,
    prepare_shared_min,
    resolve_params,
    sample_composite_shared_min,
)

FAMILIES = (
    "gaussian-orthant",
    "gaussian-box",
    "gaussian-l1",
    "gaussian-unrestricted",
)
ALGORITHMS = ("composite", "hitandrun", "rejection")
DESK_DIMS = (10, 20, 40)
PAPER_DIMS = (20, 35, 50, 65, 80)
SCALING_HEADER = "algorithm,d,seed,mixing_steps,wall_ms,gradient_calls,oracle_calls"

# stream tags for per-purpose RNG derivation
_TAG_TARGET = 101
_TAG_COMPOSITE = 102
_TAG_REJECTION = 103
_TAG_PROJECTION = 104
_TAG_HITANDRUN = 105


def derive_rng(*keys: int) -> Rng:
    """Deterministic generator keyed by integer context (seed, tags, ...)."""
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in keys]))


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one benchmark run.

    ``eta``/``k_iters`` of None mean experiment-specific defaults (the
    empirical step 0.3/d and, for verify, the 0.01/500 pair);
    ``eta_theory`` switches to the conservative closed-form step instead.
    """

    experiment: str
    out_dir: Path = Path("bench-out")
    dim: Optional[int] = None
    dims: Optional[tuple[int, ...]] = None
    kappa: float = 10.0
    smoothness: float = 5.0
    mean_range: float = 0.5
    eta: Optional[float] = None
    eta_theory: bool = False
    k_iters: Optional[int] = None
    loop_constant: float = 10.0
    paper_faithful: bool = False
    seeds: tuple[int, ...] = (1,)
    n_samples: Optional[int] = None
    algorithms: tuple[str, ...] = ("composite", "hitandrun")
    family: str = "gaussian-orthant"
    epsilon: float = 0.5
    diagonal: bool = False
    box_halfwidth: float = 1.0
    l1_alpha: float = 1.0
    paper_grid: bool = False
    n_projections: int = 5
    trials_budget: int = 1_000_000_000
    max_steps: int = 200_000
    step_block: int = 250
    max_lag: int = 500
    workers: int = 1

    def __post_init__(self) -> None:
        if self.experiment not in ("verify", "scaling", "autocorr", "sample"):
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.kappa < 1.0:
            raise ValueError(f"kappa must be >= 1, got {self.kappa}")
        if self.smoothness <= 0:
            raise ValueError("smoothness must be positive")
        if not self.seeds:
            raise ValueError("seeds must be nonempty")
        if self.dim is not None and self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {algo!r}; known: {ALGORITHMS}")
        if self.family not in FAMILIES:
            raise ValueError(
                f"unknown target family {self.family!r}; known: {', '.join(FAMILIES)}"
            )
        object.__setattr__(self, "out_dir", Path(self.out_dir))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if self.dims is not None:
            object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))

    @classmethod
    def from_mapping(cls, data: dict, **overrides) -> "ExperimentConfig":
        merged = {**data, **{k: v for k, v in overrides.items() if v is not None}}
        merged.pop("resolved", None)
        return cls(**merged)

    def resolved_dim(self) -> int:
        if self.dim is not None:
            return self.dim
        return {"verify": 10, "scaling": 10, "autocorr": 100, "sample": 10}[
            self.experiment
        ]

    def resolved_dims(self) -> tuple[int, ...]:
        if self.dims is not None:
            return self.dims
        return PAPER_DIMS if self.paper_grid else DESK_DIMS

    def resolved_n_samples(self) -> int:
        if self.n_samples is not None:
            return self.n_samples
        return {"verify": 3000, "scaling": 0, "autocorr": 20_000, "sample": 1000}[
            self.experiment
        ]

    def resolved_eta(self, d: int) -> Optional[float]:
        """Experiment-default coupling scale; None defers to the theory formula.

        The empirical default 0.3/d is capped at 0.9/L so tiny dimensions
        cannot violate the eta*L < 1 requirement of the inner sampler.
        """
        if self.eta is not None:
            return self.eta
        if self.eta_theory:
            return None
        if self.experiment == "verify":
            return 0.01
        if self.experiment == "autocorr" and d == 500:
            return 0.0014
        return min(0.3 / d, 0.9 / self.smoothness)


def _haar_orthogonal(d: int, rng: Rng) -> Vector:
    m = rng.standard_normal((d, d))
    q, r = np.linalg.qr(m)
    return q * np.sign(np.diag(r))


def random_gaussian_target(
    d: int,
    kappa: float,
    smoothness: float,
    mean_range: float,
    rng: Rng,
    mean: Optional[Vector] = None,
    orthant: bool = True,
    diagonal: bool = False,
) -> tuple[RestrictedGaussian, CompositeTarget]:
    """Random dense-covariance Gaussian with an orthant restriction.

    Precision eigenvalues are log-uniform on [L/kappa, L] with both
    endpoints always present (so the realized condition number is exactly
    kappa for d >= 2); the eigenbasis is Haar-random unless ``diagonal``.
    Returns the baseline-facing and sampler-facing views of one target.
    """
    if kappa < 1.0:
        raise ValueError(f"kappa must be >= 1, got {kappa}")
    L = smoothness
    lo = L / kappa
    if d == 1:
        eigs = np.array([L])
    elif d == 2:
        eigs = np.array([lo, L])
    else:
        inner = np.exp(rng.uniform(np.log(lo), np.log(L), size=d - 2))
        eigs = np.concatenate([[lo, L], inner])
    q = np.eye(d) if diagonal else _haar_orthogonal(d, rng)
    precision = (q * eigs) @ q.T
    precision = 0.5 * (precision + precision.T)
    covariance = (q / eigs) @ q.T
    covariance = 0.5 * (covariance + covariance.T)
    m = (
        np.asarray(mean, dtype=float)
        if mean is not None
        else rng.uniform(-mean_range, mean_range, size=d)
    )
    spec = OrthantSpec(np.where(rng.random(d) < 0.5, -1.0, 1.0)) if orthant else None
    rg = RestrictedGaussian(
        mean=m,
        covariance_factor=np.linalg.cholesky(covariance),
        precision=precision,
        orthant=spec,
    )
    f = quadratic_potential(
        precision, m, smoothness=L, strong_convexity=lo if d > 1 else L
    )
    g = orthant_potential(spec) if orthant else zero_potential(d)
    return rg, CompositeTarget(f=f, g=g)


def family_target(
    config: ExperimentConfig, d: int, rng: Rng
) -> tuple[RestrictedGaussian, CompositeTarget]:
    """Build one target from the configured family, with its minimizer cached.

    The returned RestrictedGaussian is the baseline-facing view; for the
    box/l1 families it carries the unrestricted Gaussian part (mean,
    covariance, precision) so tests and callers can read the instance
    parameters.
    """
    orthant = config.family == "gaussian-orthant"
    rg, target = random_gaussian_target(
        d,
        config.kappa,
        config.smoothness,
        config.mean_range,
        rng,
        orthant=orthant,
        diagonal=config.diagonal,
    )
    if config.family == "gaussian-unrestricted":
        return rg, CompositeTarget(f=target.f, g=target.g, x_star=rg.mean)
    if config.family == "gaussian-box":
        g = box_potential(-config.box_halfwidth * np.ones(d), config.box_halfwidth * np.ones(d))
        target = CompositeTarget(f=target.f, g=g)
    elif config.family == "gaussian-l1":
        target = CompositeTarget(f=target.f, g=l1_potential(config.l1_alpha, d))
    result = minimize_target(target)
    if not result.converged:
        raise RuntimeError(f"minimizer search failed (residual {result.residual:.3e})")
    return rg, CompositeTarget(f=target.f, g=target.g, x_star=result.x_star)


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_csv(path: Path, header: str, rows: Iterable[Sequence]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def _config_payload(config: ExperimentConfig, resolved: dict) -> dict:
    payload = asdict(config)
    payload["out_dir"] = str(config.out_dir)
    payload["resolved"] = resolved
    return payload


def write_sidecar(path: Path, config: ExperimentConfig, resolved: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_config_payload(config, resolved), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def load_config(path: Path, **overrides) -> ExperimentConfig:
    """Rebuild an ExperimentConfig from a sidecar or hand-written JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    data.pop("resolved", None)
    for key in ("seeds", "dims", "algorithms"):
        if data.get(key) is not None:
            data[key] = tuple(data[key])
    return ExperimentConfig.from_mapping(data, **overrides)


def _params_for(
    config: ExperimentConfig, f, d: int, default_k: Optional[int] = None
) -> SamplerParams:
    eta = config.resolved_eta(d)
    k = config.k_iters if config.k_iters is not None else default_k
    return resolve_params(
        f,
        config.epsilon,
        eta=eta,
        k_iters=k,
        loop_constant=config.loop_constant,
        paper_faithful=config.paper_faithful,
    )


def run_verify(config: ExperimentConfig) -> list[Path]:
    """Composite sampler versus naive rejection on random 2-D projections."""
    d = config.resolved_dim()
    if d > 15:
        raise ValueError(f"verify requires d <= 15 (rejection feasibility), got {d}")
    n = config.resolved_n_samples()
    seed = config.seeds[0]

    rg, target = family_target(
        replace(config, family="gaussian-orthant"), d, derive_rng(seed, _TAG_TARGET)
    )
    f, g, x_star = prepare_shared_min(target)
    k_default = 500 if config.k_iters is None else config.k_iters
    params = _params_for(config, f, d, default_k=k_default)

    rng_c = derive_rng(seed, _TAG_COMPOSITE)
    stats = SamplerStats()
    composite = np.empty((n, d))
    for i in range(n):
        composite[i] = sample_composite_shared_min(
            f, g, x_star, config.epsilon, rng_c, params=params, stats=stats
        )

    rejection = naive_rejection(rg, n, derive_rng(seed, _TAG_REJECTION), config.trials_budget)
    if not rejection.completed:
        raise RuntimeError(
            f"naive rejection exhausted its {config.trials_budget} trial budget "
            f"({rejection.samples.shape[0]}/{n} samples)"
        )

    rng_p = derive_rng(seed, _TAG_PROJECTION)
    out = []
    ks_rows = []
    for j in range(config.n_projections):
        pair = rng_p.standard_normal((d, 2))
        pair /= np.linalg.norm(pair, axis=0)
        comp_proj = composite @ pair
        rej_proj = rejection.samples @ pair
        out.append(
            write_csv(
                config.out_dir / f"verify_composite_pair{j}.csv",
                "u,v",
                comp_proj,
            )
        )
        out.append(
            write_csv(
                config.out_dir / f"verify_rejection_pair{j}.csv",
                "u,v",
                rej_proj,
            )
        )
        for axis in range(2):
            ks_rows.append(
                (j, axis, ks_two_sample(comp_proj[:, axis], rej_proj[:, axis]))
            )
    out.append(write_csv(config.out_dir / "verify_ks.csv", "pair,axis,ks", ks_rows))
    out.append(
        write_sidecar(
            config.out_dir / "params.json",
            config,
            {
                "dim": d,
                "n_samples": n,
                "eta": params.eta,
                "k_iters": params.k_iters,
                "epsilon": config.epsilon,
                "rejection_trials": rejection.trials,
                "gradient_calls": stats.gradient_calls,
                "oracle_calls": stats.oracle_calls,
            },
        )
    )
    return out


def _scaling_instance(config: ExperimentConfig, d: int, seed: int):
    """The (d, seed)-keyed instance shared by all algorithms: fixed mean 0."""
    rng = derive_rng(seed, _TAG_TARGET, d)
    rg, target = random_gaussian_target(
        d,
        config.kappa,
        config.smoothness,
        config.mean_range,
        rng,
        mean=np.zeros(d),
        diagonal=config.diagonal,
    )
    # mean 0 lies on the orthant boundary and minimizes f, so x* = 0 exactly
    return rg, CompositeTarget(f=target.f, g=target.g, x_star=np.zeros(d))


def _scaling_task(args: tuple[ExperimentConfig, str, int, int]) -> tuple:
    config, algo, d, seed = args
    rg, target = _scaling_instance(config, d, seed)
    stats = SamplerStats()
    if algo == "composite":
        f, g, x_star = prepare_shared_min(target)
        params = _params_for(config, f, d, default_k=config.max_steps)

        def factory():
            return joint_chain_steps(
                f, g, x_star, params, derive_rng(seed, _TAG_COMPOSITE, d), stats=stats
            )

    elif algo == "hitandrun":

        def factory():
            return hit_and_run_chain(
                rg, initial_interior_point(rg), derive_rng(seed, _TAG_HITANDRUN, d)
            )

    else:
        raise ValueError(f"scaling supports composite and hitandrun, got {algo!r}")

    t0 = time.perf_counter()
    steps = mixing_time(
        factory,
        ess_threshold=10.0,
        step_block=config.step_block,
        max_steps=config.max_steps,
    )
    wall_ms = (time.perf_counter() - t0) * 1e3
    return (algo, d, seed, steps, wall_ms, stats.gradient_calls, stats.oracle_calls)


def run_scaling(config: ExperimentConfig) -> list[Path]:
    """Mixing steps (min-coordinate ESS > 10) versus dimension, per algorithm and seed."""
    dims = config.resolved_dims()
    if not dims:
        raise ValueError("scaling needs a nonempty dimension grid")
    algos = [a for a in config.algorithms if a != "rejection"]
    tasks = [(config, algo, d, seed) for algo in algos for d in dims for seed in config.seeds]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(_scaling_task, tasks))
    else:
        rows = [_scaling_task(t) for t in tasks]
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    out = [write_csv(config.out_dir / "scaling.csv", SCALING_HEADER, rows)]
    out.append(
        write_sidecar(
            config.out_dir / "params.json",
            config,
            {"dims": list(dims), "algorithms": algos},
        )
    )
    return out


def run_autocorr(config: ExperimentConfig) -> list[Path]:
    """Trajectory autocorrelation of each algorithm on one shared instance."""
    d = config.resolved_dim()
    n_steps = config.resolved_n_samples()
    seed = config.seeds[0]
    rg, target = family_target(
        replace(config, family="gaussian-orthant"), d, derive_rng(seed, _TAG_TARGET)
    )
    direction = derive_rng(seed, _TAG_PROJECTION).standard_normal(d)
    direction /= np.linalg.norm(direction)
    burn = n_steps // 10
    max_lag = min(config.max_lag, (n_steps - burn) // 2)

    out = []
    resolved: dict = {"dim": d, "steps": n_steps, "max_lag": max_lag}
    for algo in config.algorithms:
        if algo == "composite":
            f, g, x_star = prepare_shared_min(target)
            params = _params_for(config, f, d, default_k=n_steps)
            chain = joint_chain_steps(
                f, g, x_star, params, derive_rng(seed, _TAG_COMPOSITE)
            )
            resolved["eta"] = params.eta
        elif algo == "hitandrun":
            chain = hit_and_run_chain(
                rg, initial_interior_point(rg), derive_rng(seed, _TAG_HITANDRUN)
            )
        else:
            continue
        series = np.fromiter(
            (float(direction @ next(chain)) for _ in range(n_steps)),
            dtype=float,
            count=n_steps,
        )
        rho = autocorrelation(series[burn:], max_lag)
        out.append(
            write_csv(
                config.out_dir / f"autocorr_{algo}.csv",
                "lag,autocorrelation",
                list(enumerate(rho)),
            )
        )
    out.append(write_sidecar(config.out_dir / "params.json", config, resolved))
    return out


def run_sample(config: ExperimentConfig) -> list[Path]:
    """Draw n samples from a built-in family and record resolved parameters."""
    d = config.resolved_dim()
    n = config.resolved_n_samples()
    seed = config.seeds[0]
    _, target = family_target(config, d, derive_rng(seed, _TAG_TARGET))
    f, g, x_star = prepare_shared_min(target)
    params = _params_for(config, f, d)

    rng = derive_rng(seed, _TAG_COMPOSITE)
    stats = SamplerStats()
    samples = np.empty((n, d))
    for i in range(n):
        samples[i] = sample_composite_shared_min(
            f, g, x_star, config.epsilon, rng, params=params, stats=stats
        )
    header = ",".join(f"x{i}" for i in range(d))
    out = [write_csv(config.out_dir / "samples.csv", header, samples)]
    out.append(
        write_sidecar(
            config.out_dir / "params.json",
            config,
            {
                "dim": d,
                "n_samples": n,
                "eta": params.eta,
                "k_iters": params.k_iters,
                "loop_constant": params.loop_constant,
                "epsilon": params.epsilon,
                "seeds": list(config.seeds),
                "gradient_calls": stats.gradient_calls,
                "oracle_calls": stats.oracle_calls,
            },
        )
    )
    return out


RUNNERS = {
    "verify": run_verify,
    "scaling": run_scaling,
    "autocorr": run_autocorr,
    "sample": run_sample,
}


def run_experiment(config: ExperimentConfig) -> list[Path]:
    return RUNNERS[config.experiment](config)
