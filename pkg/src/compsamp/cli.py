"""compsamp command line: run one benchmark experiment and write its CSV artifacts.

Usage:
    compsamp <verify|scaling|autocorr|sample> [--dim N] [--dims a,b,c]
        [--kappa X] [--smoothness X] [--eta X | --eta-theory] [--k-iters N]
        [--loop-constant X | --paper-faithful] [--seeds s1,s2,...]
        [--samples N] [--algo list] [--out DIR] [--paper-grid]
        [--family NAME] [--config FILE] ...

Values from ``--config FILE`` (JSON mirroring ExperimentConfig, e.g. a
``params.json`` sidecar) are applied first; explicit flags override them.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import (
    ALGORITHMS,
    FAMILIES,
    ExperimentConfig,
    load_config,
    run_experiment,
)


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part.strip())


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="compsamp",
        description="Composite-density sampling benchmarks (CSV outputs).",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name, doc in (
        ("verify", "low-dimensional agreement with naive rejection"),
        ("scaling", "mixing steps versus dimension against hit-and-run"),
        ("autocorr", "projected trajectory autocorrelation"),
        ("sample", "draw samples from a built-in target family"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", type=Path, help="JSON config file; flags override it")
        p.add_argument("--dim", type=int)
        p.add_argument("--dims", type=_int_list, help="comma list, e.g. 10,20,40")
        p.add_argument("--kappa", type=float)
        p.add_argument("--smoothness", type=float)
        p.add_argument("--mean-range", type=float, dest="mean_range")
        p.add_argument("--eta", type=float)
        p.add_argument("--eta-theory", action="store_true", default=None, dest="eta_theory")
        p.add_argument("--k-iters", type=int, dest="k_iters")
        p.add_argument("--loop-constant", type=float, dest="loop_constant")
        p.add_argument(
            "--paper-faithful", action="store_true", default=None, dest="paper_faithful"
        )
        p.add_argument("--seeds", type=_int_list, help="comma list of 64-bit seeds")
        p.add_argument("--samples", type=int, dest="n_samples")
        p.add_argument(
            "--algo",
            type=_str_list,
            dest="algorithms",
            help=f"comma subset of {{{','.join(ALGORITHMS)}}}",
        )
        p.add_argument("--out", type=Path, dest="out_dir")
        p.add_argument("--paper-grid", action="store_true", default=None, dest="paper_grid")
        p.add_argument("--family", choices=FAMILIES)
        p.add_argument("--epsilon", type=float)
        p.add_argument("--diagonal", action="store_true", default=None)
        p.add_argument("--l1-alpha", type=float, dest="l1_alpha")
        p.add_argument("--box-halfwidth", type=float, dest="box_halfwidth")
        p.add_argument("--max-steps", type=int, dest="max_steps")
        p.add_argument("--step-block", type=int, dest="step_block")
        p.add_argument("--max-lag", type=int, dest="max_lag")
        p.add_argument("--workers", type=int)
    return parser


_CONFIG_FIELDS = (
    "dim",
    "dims",
    "kappa",
    "smoothness",
    "mean_range",
    "eta",
    "eta_theory",
    "k_iters",
    "loop_constant",
    "paper_faithful",
    "seeds",
    "n_samples",
    "algorithms",
    "out_dir",
    "paper_grid",
    "family",
    "epsilon",
    "diagonal",
    "l1_alpha",
    "box_halfwidth",
    "max_steps",
    "step_block",
    "max_lag",
    "workers",
)


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {k: getattr(args, k, None) for k in _CONFIG_FIELDS}
    if args.config is not None:
        return load_config(args.config, experiment=args.experiment, **overrides)
    cleaned = {k: v for k, v in overrides.items() if v is not None}
    return ExperimentConfig(experiment=args.experiment, **cleaned)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = config_from_args(args)
    paths = run_experiment(config)
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
