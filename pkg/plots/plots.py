#!/usr/bin/env python3
"""Regenerate benchmark figures from compsamp CSV artifacts.

Three commands, one per figure family:

    plots.py scaling  --in scaling.csv --out scaling.png [--log-d]
    plots.py autocorr --in autocorr_composite.csv,autocorr_hitandrun.csv --out ac.png
    plots.py hist2d   --in <verify output dir> --out hist.png

This package reads only the documented CSV schemas and never recomputes
statistics; the benchmark harness is the single source of truth.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

SCALING_COLUMNS = (
    "algorithm",
    "d",
    "seed",
    "mixing_steps",
    "wall_ms",
    "gradient_calls",
    "oracle_calls",
)
AUTOCORR_COLUMNS = ("lag", "autocorrelation")
PROJECTION_COLUMNS = ("u", "v")


class SchemaError(ValueError):
    """A CSV file does not match its documented schema."""


def _read_csv(path: Path, expected: tuple[str, ...]) -> dict[str, np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    for column in expected:
        if column not in header:
            raise SchemaError(f"{path}: missing column {column!r} (header: {header})")
    out: dict[str, np.ndarray] = {}
    for j, name in enumerate(header):
        values = [row[j] for row in rows]
        try:
            out[name] = np.array([float(v) for v in values])
        except ValueError:
            out[name] = np.array(values)
    return out


def plot_scaling(csv_path: Path, out_png: Path, log_d: bool = False):
    """Seed-averaged mixing steps versus dimension, one line per algorithm.

    Error bars are the standard deviation across seeds.  Rows flagged as
    unmixed (mixing_steps < 0) are excluded from the averages and counted
    in the caption.
    """
    data = _read_csv(csv_path, SCALING_COLUMNS)
    ok = data["mixing_steps"] >= 0
    excluded = int(np.sum(~ok))
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for algo in sorted(set(data["algorithm"])):
        mask = ok & (data["algorithm"] == algo)
        dims = sorted(set(data["d"][mask]))
        means = [data["mixing_steps"][mask & (data["d"] == d)].mean() for d in dims]
        stds = [data["mixing_steps"][mask & (data["d"] == d)].std() for d in dims]
        ax.errorbar(dims, means, yerr=stds, marker="o", capsize=3, label=str(algo))
    if log_d:
        ax.set_xscale("log")
    ax.set_xlabel("dimension d")
    ax.set_ylabel("steps to min-coordinate ESS > 10")
    ax.set_title("Mixing steps versus dimension")
    ax.legend()
    if excluded:
        fig.text(
            0.5,
            0.01,
            f"excluded {excluded} unmixed run(s) that hit the step budget",
            ha="center",
            fontsize=8,
        )
    fig.tight_layout()
    fig.savefig(out_png, dpi=110)
    plt.close(fig)
    return out_png


def plot_autocorr(csv_paths: list[Path], out_png: Path):
    """Autocorrelation curves, one per input file, lag on the x-axis."""
    if not csv_paths:
        raise ValueError("autocorr needs at least one CSV file")
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for path in csv_paths:
        data = _read_csv(path, AUTOCORR_COLUMNS)
        label = path.stem.replace("autocorr_", "")
        ax.plot(data["lag"], data["autocorrelation"], label=label)
    ax.set_xlabel("lag")
    ax.set_ylabel("autocorrelation")
    ax.set_title("Projected trajectory autocorrelation")
    ax.axhline(0.0, color="gray", linewidth=0.6)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_png, dpi=110)
    plt.close(fig)
    return out_png


def _discover_pairs(in_dir: Path) -> list[tuple[Path, Path]]:
    pairs = []
    for comp in sorted(in_dir.glob("verify_composite_pair*.csv")):
        rej = in_dir / comp.name.replace("composite", "rejection")
        if not rej.exists():
            raise SchemaError(f"missing rejection file for {comp.name}")
        pairs.append((comp, rej))
    return pairs


def plot_hist2d(in_dir: Path, out_png: Path, bins: int = 40):
    """2-D histograms of the projected samples: top row composite, bottom rejection."""
    pairs = _discover_pairs(Path(in_dir))
    if not pairs:
        raise ValueError(f"no verify projection CSVs found in {in_dir}")
    n = len(pairs)
    fig, axes = plt.subplots(2, n, figsize=(2.4 * n, 5.0), squeeze=False)
    for j, (comp_path, rej_path) in enumerate(pairs):
        comp = _read_csv(comp_path, PROJECTION_COLUMNS)
        rej = _read_csv(rej_path, PROJECTION_COLUMNS)
        lo_u = min(comp["u"].min(), rej["u"].min())
        hi_u = max(comp["u"].max(), rej["u"].max())
        lo_v = min(comp["v"].min(), rej["v"].min())
        hi_v = max(comp["v"].max(), rej["v"].max())
        rng = [[lo_u, hi_u], [lo_v, hi_v]]
        axes[0][j].hist2d(comp["u"], comp["v"], bins=bins, range=rng)
        axes[1][j].hist2d(rej["u"], rej["v"], bins=bins, range=rng)
        for row in (0, 1):
            axes[row][j].set_xticks([])
            axes[row][j].set_yticks([])
        axes[0][j].set_title(f"pair {j}", fontsize=9)
    axes[0][0].set_ylabel("composite")
    axes[1][0].set_ylabel("rejection")
    fig.suptitle("Projected 2-D histograms: composite sampler versus rejection")
    fig.tight_layout()
    fig.savefig(out_png, dpi=110)
    plt.close(fig)
    return out_png


def _paths(text: str) -> list[Path]:
    return [Path(part) for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plots.py", description=__doc__)
    sub = parser.add_subparsers(dest="kind", required=True)

    p = sub.add_parser("scaling", help="mixing steps versus dimension")
    p.add_argument("--in", dest="inputs", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--log-d", action="store_true", dest="log_d")

    p = sub.add_parser("autocorr", help="autocorrelation curves")
    p.add_argument("--in", dest="inputs", required=True, type=_paths, metavar="CSV[,CSV...]")
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("hist2d", help="projected 2-D histogram grid")
    p.add_argument("--in", dest="inputs", required=True, type=Path, metavar="VERIFY_DIR")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--bins", type=int, default=40)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.kind == "scaling":
        out = plot_scaling(args.inputs, args.out, log_d=args.log_d)
    elif args.kind == "autocorr":
        out = plot_autocorr(args.inputs, args.out)
    else:
        out = plot_hist2d(args.inputs, args.out, bins=args.bins)
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
