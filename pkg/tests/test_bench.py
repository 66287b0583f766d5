import json
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from compsamp.bench import (
    DESK_DIMS,
    PAPER_DIMS,
    SCALING_HEADER,
    ExperimentConfig,
    derive_rng,
    family_target,
    load_config,
    random_gaussian_target,
    run_autocorr,
    run_sample,
    run_scaling,
    run_verify,
)
from compsamp.cli import main as cli_main
from compsamp.diagnostics import quadrature_1d
from compsamp.optimize import minimize_target


def _cfg(**kw) -> ExperimentConfig:
    return ExperimentConfig(**kw)


def test_random_target_spectrum_and_inverse(rng):
    for d in (1, 2, 7):
        rg, target = random_gaussian_target(d, 10.0, 5.0, 0.5, rng)
        eigs = np.linalg.eigvalsh(rg.precision)
        if d >= 2:
            realized = eigs[-1] / eigs[0]
            assert realized == pytest.approx(10.0, rel=1e-10)
            assert 5.0 <= realized <= 10.0 * (1 + 1e-9)
        assert np.allclose(rg.precision, rg.precision.T, atol=1e-12)
        cov = rg.covariance_factor @ rg.covariance_factor.T
        assert np.allclose(cov @ rg.precision, np.eye(d), atol=1e-8)
        assert target.f.smoothness == pytest.approx(5.0)


def test_random_target_mean_zero_override(rng):
    rg, _ = random_gaussian_target(4, 10.0, 5.0, 0.5, rng, mean=np.zeros(4))
    assert np.all(rg.mean == 0.0)


def test_config_defaults_and_eta_rules():
    c = _cfg(experiment="autocorr")
    assert c.resolved_dim() == 100
    assert c.resolved_eta(500) == pytest.approx(0.0014)
    assert c.resolved_eta(100) == pytest.approx(0.3 / 100)
    v = _cfg(experiment="verify")
    assert v.resolved_dim() == 10
    assert v.resolved_n_samples() == 3000
    assert v.resolved_eta(10) == pytest.approx(0.01)
    s = _cfg(experiment="scaling")
    assert s.resolved_dims() == DESK_DIMS
    assert _cfg(experiment="scaling", paper_grid=True).resolved_dims() == PAPER_DIMS
    assert _cfg(experiment="sample", eta=0.2).resolved_eta(10) == pytest.approx(0.2)
    assert _cfg(experiment="sample", eta_theory=True).resolved_eta(10) is None
    # empirical default is capped to keep eta*L < 1 at tiny d
    assert _cfg(experiment="sample", smoothness=5.0).resolved_eta(1) == pytest.approx(0.18)


def test_config_validation():
    with pytest.raises(ValueError, match="unknown experiment"):
        _cfg(experiment="bogus")
    with pytest.raises(ValueError, match="kappa"):
        _cfg(experiment="sample", kappa=0.5)
    with pytest.raises(ValueError, match="seeds"):
        _cfg(experiment="sample", seeds=())
    with pytest.raises(ValueError, match="unknown target family"):
        _cfg(experiment="sample", family="gaussian-simplex")
    with pytest.raises(ValueError, match="unknown algorithm"):
        _cfg(experiment="scaling", algorithms=("composite", "walkers"))


def test_family_targets_have_valid_minimizers(rng):
    for family in ("gaussian-orthant", "gaussian-box", "gaussian-l1", "gaussian-unrestricted"):
        cfg = _cfg(experiment="sample", family=family, kappa=3.0, smoothness=2.0)
        rg, target = family_target(cfg, 4, rng)
        assert target.x_star is not None
        if target.g.prox is not None:
            res = minimize_target(target, x0=target.x_star)
            assert np.linalg.norm(res.x_star - target.x_star) < 1e-6
        assert np.isfinite(target.g.value(target.x_star))


def test_run_sample_writes_header_only_for_zero_samples(tmp_path):
    cfg = _cfg(
        experiment="sample",
        out_dir=tmp_path,
        dim=3,
        n_samples=0,
        k_iters=5,
        eta=0.1,
        kappa=2.0,
        smoothness=2.0,
    )
    paths = run_sample(cfg)
    data = Path(paths[0]).read_text().splitlines()
    assert data == ["x0,x1,x2"]
    sidecar = json.loads(Path(paths[1]).read_text())
    assert sidecar["resolved"]["n_samples"] == 0


def test_run_sample_deterministic_and_sidecar_roundtrip(tmp_path):
    base = dict(
        experiment="sample",
        dim=2,
        n_samples=40,
        k_iters=25,
        eta=0.1,
        kappa=2.0,
        smoothness=2.0,
        seeds=(77,),
    )
    p1 = run_sample(_cfg(out_dir=tmp_path / "a", **base))
    p2 = run_sample(_cfg(out_dir=tmp_path / "b", **base))
    b1 = Path(p1[0]).read_bytes()
    assert b1 == Path(p2[0]).read_bytes()
    # rerunning from the sidecar reproduces the sample file bit for bit
    cfg3 = load_config(Path(p1[1]), out_dir=tmp_path / "c")
    p3 = run_sample(cfg3)
    assert b1 == Path(p3[0]).read_bytes()


def test_run_sample_l1_mean_matches_quadrature(tmp_path):
    # theory step keeps the rejection filter active, so the draws target
    # the true composite density (not the eta-biased auxiliary one) and a
    # per-coordinate quadrature oracle applies after diagonalization
    cfg = _cfg(
        experiment="sample",
        out_dir=tmp_path,
        family="gaussian-l1",
        diagonal=True,
        dim=2,
        kappa=1.0,
        smoothness=1.0,
        l1_alpha=1.0,
        n_samples=400,
        k_iters=500,
        eta_theory=True,
        seeds=(5,),
    )
    paths = run_sample(cfg)
    rows = np.loadtxt(paths[0], delimiter=",", skiprows=1)
    # rebuild the instance to read off its diagonal precision and mean
    rg, _ = family_target(cfg, 2, derive_rng(5, 101))
    prec = np.diag(rg.precision)
    for j in range(2):
        log_density = lambda t, p=prec[j], m=rg.mean[j]: (  # noqa: E731
            -0.5 * p * (t - m) ** 2 - cfg.l1_alpha * np.abs(t)
        )
        _, mean_j, var_j = quadrature_1d(log_density, -8.0, 8.0)
        se = np.sqrt(var_j / cfg.n_samples)
        assert abs(rows[:, j].mean() - mean_j) < 3 * se


def test_run_verify_outputs(tmp_path):
    cfg = _cfg(
        experiment="verify",
        out_dir=tmp_path,
        dim=5,
        n_samples=300,
        k_iters=80,
        kappa=4.0,
        smoothness=3.0,
        seeds=(11,),
    )
    paths = run_verify(cfg)
    names = sorted(p.name for p in paths)
    assert "verify_ks.csv" in names and "params.json" in names
    comp = np.loadtxt(tmp_path / "verify_composite_pair0.csv", delimiter=",", skiprows=1)
    rej = np.loadtxt(tmp_path / "verify_rejection_pair0.csv", delimiter=",", skiprows=1)
    assert comp.shape == (300, 2) and rej.shape == (300, 2)
    ks = np.loadtxt(tmp_path / "verify_ks.csv", delimiter=",", skiprows=1)
    assert ks.shape == (10, 3)
    assert np.all(ks[:, 2] < 0.25)  # loose gate at this tiny sample size


def test_run_verify_rejects_large_dimension(tmp_path):
    with pytest.raises(ValueError, match="d <= 15"):
        run_verify(_cfg(experiment="verify", out_dir=tmp_path, dim=16))


def test_run_scaling_rows_and_determinism(tmp_path):
    cfg = _cfg(
        experiment="scaling",
        out_dir=tmp_path / "one",
        dims=(3, 5),
        seeds=(1, 2),
        kappa=2.0,
        smoothness=2.0,
        max_steps=4000,
        step_block=250,
    )
    paths = run_scaling(cfg)
    lines = Path(paths[0]).read_text().splitlines()
    assert lines[0] == SCALING_HEADER
    rows = [line.split(",") for line in lines[1:]]
    assert len(rows) == 8  # 2 algorithms x 2 dims x 2 seeds
    keys = [(r[0], int(r[1]), int(r[2])) for r in rows]
    assert keys == sorted(keys)
    assert all(int(r[3]) > 0 for r in rows)
    # determinism modulo the wall-clock column
    paths2 = run_scaling(replace(cfg, out_dir=tmp_path / "two"))
    rows2 = [line.split(",") for line in Path(paths2[0]).read_text().splitlines()[1:]]
    for a, b in zip(rows, rows2):
        assert a[:4] == b[:4] and a[5:] == b[5:]


def test_run_scaling_flags_unmixed_runs(tmp_path):
    cfg = _cfg(
        experiment="scaling",
        out_dir=tmp_path,
        dims=(40,),
        seeds=(3,),
        algorithms=("hitandrun",),
        max_steps=200,
        step_block=200,
    )
    paths = run_scaling(cfg)
    row = Path(paths[0]).read_text().splitlines()[1].split(",")
    assert int(row[3]) == -1


def test_run_autocorr_outputs_and_separation(tmp_path):
    # default-style instance, small enough for CI: composite must decorrelate
    # faster than hit-and-run at the comparison lag
    cfg = _cfg(
        experiment="autocorr",
        out_dir=tmp_path,
        dim=100,
        n_samples=6000,
        max_lag=150,
        seeds=(9,),
    )
    paths = run_autocorr(cfg)
    comp = np.loadtxt(tmp_path / "autocorr_composite.csv", delimiter=",", skiprows=1)
    har = np.loadtxt(tmp_path / "autocorr_hitandrun.csv", delimiter=",", skiprows=1)
    assert comp.shape == (151, 2) and har.shape == (151, 2)
    assert comp[0, 1] == pytest.approx(1.0) and har[0, 1] == pytest.approx(1.0)
    assert comp[100, 1] < har[100, 1]


def test_cli_sample_and_config_override(tmp_path):
    out1 = tmp_path / "cli1"
    rc = cli_main(
        [
            "sample",
            "--dim", "2",
            "--samples", "15",
            "--k-iters", "10",
            "--eta", "0.1",
            "--kappa", "2",
            "--smoothness", "2",
            "--seeds", "3",
            "--out", str(out1),
        ]
    )
    assert rc == 0
    assert (out1 / "samples.csv").exists()
    out2 = tmp_path / "cli2"
    rc = cli_main(
        ["sample", "--config", str(out1 / "params.json"), "--out", str(out2)]
    )
    assert rc == 0
    assert (out1 / "samples.csv").read_bytes() == (out2 / "samples.csv").read_bytes()


def test_cli_rejects_unknown_family(tmp_path):
    with pytest.raises(SystemExit):
        cli_main(["sample", "--family", "nonsense", "--out", str(tmp_path)])


def test_cli_flag_passthrough():
    from compsamp.cli import build_parser, config_from_args

    args = build_parser().parse_args(
        [
            "scaling",
            "--paper-grid",
            "--eta-theory",
            "--paper-faithful",
            "--loop-constant", "3.5",
            "--algo", "composite",
            "--seeds", "1,2,3",
            "--workers", "2",
        ]
    )
    cfg = config_from_args(args)
    assert cfg.paper_grid and cfg.eta_theory and cfg.paper_faithful
    assert cfg.loop_constant == 3.5
    assert cfg.resolved_dims() == PAPER_DIMS
    assert cfg.algorithms == ("composite",)
    assert cfg.seeds == (1, 2, 3)
    assert cfg.workers == 2


def test_csv_float_format_17_digits():
    from compsamp.bench import _fmt

    assert _fmt(1.0 / 3.0) == "0.33333333333333331"
    assert _fmt(3) == "3"
    assert _fmt(np.float64(2.5)) == "2.5"
    assert _fmt("composite") == "composite"


def test_scaling_supports_worker_pool(tmp_path):
    cfg = _cfg(
        experiment="scaling",
        out_dir=tmp_path / "w2",
        dims=(3,),
        seeds=(1, 2),
        kappa=2.0,
        smoothness=2.0,
        max_steps=2000,
        step_block=250,
        workers=2,
    )
    paths = run_scaling(cfg)
    serial = run_scaling(replace(cfg, out_dir=tmp_path / "w1", workers=1))
    rows_w = Path(paths[0]).read_text().splitlines()
    rows_s = Path(serial[0]).read_text().splitlines()
    assert len(rows_w) == len(rows_s) == 5
    for a, b in zip(rows_w[1:], rows_s[1:]):
        pa, pb = a.split(","), b.split(",")
        assert pa[:4] == pb[:4] and pa[5:] == pb[5:]
