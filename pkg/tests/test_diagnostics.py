import numpy as np
import pytest

from compsamp.diagnostics import (
    DegenerateSeriesError,
    QuadratureError,
    _moments_once,
    autocorrelation,
    ess,
    ess_report,
    ks_against_cdf,
    ks_two_sample,
    mixing_time,
    quadrature_1d,
    quadrature_cdf,
)

# Regression constants for exp(-x^2/2 - |x - 1|) on [-12, 12], frozen from
# 40-digit quadrature during development.
_REG_LOG_Z = 0.015624112544138532
_REG_MEAN = 0.4967774354352866
_REG_VAR = 0.5589565729504169


def _ar1(rho: float, n: int, rng) -> np.ndarray:
    noise = rng.standard_normal(n) * np.sqrt(1.0 - rho * rho)
    out = np.empty(n)
    out[0] = rng.standard_normal()
    for t in range(1, n):
        out[t] = rho * out[t - 1] + noise[t]
    return out


def test_autocorrelation_lag0_is_one(rng):
    x = rng.standard_normal(100)
    rho = autocorrelation(x, 10)
    assert rho[0] == pytest.approx(1.0)
    assert rho.shape == (11,)


def test_autocorrelation_iid_noise_bound(rng):
    x = rng.standard_normal(100_000)
    rho = autocorrelation(x, 50)
    assert np.all(np.abs(rho[1:]) <= 0.02)


def test_autocorrelation_ar1_decay(rng):
    x = _ar1(0.9, 100_000, rng)
    rho = autocorrelation(x, 20)
    expected = 0.9 ** np.arange(21)
    assert np.all(np.abs(rho - expected) <= 0.05)


def test_autocorrelation_reversed_series(rng):
    x = rng.standard_normal(2000)
    fwd = autocorrelation(x, 100)
    bwd = autocorrelation(x[::-1], 100)
    assert np.allclose(fwd, bwd, rtol=1e-12, atol=1e-12)


def test_autocorrelation_degenerate():
    with pytest.raises(DegenerateSeriesError):
        autocorrelation(np.ones(100), 5)
    with pytest.raises(ValueError):
        autocorrelation(np.arange(10.0), 10)


def test_ess_iid(rng):
    x = rng.standard_normal(10_000)
    val = ess(x)
    assert 8_000 <= val <= 12_000


def test_ess_ar1(rng):
    # AR(1) with coefficient rho has ESS ~= N*(1-rho)/(1+rho)
    x = _ar1(0.5, 10_000, rng)
    val = ess(x)
    expected = 10_000 / 3.0
    assert abs(val - expected) <= 0.2 * expected


def test_ess_antithetic_clamped(rng):
    x = np.tile([1.0, -1.0], 5000) + 1e-6 * rng.standard_normal(10_000)
    assert ess(x) == pytest.approx(10_000)


def test_ess_scale_shift_invariance(rng):
    x = _ar1(0.7, 5000, rng)
    base = ess(x)
    # power-of-two scaling is lossless in floats: exact equality
    assert ess(2.0 * x) == base
    # general affine map: invariant to float roundoff
    assert ess(3.7 * x - 11.9) == pytest.approx(base, rel=1e-12)


def test_ess_degenerate():
    with pytest.raises(DegenerateSeriesError):
        ess(np.zeros(100))


def test_ess_report_min(rng):
    fast = rng.standard_normal(4000)
    slow = _ar1(0.95, 4000, rng)
    report = ess_report(np.column_stack([fast, slow]))
    assert report.ess_per_coordinate.shape == (2,)
    assert report.min_ess == pytest.approx(report.ess_per_coordinate.min())
    assert report.ess_per_coordinate[1] < report.ess_per_coordinate[0]
    assert np.all(report.lags_used >= 0)


def test_mixing_time_iid_immediate(rng):
    def factory():
        while True:
            yield rng.standard_normal(2)

    assert mixing_time(lambda: factory(), step_block=100, max_steps=2000) == 100


def test_mixing_time_ar1(rng):
    # tau = (1+rho)/(1-rho) = 199, so ESS > 10 near 10*tau ~ 2000 steps
    def factory():
        state = 0.0
        scale = np.sqrt(1.0 - 0.99**2)
        while True:
            state = 0.99 * state + scale * rng.standard_normal()
            yield np.array([state])

    steps = mixing_time(lambda: factory(), step_block=100, max_steps=20_000)
    assert 1000 <= steps <= 3000


def test_mixing_time_flags_failure(rng):
    # threshold above the ESS clamp (N) can never be met within max_steps
    def factory():
        while True:
            yield rng.standard_normal(1)

    assert (
        mixing_time(lambda: factory(), ess_threshold=1000.0, step_block=100, max_steps=500)
        == -1
    )


def test_ks_identical_and_disjoint():
    a = np.array([1.0, 2.0, 3.0])
    assert ks_two_sample(a, a) == pytest.approx(0.0)
    assert ks_two_sample(a, a + 100.0) == pytest.approx(1.0)


def test_ks_null_frequency(rng):
    hits = 0
    for _ in range(200):
        a = rng.standard_normal(3000)
        b = rng.standard_normal(3000)
        if ks_two_sample(a, b) < 0.05:
            hits += 1
    assert hits >= 190


def test_quadrature_standard_normal():
    log_z, mean, var = quadrature_1d(lambda x: -0.5 * x * x, -10.0, 10.0)
    assert log_z == pytest.approx(0.5 * np.log(2 * np.pi), abs=1e-9)
    assert mean == pytest.approx(0.0, abs=1e-9)
    assert var == pytest.approx(1.0, abs=1e-9)


def test_quadrature_half_normal_mean():
    _, mean, _ = quadrature_1d(lambda x: -0.5 * x * x, 0.0, 10.0)
    assert mean == pytest.approx(np.sqrt(2.0 / np.pi), abs=1e-9)


def test_quadrature_frozen_regression():
    log_z, mean, var = quadrature_1d(
        lambda x: -0.5 * x * x - np.abs(x - 1.0), -12.0, 12.0
    )
    assert log_z == pytest.approx(_REG_LOG_Z, abs=1e-9)
    assert mean == pytest.approx(_REG_MEAN, abs=1e-9)
    assert var == pytest.approx(_REG_VAR, abs=1e-9)


def test_quadrature_doubling_order():
    # panel doubling must cut the error at least quadratically until the
    # precision floor
    truth = 0.5 * np.log(2 * np.pi)
    errs = []
    for panels in (1, 2, 4):
        log_z, _, _ = _moments_once(lambda x: -0.5 * x * x, -8.0, 8.0, panels)
        errs.append(abs(log_z - truth))
    for coarse, fine in zip(errs, errs[1:]):
        assert fine <= coarse / 4.0 or fine < 1e-13


def test_quadrature_rejects_zero_mass():
    with pytest.raises(QuadratureError):
        quadrature_1d(lambda x: np.full_like(x, -np.inf), 0.0, 1.0)


def test_quadrature_cdf_matches_normal():
    from scipy.special import ndtr

    cdf = quadrature_cdf(lambda x: -0.5 * x * x, -10.0, 10.0)
    xs = np.linspace(-4, 4, 41)
    assert np.all(np.abs(cdf(xs) - ndtr(xs)) < 1e-10)


def test_ks_against_cdf_uniform(rng):
    cdf = lambda x: np.clip(x, 0.0, 1.0)  # noqa: E731
    d = ks_against_cdf(rng.random(5000), cdf)
    assert d < 0.03
