import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gvar.errors import CalibrationError, ConfigurationError, DegenerateInputError, RangeError
from gvar.estimation import (
    calibrate_w0,
    default_candidates,
    overlapping_bounds_path,
    rolling_variance,
    rolling_variances,
    sigma_bounds_disjoint,
    sigma_bounds_overlapping,
    worker_count,
)
from gvar.synthetic import regime_switching_returns


def brute_variance(x, s, w0):
    total = 0.0
    for j in range(1, w0 + 1):
        total += x[s - j + 1] ** 2
    return total / w0


def brute_bounds(x, t, W, W0, disjoint=False):
    shifts = range(0, (W // W0) * W0, W0) if disjoint else range(0, W - W0 + 1)
    v = [brute_variance(x, t - s, W0) for s in shifts]
    return min(v), max(v)


@st.composite
def series_and_windows(draw, max_len=200):
    n = draw(st.integers(4, max_len))
    x = draw(arrays(np.float64, n, elements=st.floats(-10, 10)))
    x = np.where(np.abs(x) < 1e-3, 1.0, x)
    W = draw(st.integers(2, n))
    W0 = draw(st.integers(1, W))
    t = draw(st.integers(W - 1, n - 1))
    return x, t, W, W0


def test_rolling_variance_examples():
    assert rolling_variance(np.full(20, 1.5), 10, 7) == pytest.approx(2.25, rel=1e-15)
    assert rolling_variance([1, -1, 1, -1], 3, 4) == 1.0


def test_rolling_variance_against_loop(rng):
    x = rng.standard_normal(500) * 3
    for s, w0 in [(99, 100), (499, 37), (250, 1), (400, 400)]:
        assert rolling_variance(x, s, w0) == pytest.approx(brute_variance(x, s, w0), rel=1e-14)
    v = rolling_variances(x, 37)
    ref = np.array([brute_variance(x, s, 37) for s in range(36, 500)])
    np.testing.assert_allclose(v, ref, rtol=1e-14)


def test_rolling_variance_range_errors():
    with pytest.raises(RangeError):
        rolling_variance(np.ones(10), 3, 5)
    with pytest.raises(RangeError):
        rolling_variance(np.ones(10), 10, 5)


@given(series_and_windows())
def test_bounds_match_enumeration(case):
    x, t, W, W0 = case
    over = sigma_bounds_overlapping(x, t, W, W0)
    lo, hi = brute_bounds(x, t, W, W0)
    assert over.sigma2_lo == pytest.approx(lo, rel=1e-12)
    assert over.sigma2_hi == pytest.approx(hi, rel=1e-12)
    dis = sigma_bounds_disjoint(x, t, W, W0)
    lo, hi = brute_bounds(x, t, W, W0, disjoint=True)
    assert dis.sigma2_lo == pytest.approx(lo, rel=1e-12)
    assert dis.sigma2_hi == pytest.approx(hi, rel=1e-12)


@given(series_and_windows())
def test_ordering_chain(case):
    x, t, W, W0 = case
    over = sigma_bounds_overlapping(x, t, W, W0)
    dis = sigma_bounds_disjoint(x, t, W, W0)
    assert over.sigma2_lo <= dis.sigma2_lo <= dis.sigma2_hi <= over.sigma2_hi
    assert over.method == "overlapping" and dis.method == "disjoint"


def test_constant_series_bounds():
    x = np.full(300, -0.8)
    for fn in (sigma_bounds_overlapping, sigma_bounds_disjoint):
        b = fn(x, 299, 250, 30)
        assert b.sigma2_lo == pytest.approx(0.64, rel=1e-14)
        assert b.sigma2_hi == pytest.approx(0.64, rel=1e-14)


def test_single_window_methods_coincide(rng):
    x = rng.standard_normal(400)
    a = sigma_bounds_overlapping(x, 399, 120, 120)
    b = sigma_bounds_disjoint(x, 399, 120, 120)
    assert (a.sigma2_lo, a.sigma2_hi) == (b.sigma2_lo, b.sigma2_hi)
    assert a.sigma2_lo == a.sigma2_hi


def test_two_regime_recovery():
    W, W0, reps = 1000, 100, 100
    los, his = [], []
    for seed in range(reps):
        r = np.random.default_rng(seed)
        x = np.concatenate([r.standard_normal(W // 2), 2.0 * r.standard_normal(W // 2)])
        b = sigma_bounds_overlapping(x, W - 1, W, W0)
        los.append(b.sigma2_lo)
        his.append(b.sigma2_hi)
    se = np.sqrt(2.0 / W0)  # sd of a W0-window variance relative to its level
    assert abs(np.mean(los) - 1.0) <= 4 * se
    assert abs(np.mean(his) - 4.0) <= 4 * 4.0 * se
    assert np.mean(los) < 1.0 < 4.0 < np.mean(his)


@given(series_and_windows(max_len=120), st.integers(2, 6))
def test_divisor_window_widens_interval(case, m):
    x, t, W, W0 = case
    small = W0
    large = m * W0
    if large > W:
        return
    a = sigma_bounds_overlapping(x, t, W, small)
    b = sigma_bounds_overlapping(x, t, W, large)
    assert a.sigma2_lo <= b.sigma2_lo * (1 + 1e-12)
    assert a.sigma2_hi >= b.sigma2_hi * (1 - 1e-12)


@given(series_and_windows(), st.sampled_from([0.1, 0.5, 2.0, 10.0]))
def test_scale_equivariance(case, c):
    x, t, W, W0 = case
    b = sigma_bounds_overlapping(x, t, W, W0)
    bc = sigma_bounds_overlapping(c * x, t, W, W0)
    assert bc.sigma2_lo == pytest.approx(c * c * b.sigma2_lo, rel=1e-13)
    assert bc.sigma2_hi == pytest.approx(c * c * b.sigma2_hi, rel=1e-13)


def test_errors():
    x = np.ones(50)
    with pytest.raises(RangeError):
        sigma_bounds_overlapping(x, 10, 20, 5)
    with pytest.raises(RangeError):
        sigma_bounds_overlapping(x, 49, 20, 25)
    with pytest.raises(DegenerateInputError):
        sigma_bounds_overlapping(np.zeros(50), 49, 20, 5)
    with pytest.raises(DegenerateInputError):
        sigma_bounds_disjoint(np.concatenate([np.ones(30), np.zeros(20)]), 49, 40, 10)


def test_vectorised_path_matches_scalar(rng):
    x = rng.standard_normal(600) * np.repeat([0.5, 2.0, 1.0], 200)
    lo, hi = overlapping_bounds_path(x, 150, 40)
    for k, t in enumerate(range(149, 600)):
        b = sigma_bounds_overlapping(x, t, 150, 40)
        assert lo[k] == pytest.approx(b.sigma2_lo, rel=1e-13)
        assert hi[k] == pytest.approx(b.sigma2_hi, rel=1e-13)


def test_default_candidates():
    assert default_candidates(100, 0.05)[:3] == [5, 10, 15]
    assert default_candidates(100, 0.01)[0] == 20
    assert default_candidates(100, 0.01)[-1] == 100


@pytest.fixture(scope="module")
def gaussian_12k():
    return np.random.default_rng(2024).standard_normal(12_000)


def test_calibration_on_gaussian_data(gaussian_12k):
    res = calibrate_w0(gaussian_12k, 500, 0.05)
    assert res.w0_star in dict(res.grid)
    assert abs(dict(res.grid)[res.w0_star] - 0.05) <= 0.01
    assert res.deviation == pytest.approx(min(abs(r - 0.05) for _, r in res.grid))
    assert res.span == (0, 12_000 - 500)


def test_calibration_is_deterministic_and_thread_independent(gaussian_12k, monkeypatch):
    grid = list(range(20, 501, 40))
    a = calibrate_w0(gaussian_12k, 500, 0.01, candidates=grid, threads=1)
    b = calibrate_w0(gaussian_12k, 500, 0.01, candidates=grid, threads=4)
    monkeypatch.setenv("GVAR_THREADS", "3")
    c = calibrate_w0(gaussian_12k, 500, 0.01, candidates=grid)
    assert a == b == c


def test_calibration_tie_break_prefers_smallest():
    def flat_forecaster(r, W, W0, alpha):
        return np.full(len(r) - W, 1e9)  # never violated: every candidate ties

    x = np.random.default_rng(0).standard_normal(2000)
    res = calibrate_w0(x, 200, 0.01, candidates=[60, 40, 80], forecaster=flat_forecaster, band=1.0)
    assert res.w0_star == 40
    assert [w for w, _ in res.grid] == [40, 60, 80]


def test_calibration_failure_on_trend():
    x = np.full(2000, 0.05)
    with pytest.raises(CalibrationError) as info:
        calibrate_w0(x, 500, 0.01)
    assert info.value.result is not None
    assert not info.value.result.accepted


def test_calibration_split_mode(gaussian_12k):
    res = calibrate_w0(gaussian_12k, 500, 0.05, candidates=range(50, 501, 50), split=0.5)
    assert res.span == (0, 5750)
    assert res.holdout_rate is not None
    assert abs(res.holdout_rate - 0.05) < 0.02


def test_calibration_guards(gaussian_12k):
    with pytest.raises(ConfigurationError):
        calibrate_w0(gaussian_12k[:900], 500, 0.05)  # 400 forecastable dates < 500
    with pytest.raises(ConfigurationError):
        calibrate_w0(gaussian_12k, 500, 0.05, candidates=[600])
    with pytest.raises(ConfigurationError):
        calibrate_w0(gaussian_12k, 500, 0.05, span=(0, 20_000))


def test_worker_count(monkeypatch):
    monkeypatch.setenv("GVAR_THREADS", "2")
    assert worker_count() == 2
    monkeypatch.setenv("GVAR_THREADS", "0")
    assert worker_count() >= 1
    monkeypatch.setenv("GVAR_THREADS", "lots")
    with pytest.raises(ConfigurationError):
        worker_count()


def test_regime_data_helper():
    x = regime_switching_returns(1000, sigmas=(0.5, 1.0), block=250, seed=3)
    assert np.std(x[:250]) < np.std(x[250:500])
