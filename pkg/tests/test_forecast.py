import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gvar.errors import ConfigurationError, DegenerateInputError, DomainError, RangeError
from gvar.estimation import sigma_bounds_overlapping
from gvar.forecast import (
    ModelSpec,
    VarForecast,
    fit_ar1,
    g_var_forecast,
    g_var_path,
    rolling_forecast,
)
from gvar.gnormal import GNormalParams, g_var
from gvar.synthetic import regime_switching_returns
from oracles import norm_ppf


def simulate_ar1(a, n, seed):
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(n + 200)
    x = np.zeros_like(e)
    for i in range(1, len(e)):
        x[i] = a * x[i - 1] + e[i]
    return x[200:]


class TestFitAr1:
    def test_recovers_coefficient(self):
        assert fit_ar1(simulate_ar1(0.5, 1000, seed=3)) == pytest.approx(0.5, abs=0.06)

    def test_white_noise(self):
        x = np.random.default_rng(8).standard_normal(1000)
        assert abs(fit_ar1(x)) <= 0.07

    def test_constant_series_rejected(self):
        with pytest.raises(DegenerateInputError):
            fit_ar1(np.full(100, 0.3))

    def test_short_window_rejected(self):
        with pytest.raises(RangeError):
            fit_ar1(np.ones(10))

    def test_matches_lstsq_without_intercept(self, rng):
        x = rng.standard_normal(300)
        coef, *_ = np.linalg.lstsq(x[:-1, None], x[1:], rcond=None)
        assert fit_ar1(x) == pytest.approx(coef[0], rel=1e-12)


def test_injected_bounds_give_quantile_example():
    # a window whose sub-window variances are exactly 0.25 and 1.0
    x = np.concatenate([np.full(10, 0.5), np.full(10, 1.0)])
    fc = g_var_forecast(x, t=19, W=20, W0=10, alpha=0.05)
    assert fc.params_snapshot.sigma2_lo == pytest.approx(0.25)
    assert fc.params_snapshot.sigma2_hi == pytest.approx(1.0)
    assert fc.var_value == pytest.approx(1.78046, abs=5e-6)


def test_iid_normal_close_to_normal_var():
    x = np.random.default_rng(21).standard_normal(3000)
    fc = g_var_forecast(x, t=2999, W=2000, W0=1000, alpha=0.01)
    assert fc.var_value == pytest.approx(-norm_ppf(0.01), abs=0.25)


def test_forecast_record_validates():
    with pytest.raises(DomainError):
        VarForecast(0, 0.01, math.nan, "g_var")
    with pytest.raises(DomainError):
        VarForecast(0, 1.5, 1.0, "g_var")


def test_model_spec_validates():
    with pytest.raises(ConfigurationError):
        ModelSpec("g_var")
    with pytest.raises(ConfigurationError):
        ModelSpec("nope", W0=5)
    with pytest.raises(ConfigurationError):
        ModelSpec("g_var", W0=5, mode="ma2")


def test_ar1_forecast_adds_conditional_mean(rng):
    x = simulate_ar1(0.4, 400, seed=5)
    fc = g_var_forecast(x, t=399, W=300, W0=50, alpha=0.05, mode="ar1")
    window = x[100:400]
    a = fit_ar1(window)
    resid = window[1:] - a * window[:-1]
    b = sigma_bounds_overlapping(resid, len(resid) - 1, len(resid), 50)
    expected = -(a * x[399]) + g_var(0.05, GNormalParams(b.sigma_lo, b.sigma_hi))
    assert fc.ar1_coef == pytest.approx(a)
    assert fc.var_value == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("mode", ["raw", "ar1"])
def test_path_matches_pointwise(mode):
    x = regime_switching_returns(900, (0.5, 1.0), 100, seed=4)
    W, W0 = 300, 40
    path = g_var_path(x, W, W0, 0.01, mode=mode)
    assert len(path) == len(x) - W
    for k in (0, 1, 137, len(path) - 1):
        fc = g_var_forecast(x, W - 1 + k, W, W0, 0.01, mode=mode)
        assert path[k] == pytest.approx(fc.var_value, rel=1e-10, abs=1e-12)


def test_rolling_count_and_order():
    x = np.random.default_rng(1).standard_normal(52)
    out = rolling_forecast(x, 50, 0.05, ModelSpec("g_var", W0=10))
    assert len(out) == 2
    assert [f.t_index for f in out] == [49, 50]


def test_rolling_needs_history():
    with pytest.raises(RangeError):
        rolling_forecast(np.ones(50), 50, 0.05, ModelSpec("g_var", W0=10))


def test_rolling_is_deterministic():
    x = regime_switching_returns(1500, (0.5, 1.0), 250, seed=9)
    spec = ModelSpec("g_var", W0=60)
    a = [f.var_value for f in rolling_forecast(x, 500, 0.01, spec)]
    b = [f.var_value for f in rolling_forecast(x.copy(), 500, 0.01, spec)]
    assert a == b


def test_regime_shift_raises_forecasts():
    rng = np.random.default_rng(77)
    x = np.concatenate([0.5 * rng.standard_normal(600), 2.0 * rng.standard_normal(200)])
    path = g_var_path(x, 300, 50, 0.01)
    before = path[: 600 - 300].mean()
    after = path[600 - 300 + 60 :].mean()
    assert after > before


@pytest.mark.parametrize("c", [0.1, 2.0, 10.0])
def test_positive_homogeneity(c):
    x = regime_switching_returns(800, (0.5, 1.0), 100, seed=12)
    base = g_var_path(x, 200, 30, 0.01)
    scaled = g_var_path(c * x, 200, 30, 0.01)
    np.testing.assert_allclose(scaled, c * base, rtol=1e-12)


@given(st.floats(0.001, 0.3), st.floats(0.001, 0.3))
def test_monotone_in_alpha(a1, a2):
    lo_a, hi_a = sorted((a1, a2))
    x = regime_switching_returns(400, (0.5, 1.0), 50, seed=2)
    p_lo = g_var_path(x, 200, 20, lo_a)
    p_hi = g_var_path(x, 200, 20, hi_a)
    assert np.all(p_lo >= p_hi - 1e-12)


def test_wider_interval_never_lowers_var():
    base = g_var(0.01, GNormalParams(0.7, 1.0))
    assert g_var(0.01, GNormalParams(0.5, 1.0)) >= base
    assert g_var(0.01, GNormalParams(0.7, 1.3)) >= base
