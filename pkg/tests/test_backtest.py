import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from gvar.backtest import (
    BacktestReport,
    kupiec_lr_uc,
    running_violation_rate,
    summarize,
    tail_summary,
    violations,
)
from gvar.errors import AlignmentError, DomainError
from gvar.forecast import VarForecast


def const_forecasts(n, value, alpha=0.05, start=0):
    return [VarForecast(start + i, alpha, value, "g_var") for i in range(n)]


class TestViolations:
    def test_unreachable_threshold(self, rng):
        r = rng.standard_normal(101)
        _, m1 = violations(r, const_forecasts(100, 1e6))
        assert m1 == 0

    def test_always_breached(self):
        _, m1 = violations(-np.ones(11), const_forecasts(10, 0.5))
        assert m1 == 10

    def test_hand_counted(self):
        r = np.array([0.0, -2.0, 0.3, -1.1, -0.9, 1.0, -3.0, 0.0, -1.0, 0.2, 0.5])
        hits, m1 = violations(r, const_forecasts(10, 1.0))
        # r[t+1] < -1 at t+1 in {1, 3, 6}; exactly -1.0 is not a breach
        assert m1 == 3
        assert hits.tolist() == [1, 0, 1, 0, 0, 1, 0, 0, 0, 0]

    def test_alignment_error(self):
        with pytest.raises(AlignmentError):
            violations(np.zeros(10), const_forecasts(10, 1.0))
        with pytest.raises(AlignmentError):
            violations(np.zeros(10), [])


class TestRunningRate:
    def test_all_zero(self):
        assert np.all(running_violation_rate(np.zeros(50)) == 0)

    def test_alternating(self):
        rates = running_violation_rate(np.tile([1, 0], 5000))
        assert rates[-1] == 0.5
        assert abs(rates[-2] - 0.5) < 1e-3

    def test_bernoulli(self):
        hits = np.random.default_rng(3).random(10_000) < 0.01
        final = running_violation_rate(hits)[-1]
        assert abs(final - 0.01) <= 3 * math.sqrt(0.01 * 0.99 / 10_000)

    def test_empty(self):
        with pytest.raises(DomainError):
            running_violation_rate([])

    def test_tail_summary(self):
        rates = np.concatenate([np.ones(3000), np.full(10, 0.02)])
        mean, std = tail_summary(rates)
        assert mean == pytest.approx(0.02) and std == pytest.approx(0.0)
        assert tail_summary(np.ones(100)) == (None, None)


class TestKupiec:
    def test_null_point(self):
        stat, p = kupiec_lr_uc(990, 10, 0.01)
        assert stat == pytest.approx(0.0, abs=1e-12)
        assert p == pytest.approx(1.0, abs=1e-12)

    def test_reference_values(self):
        stat, p = kupiec_lr_uc(980, 20, 0.01)
        assert stat == pytest.approx(7.827, abs=1e-3)
        assert p == pytest.approx(0.00515, abs=1e-4)

    def test_zero_violations(self):
        stat, p = kupiec_lr_uc(1000, 0, 0.01)
        assert stat == pytest.approx(-2000 * math.log(0.99), rel=1e-12)
        assert stat == pytest.approx(20.10, abs=0.01)
        assert p == pytest.approx(7.3e-6, rel=0.02)

    @given(st.integers(0, 5000), st.integers(0, 5000), st.floats(1e-4, 0.5))
    def test_nonnegative_and_pvalue_matches_chi2(self, m0, m1, alpha):
        if m0 + m1 == 0:
            m0 = 1
        stat, p = kupiec_lr_uc(m0, m1, alpha)
        assert stat >= 0
        assert p == pytest.approx(stats.chi2.sf(stat, 1), rel=1e-9, abs=1e-300)

    @given(st.integers(0, 3000), st.integers(0, 3000), st.floats(1e-3, 0.999))
    def test_relabel_symmetry(self, m0, m1, alpha):
        if m0 + m1 == 0:
            m1 = 1
        a = kupiec_lr_uc(m0, m1, alpha)
        b = kupiec_lr_uc(m1, m0, 1.0 - alpha)
        assert a[0] == pytest.approx(b[0], rel=1e-9, abs=1e-9)

    def test_bad_inputs(self):
        with pytest.raises(DomainError):
            kupiec_lr_uc(0, 0, 0.01)
        with pytest.raises(DomainError):
            kupiec_lr_uc(10, 1, 0.0)

    def test_pvalues_roughly_uniform_under_null(self):
        rng = np.random.default_rng(99)
        m1 = rng.binomial(5000, 0.05, size=500)
        p = [kupiec_lr_uc(5000 - k, int(k), 0.05)[1] for k in m1]
        # the count is discrete, so the p-values are only approximately uniform
        assert stats.kstest(p, "uniform").statistic <= 0.08


class TestSummarize:
    def test_hand_checkable(self):
        r = np.zeros(21)
        r[[3, 8, 15]] = -2.0
        fc = const_forecasts(20, 1.5, alpha=0.05)
        rep = summarize(r, fc, 0.05, {"W": 250, "W0": 50, "mode": "raw"}, tail_start=10)
        assert rep.n_forecasts == 20 and rep.m1 == 3
        assert rep.viol_rate == 0.15
        assert rep.mean_var_x100 == pytest.approx(150.0)
        stat, p = kupiec_lr_uc(17, 3, 0.05)
        assert (rep.lr_stat, rep.p_value) == (stat, p)
        assert rep.running_rate[-1] == (20, 0.15)
        assert rep.running_rate[2] == (3, pytest.approx(1 / 3))
        assert rep.W == 250 and rep.W0 == 50 and rep.flags["mode"] == "raw"

    def test_percent_scale(self):
        fc = const_forecasts(5, 2.78)
        rep = summarize(np.zeros(6), fc, 0.05, return_scale=100.0)
        assert rep.mean_var_x100 == pytest.approx(2.78)

    def test_permutation_invariance(self, rng):
        r = rng.standard_normal(301)
        fc = [VarForecast(t, 0.05, float(v), "g_var") for t, v in enumerate(rng.uniform(1, 2, 300))]
        base = summarize(r, fc, 0.05)
        perm = rng.permutation(300)
        shuffled = [fc[i] for i in perm]
        restored = [None] * 300
        for pos, i in enumerate(perm):
            restored[i] = shuffled[pos]
        assert summarize(r, restored, 0.05) == base
        # the aggregate counts do not depend on the order either
        other = summarize(r, shuffled, 0.05)
        assert (other.m1, other.lr_stat) == (base.m1, base.lr_stat)
        assert other.mean_var_x100 == pytest.approx(base.mean_var_x100, rel=1e-12)

    def test_round_trip(self):
        rep = summarize(np.zeros(11), const_forecasts(10, 1.0), 0.05, {"W": 5, "W0": 2})
        assert BacktestReport.from_dict(rep.as_dict()) == rep
