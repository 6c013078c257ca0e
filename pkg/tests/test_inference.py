import math

import numpy as np
import pytest
from scipy.special import kolmogorov
from scipy.stats import norm

from kmband import (
    BandSpec,
    band_constant,
    band_constant_se,
    bridge_sup_tail,
    ci_pointwise_log,
    confidence_band,
    default_band_interval,
    fit,
)

from conftest import obs

# inverting the series: bridge_sup_tail(c) = alpha
C_STAR_05 = 1.3580986393225225
C_STAR_50 = 0.8275735551899055


class TestBridgeSupTail:
    def test_critical_value_at_five_percent(self):
        assert bridge_sup_tail(1.3581) == pytest.approx(0.05, abs=1e-4)
        assert bridge_sup_tail(C_STAR_05) == pytest.approx(0.05, abs=1e-9)

    def test_small_threshold_saturates_at_one(self):
        assert bridge_sup_tail(0.02) == pytest.approx(1.0, abs=1e-9)

    def test_large_threshold_vanishes(self):
        assert bridge_sup_tail(3.0) < 1e-6

    def test_matches_scipy_series(self):
        for c in np.linspace(0.3, 3.0, 28):
            assert bridge_sup_tail(float(c)) == pytest.approx(
                float(kolmogorov(c)), abs=1e-10
            )

    def test_strictly_decreasing(self):
        grid = np.linspace(0.2, 2.5, 24)
        vals = [bridge_sup_tail(float(c)) for c in grid]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_nonpositive_threshold_rejected(self):
        with pytest.raises(ValueError):
            bridge_sup_tail(0.0)


class TestBandConstant:
    def test_degenerate_interval_is_analytic(self):
        c = band_constant(0.5, 0.5, 0.05)
        assert c == pytest.approx(0.979981992270027, abs=1e-12)
        assert c == pytest.approx(0.98, abs=0.01)

    def test_degenerate_respects_variance(self):
        assert band_constant(0.1, 0.1, 0.05) == pytest.approx(
            norm.ppf(0.975) * math.sqrt(0.09), abs=1e-12
        )

    def test_full_interval_matches_series_inversion(self):
        c = band_constant(0.001, 0.999, 0.05, paths=40000, grid_points=512, seed=11)
        assert c == pytest.approx(C_STAR_05, abs=0.04)

    def test_median_level(self):
        c = band_constant(0.001, 0.999, 0.5, paths=40000, grid_points=512, seed=11)
        assert c == pytest.approx(C_STAR_50, abs=0.04)

    def test_deterministic_given_seed(self):
        a = band_constant(0.2, 0.8, 0.1, paths=5000, grid_points=256, seed=42)
        b = band_constant(0.2, 0.8, 0.1, paths=5000, grid_points=256, seed=42)
        assert a == b

    def test_monotone_under_interval_enlargement(self):
        kw = dict(alpha=0.05, paths=8000, grid_points=256, seed=9)
        assert band_constant(0.2, 0.6, **kw) <= band_constant(0.1, 0.9, **kw)

    def test_monotone_in_alpha(self):
        kw = dict(paths=8000, grid_points=256, seed=9)
        assert band_constant(0.1, 0.9, 0.10, **kw) <= band_constant(0.1, 0.9, 0.05, **kw)

    def test_invalid_arguments_rejected(self):
        with pytest.raises(ValueError):
            band_constant(0.9, 0.1, 0.05)
        with pytest.raises(ValueError):
            band_constant(0.0, 0.5, 0.05)
        with pytest.raises(ValueError):
            band_constant(0.1, 1.0, 0.05)
        with pytest.raises(ValueError):
            band_constant(0.1, 0.9, 1.5)

    def test_reported_se_brackets_truth(self):
        c, se = band_constant_se(0.001, 0.999, 0.05, paths=40000, grid_points=512, seed=3)
        assert 0.0 < se < 0.02
        assert abs(c - C_STAR_05) < 6 * se + 0.02  # grid bias eats part of the budget


class TestCiPointwiseLog:
    def test_collapses_before_first_event(self, five_point):
        res = fit(five_point)
        assert ci_pointwise_log(res, 0.5, 0.05) == (1.0, 1.0)

    def test_frozen_five_point_endpoints(self, five_point):
        res = fit(five_point)
        lo, hi = ci_pointwise_log(res, 3.0, 0.05)
        assert lo == pytest.approx(0.2141834807413687, rel=1e-12)
        assert hi == 1.0  # upper endpoint clamps at 1

    def test_nearly_degenerate_level(self, five_point):
        res = fit(five_point)
        lo, hi = ci_pointwise_log(res, 3.0, 1 - 1e-12)
        s = res.survival_at(3.0)
        assert lo == pytest.approx(s, abs=1e-9)
        assert hi == pytest.approx(s, abs=1e-9)

    def test_undefined_at_infinite_variance(self, five_point):
        res = fit(five_point)
        with pytest.raises(ValueError, match="CI undefined at 5"):
            ci_pointwise_log(res, 5.0, 0.05)

    def test_undefined_where_estimate_vanishes(self):
        # the estimate reaches 0 only at a terminal event knot, where the
        # variance has already diverged; both preconditions fail together
        res = fit(obs([(1, 1), (2, 1)]))
        assert res.survival_at(2.0) == 0.0
        for x in (2.0, 10.0):
            with pytest.raises(ValueError, match="CI undefined"):
                ci_pointwise_log(res, x, 0.05)

    def test_endpoints_straddle_estimate(self, five_point):
        res = fit(five_point)
        for x in (1.0, 2.5, 3.0, 4.9):
            lo, hi = ci_pointwise_log(res, x, 0.05)
            assert 0.0 <= lo <= res.survival_at(x) <= hi <= 1.0

    def test_invalid_alpha_rejected(self, five_point):
        res = fit(five_point)
        with pytest.raises(ValueError):
            ci_pointwise_log(res, 3.0, 0.0)
        with pytest.raises(ValueError):
            ci_pointwise_log(res, 3.0, 1.0)


class TestConfidenceBand:
    def band(self, data, x1, x2, **kw):
        res = fit(data)
        kw.setdefault("paths", 20000)
        kw.setdefault("grid_points", 512)
        kw.setdefault("seed", 2)
        return res, *confidence_band(res, x1, x2, 0.05, **kw)

    def test_contains_the_estimate(self, five_point):
        res, spec, rows = self.band(five_point, 1.0, 4.0)
        for x, lo, hi in rows:
            assert lo <= res.survival_at(x) <= hi

    def test_wider_than_pointwise_interval(self, five_point):
        res, spec, rows = self.band(five_point, 1.0, 4.0)
        z = norm.ppf(0.975)
        for x, lo, hi in rows:
            band_hw = spec.c_value / (math.sqrt(res.n) * (1.0 - res.h_at(x)))
            ci_hw = z * math.sqrt(res.variance_at(x) / res.n)
            assert band_hw > ci_hw

    def test_snaps_interval_inward_to_knots(self, five_point):
        res, spec, rows = self.band(five_point, 0.2, 4.7)
        assert spec.x1 == 1.0
        assert spec.x2 == 4.0
        assert [r[0] for r in rows] == [1.0, 2.0, 3.0, 4.0]

    def test_divergent_variance_names_offending_time(self, five_point):
        res = fit(five_point)
        with pytest.raises(ValueError, match="variance diverges.*time 5"):
            confidence_band(res, 1.0, 5.0, 0.05, paths=1000, grid_points=128, seed=0)

    def test_start_before_any_event_rejected(self):
        res = fit(obs([(1, 0), (2, 1), (3, 0), (4, 1), (5, 0)]))
        with pytest.raises(ValueError, match="first event"):
            confidence_band(res, 1.0, 4.0, 0.05, paths=1000, grid_points=128, seed=0)

    def test_band_values_clamped_to_unit_interval(self, five_point):
        _, _, rows = self.band(five_point, 1.0, 4.0)
        for _, lo, hi in rows:
            assert 0.0 <= lo <= hi <= 1.0

    def test_deterministic(self, five_point):
        _, s1, r1 = self.band(five_point, 1.0, 4.0)
        _, s2, r2 = self.band(five_point, 1.0, 4.0)
        assert s1 == s2
        assert r1 == r2

    def test_default_interval(self, five_point):
        res = fit(five_point)
        assert default_band_interval(res) == (1.0, 4.0)

    def test_default_interval_requires_an_event_with_finite_variance(self):
        res = fit(obs([(1, 0), (2, 0)]))
        with pytest.raises(ValueError, match="band undefined"):
            default_band_interval(res)


class TestBandSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            BandSpec(x1=2.0, x2=1.0, alpha=0.05, c_value=1.0, paths=10, grid_points=8, seed=0)
        with pytest.raises(ValueError):
            BandSpec(x1=1.0, x2=2.0, alpha=0.05, c_value=0.0, paths=10, grid_points=8, seed=0)
        with pytest.raises(ValueError):
            BandSpec(x1=1.0, x2=2.0, alpha=1.2, c_value=1.0, paths=10, grid_points=8, seed=0)
