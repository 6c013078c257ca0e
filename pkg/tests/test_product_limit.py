import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kmband import (
    Observation,
    build_risk_table,
    fit,
    h_hat_at,
    km_estimate,
    log_variance_at,
)

from conftest import obs, random_censored_dataset


def product_limit_oracle(pairs, x):
    """Straight product over event times <= x, recomputed from scratch."""
    value = 1.0
    for t in sorted({t for t, _ in pairs}):
        if t > x:
            break
        deaths = sum(1 for u, e in pairs if u == t and e)
        at_risk = sum(1 for u, _ in pairs if u >= t)
        value *= 1.0 - deaths / at_risk
    return value


def greenwood_log_variance(rt, k):
    """Classical log-scale sum d/(R(R-d)); test-only cross-check."""
    total = 0.0
    for j in range(k + 1):
        d = rt.event_count[j]
        if d == 0:
            continue
        r = rt.at_risk[j]
        if r == d:
            return float("inf")
        total += d / (r * (r - d))
    return total


dataset_pairs = st.lists(
    st.tuples(
        st.integers(1, 500).map(lambda k: k / 10.0),  # coarse grid provokes ties
        st.booleans(),
    ),
    min_size=1,
    max_size=30,
)


class TestKmEstimate:
    def test_five_point_values(self, five_point):
        curve = km_estimate(build_risk_table(five_point))
        assert curve.values == pytest.approx([0.8, 0.8, 8 / 15, 8 / 15, 0.0], abs=1e-15)

    def test_no_censoring_equals_empirical_survival(self):
        curve = km_estimate(build_risk_table(obs([(1, 1), (2, 1), (3, 1)])))
        assert curve.values == pytest.approx([2 / 3, 1 / 3, 0.0], abs=1e-15)

    def test_single_censored_record(self):
        curve = km_estimate(build_risk_table(obs([(7, 0)])))
        assert curve.values.tolist() == [1.0]

    @given(dataset_pairs)
    @settings(max_examples=60)
    def test_matches_product_oracle(self, pairs):
        rt = build_risk_table(obs(pairs))
        curve = km_estimate(rt)
        for k, t in enumerate(rt.times):
            assert curve.values[k] == pytest.approx(product_limit_oracle(pairs, t), abs=1e-12)

    @given(dataset_pairs)
    @settings(max_examples=40)
    def test_drops_exactly_at_event_knots(self, pairs):
        rt = build_risk_table(obs(pairs))
        v = km_estimate(rt).values
        prev = 1.0
        for k in range(len(rt)):
            if rt.event_count[k] > 0:
                assert v[k] < prev
            else:
                assert v[k] == prev
            prev = v[k]


class TestLogVariance:
    def test_partial_sum_through_time_three(self, five_point):
        rt = build_risk_table(five_point)
        assert log_variance_at(rt, 2) == pytest.approx(5 * (1 / 20 + 1 / 6), rel=1e-14)

    def test_zero_before_any_event(self):
        rt = build_risk_table(obs([(1, 0), (2, 0), (3, 1)]))
        assert log_variance_at(rt, 0) == 0.0
        assert log_variance_at(rt, 1) == 0.0

    def test_infinite_when_final_event_exhausts_risk_set(self):
        rt = build_risk_table(obs([(1, 1), (2, 1)]))
        assert math.isinf(log_variance_at(rt, 1))
        assert math.isfinite(log_variance_at(rt, 0))

    def test_index_out_of_range(self, five_point):
        rt = build_risk_table(five_point)
        with pytest.raises(IndexError):
            log_variance_at(rt, 5)


class TestHHat:
    def test_zero_variance_maps_to_zero(self):
        rt = build_risk_table(obs([(1, 0), (2, 1), (3, 0)]))
        assert h_hat_at(rt, 0) == 0.0

    def test_five_point_value(self, five_point):
        rt = build_risk_table(five_point)
        assert h_hat_at(rt, 2) == pytest.approx(0.52, abs=1e-14)

    def test_infinite_variance_maps_to_one(self):
        rt = build_risk_table(obs([(1, 1), (2, 1)]))
        assert h_hat_at(rt, 1) == 1.0


class TestFit:
    def test_five_point_composition(self, five_point):
        res = fit(five_point)
        assert res.n == 5
        assert res.curve.values == pytest.approx([0.8, 0.8, 8 / 15, 8 / 15, 0.0], abs=1e-15)
        assert res.log_variance[:4] == pytest.approx(
            [0.25, 0.25, 13 / 12, 13 / 12], rel=1e-14
        )
        assert math.isinf(res.log_variance[4])
        assert res.h_hat.tolist() == pytest.approx([0.2, 0.2, 0.52, 0.52, 1.0], abs=1e-14)

    def test_all_censored(self):
        res = fit(obs([(1, 0), (2, 0), (3, 0)]))
        assert np.all(res.curve.values == 1.0)
        assert np.all(res.log_variance == 0.0)
        assert np.all(res.h_hat == 0.0)

    def test_no_censoring_curve_is_empirical(self):
        data = obs([(1, 1), (2, 1), (4, 1), (8, 1)])
        res = fit(data)
        n = len(data)
        for k, t in enumerate(res.knots):
            assert res.curve.values[k] == pytest.approx(
                sum(o.time > t for o in data) / n, abs=1e-15
            )

    def test_step_lookups_between_knots(self, five_point):
        res = fit(five_point)
        assert res.variance_at(0.5) == 0.0
        assert res.variance_at(3.7) == pytest.approx(13 / 12, rel=1e-14)
        assert res.h_at(0.5) == 0.0
        assert res.h_at(2.5) == pytest.approx(0.2, abs=1e-14)
        assert res.survival_at(4.99) == pytest.approx(8 / 15, abs=1e-15)

    @given(dataset_pairs)
    @settings(max_examples=40)
    def test_log_variance_nondecreasing_h_in_unit_interval(self, pairs):
        res = fit(obs(pairs))
        finite = res.log_variance[np.isfinite(res.log_variance)]
        assert np.all(np.diff(finite) >= 0)
        assert np.all((res.h_hat >= 0) & (res.h_hat <= 1))
        # h = a/(1+a) consistency at finite knots
        a = res.log_variance[np.isfinite(res.log_variance)]
        assert res.h_hat[np.isfinite(res.log_variance)] == pytest.approx(
            a / (1 + a), abs=1e-14
        )


class TestProperties:
    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_tie_free_variance_equals_greenwood(self, seed):
        rng = np.random.default_rng(seed)
        data = random_censored_dataset(rng)
        rt = build_risk_table(data)
        assert len(rt) == len(data)  # continuous draws: no ties expected
        for k in range(len(rt)):
            ours = log_variance_at(rt, k) / rt.total
            classical = greenwood_log_variance(rt, k)
            if math.isinf(classical):
                assert math.isinf(ours)
            else:
                assert ours == pytest.approx(classical, abs=1e-12)

    @given(
        st.integers(0, 2**32 - 1),
        st.floats(min_value=0.01, max_value=100.0, allow_nan=False),
    )
    @settings(max_examples=25, deadline=None)
    def test_time_scaling_equivariance(self, seed, scale):
        rng = np.random.default_rng(seed)
        data = random_censored_dataset(rng, n_hi=20)
        scaled = [Observation(o.time * scale, o.event) for o in data]
        a, b = fit(data), fit(scaled)
        assert b.knots == pytest.approx(a.knots * scale, rel=1e-12)
        assert np.array_equal(a.curve.values, b.curve.values)
        assert np.array_equal(a.log_variance, b.log_variance)
        assert np.array_equal(a.h_hat, b.h_hat)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_earlier_censored_observation_changes_nothing(self, seed):
        # A censored subject earlier than every existing time joins no
        # risk set at existing knots, so values there are untouched.
        rng = np.random.default_rng(seed)
        data = random_censored_dataset(rng, n_hi=20)
        early = 0.5 * min(o.time for o in data)
        extended = [Observation(early, False)] + data
        base, ext = fit(data), fit(extended)
        assert ext.knots[0] == early
        assert ext.curve.values[1:] == pytest.approx(base.curve.values, abs=1e-15)
        assert ext.curve.values[0] == 1.0
