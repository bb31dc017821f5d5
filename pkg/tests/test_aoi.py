from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aoi_contract import (
    CycleCase,
    CycleKind,
    DomainError,
    TimingParams,
    avg_aoi,
    avg_latency_enumerated,
    avg_latency_printed,
    case1_curves,
    case2_curves,
    cycle_enumeration,
    monte_carlo_averages,
)
from aoi_contract.aoi import avg_latency


def period_walk(c: int, a: int, t) -> tuple[Fraction, Fraction]:
    """Average latency/AoI by walking the cycle one request at a time.

    A request raised in collection period z completes once the remaining
    collection plus one training period has passed; outside collection it
    completes after one period.  AoI counts back to the start of the data
    aggregation that served the request.
    """
    t = Fraction(t)
    lat = []
    age = []
    for z in range(1, c + 1):
        lat.append(c * t + t - (z - 1) * t)
        age.append(t)
    age.append(t)  # first idle period still sees the fresh batch
    lat.append(t)
    for l in range(c + 2, c + a + 1):
        lat.append(t)
        age.append((l - (c + 1) + 1) * t)
    n = c + a
    return sum(lat) / n, sum(age) / n


GRID = [(t, c, a) for t in (1, 2) for c in range(1, 14) for a in range(1, 14)]


class TestEnumeration:
    def test_period_walk_matches_enumeration(self):
        for t, c, a in GRID:
            avg, rows = cycle_enumeration(TimingParams(t, c, a))
            lat, age = period_walk(c, a, t)
            assert avg.avg_latency == float(lat)
            assert avg.avg_aoi == float(age)
            assert len(rows) == c + a

    def test_aoi_closed_form_on_grid(self):
        assert len(GRID) == 338
        for t, c, a in GRID:
            exact, _ = cycle_enumeration(TimingParams(t, c, a))
            assert avg_aoi(TimingParams(t, c, a)) == pytest.approx(exact.avg_aoi, rel=1e-12)

    def test_enumerated_latency_closed_form(self):
        for t, c, a in GRID:
            exact, _ = cycle_enumeration(TimingParams(t, c, a))
            assert avg_latency_enumerated(TimingParams(t, c, a)) == pytest.approx(
                exact.avg_latency, rel=1e-12
            )

    def test_known_cycle(self):
        # c=2, a=3, t=2: latencies 6,4,2,2,2 and ages 2,2,2,4,6
        avg, rows = cycle_enumeration(TimingParams(2, 2, 3))
        assert [r.latency for r in rows] == [6, 4, 2, 2, 2]
        assert [r.aoi for r in rows] == [2, 2, 2, 4, 6]
        assert avg.avg_latency == 3.2
        assert avg.avg_aoi == 3.2

    def test_printed_latency_differs_for_longer_collection(self):
        p = TimingParams(2, 2, 3)
        assert avg_latency_printed(p) == pytest.approx(5.2, rel=1e-12)
        assert avg_latency_enumerated(p) == pytest.approx(3.2, rel=1e-12)

    def test_printed_latency_agrees_at_single_collection_period(self):
        for a in range(1, 14):
            p = TimingParams(2, 1, a)
            assert avg_latency_printed(p) == pytest.approx(avg_latency_enumerated(p), rel=1e-12)

    def test_non_integral_cycle_rejected(self):
        with pytest.raises(DomainError):
            cycle_enumeration(TimingParams(2, 1.5, 3))

    @pytest.mark.parametrize("kw", [{"t": 0, "c": 1, "a": 1}, {"t": 1, "c": 0, "a": 1}, {"t": 1, "c": 1, "a": 0.5}])
    def test_timing_domain(self, kw):
        with pytest.raises(DomainError):
            TimingParams(**kw)


class TestCaseCurves:
    @pytest.mark.parametrize("model", ["printed", "enumerated"])
    def test_grid_consistency(self, model):
        for t, c, a in GRID:
            p = TimingParams(t, c, a)
            theta = (c + a) * t
            lat1, aoi1 = case1_curves(theta, CycleCase(CycleKind.FIXED_UPDATE, c, t, model))
            lat2, aoi2 = case2_curves(theta, CycleCase(CycleKind.FIXED_IDLE, a, t, model))
            for lat, aoi in ((lat1, aoi1), (lat2, aoi2)):
                assert lat == pytest.approx(avg_latency(p, model), rel=1e-9, abs=1e-9)
                assert aoi == pytest.approx(avg_aoi(p), rel=1e-9, abs=1e-9)

    def test_fixed_update_latency_constant_is_one_period(self):
        # large theta leaves only the idle-phase latency t
        case = CycleCase(CycleKind.FIXED_UPDATE, 2, 2.0)
        lat, _ = case.curves(1e12)
        assert lat == pytest.approx(2.0, rel=1e-9)

    def test_wrong_kind_rejected(self):
        with pytest.raises(DomainError):
            case1_curves(10.0, CycleCase(CycleKind.FIXED_IDLE, 3, 2.0))
        with pytest.raises(DomainError):
            case2_curves(10.0, CycleCase(CycleKind.FIXED_UPDATE, 3, 2.0))

    def test_below_domain_rejected(self):
        case = CycleCase(CycleKind.FIXED_IDLE, 3, 2.0)
        with pytest.raises(DomainError):
            case.curves(7.9)
        case.curves(8.0)

    @pytest.mark.parametrize(
        "kind,fixed", [(CycleKind.FIXED_UPDATE, c) for c in (1, 2, 5, 13)]
        + [(CycleKind.FIXED_IDLE, a) for a in (2, 5, 13)],
    )
    @pytest.mark.parametrize("model", ["printed", "enumerated"])
    def test_convexity(self, kind, fixed, model):
        case = CycleCase(kind, fixed, 2.0, model)
        xs = np.linspace(case.theta_min, case.theta_min + 200.0, 1000)
        lat, aoi = np.array([case.curves(x) for x in xs]).T
        for ys in (lat, aoi):
            d2 = ys[:-2] - 2 * ys[1:-1] + ys[2:]
            assert d2.min() >= -1e-9

    @pytest.mark.parametrize("kind", list(CycleKind))
    @pytest.mark.parametrize("model", ["printed", "enumerated"])
    def test_slopes_match_finite_differences(self, kind, model):
        case = CycleCase(kind, 3, 2.0, model)
        for theta in (8.5, 12.0, 30.0, 75.0):
            h = 1e-5 * theta
            lat_p, aoi_p = case.curves(theta + h)
            lat_m, aoi_m = case.curves(theta - h)
            d_lat, d_aoi = case.slopes(theta)
            assert d_lat == pytest.approx((lat_p - lat_m) / (2 * h), rel=1e-6, abs=1e-9)
            assert d_aoi == pytest.approx((aoi_p - aoi_m) / (2 * h), rel=1e-6, abs=1e-9)

    @settings(max_examples=200, deadline=None)
    @given(
        c=st.integers(1, 13),
        a=st.integers(1, 13),
        t=st.sampled_from([0.5, 1.0, 2.0, 3.0]),
    )
    def test_both_cases_agree_on_the_grid(self, c, a, t):
        theta = (c + a) * t
        one = CycleCase(CycleKind.FIXED_UPDATE, c, t).curves(theta)
        two = CycleCase(CycleKind.FIXED_IDLE, a, t).curves(theta)
        assert one == pytest.approx(two, rel=1e-9)

    def test_default_f_min_is_thirteen_free_periods(self):
        case = CycleCase(CycleKind.FIXED_IDLE, 3, 2.0)
        assert case.default_f_min() == pytest.approx(1 / 32)
        assert case.theta_min == 8.0


class TestMonteCarlo:
    @pytest.mark.parametrize("c,a", [(1, 1), (2, 3), (5, 7)])
    def test_within_five_standard_errors(self, c, a):
        p = TimingParams(2, c, a)
        est = monte_carlo_averages(p, 100_000, seed=7)
        exact, _ = cycle_enumeration(p)
        assert abs(est.avg_latency - exact.avg_latency) <= 5 * est.se_latency
        assert abs(est.avg_aoi - exact.avg_aoi) <= 5 * est.se_aoi

    def test_seeded_runs_repeat(self):
        p = TimingParams(2, 3, 4)
        assert monte_carlo_averages(p, 10_000, 3) == monte_carlo_averages(p, 10_000, 3)
        assert monte_carlo_averages(p, 10_000, 3) != monte_carlo_averages(p, 10_000, 4)

    def test_single_sample_has_no_error_estimate(self):
        est = monte_carlo_averages(TimingParams(1, 1, 1), 1, 0)
        assert math.isinf(est.se_latency)

    def test_rejects_nonpositive_samples(self):
        with pytest.raises(DomainError):
            monte_carlo_averages(TimingParams(1, 1, 1), 0, 0)
