"""Proportional-fair selection, EWMA dynamics, round-robin baseline."""

import math

import pytest
from hypothesis import given, settings, strategies as st

from rissim.scheduler import (
    PfConfig,
    UeSchedState,
    ewma_update,
    pf_metric,
    rr_select,
    select_ue,
)

CFG = PfConfig(alpha=0.1)


class TestPfMetric:
    def test_simple_ratio(self):
        assert pf_metric(2.0, 1.0) == pytest.approx(2.0)

    def test_zero_rate(self):
        assert pf_metric(0.0, 5.0) == 0.0

    def test_floor_guards_division(self):
        assert pf_metric(1.0, 0.0, 1e-6) == pytest.approx(1e6)


class TestSelectUe:
    def test_argmax(self):
        states = [UeSchedState(t_avg=1.0), UeSchedState(t_avg=1.0)]
        assert select_ue(states, [3.0, 1.0], CFG) == 0

    def test_retx_priority_overrides_metric(self):
        states = [UeSchedState(t_avg=1.0), UeSchedState(t_avg=1.0, pending_retx=True)]
        assert select_ue(states, [100.0, 0.1], CFG) == 1

    def test_retx_tie_lowest_index(self):
        states = [
            UeSchedState(pending_retx=True),
            UeSchedState(pending_retx=True),
        ]
        assert select_ue(states, [1.0, 1.0], CFG) == 0

    def test_metric_tie_lowest_index(self):
        states = [UeSchedState(t_avg=2.0), UeSchedState(t_avg=2.0)]
        assert select_ue(states, [1.0, 1.0], CFG) == 0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            select_ue([], [], CFG)

    @given(
        t_avgs=st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=6),
        rates=st.lists(st.floats(0.0, 1e3), min_size=6, max_size=6),
        scale=st.floats(1e-2, 1e2),
    )
    @settings(max_examples=1000)
    def test_argmax_scale_invariance(self, t_avgs, rates, scale):
        # Joint rescaling of rates and averages keeps the decision, as
        # long as the scaled averages stay above the division floor.
        n = len(t_avgs)
        rates = rates[:n]
        base = select_ue([UeSchedState(t_avg=t) for t in t_avgs], rates, CFG)
        scaled = select_ue(
            [UeSchedState(t_avg=t * scale) for t in t_avgs],
            [r * scale for r in rates],
            CFG,
        )
        assert base == scaled


class TestEwma:
    def test_served_update(self):
        states = [UeSchedState(t_avg=1.0)]
        ewma_update(states, 0, [3.0], 0.5)
        assert states[0].t_avg == pytest.approx(2.0)

    def test_unserved_pure_decay(self):
        states = [UeSchedState(t_avg=1.0), UeSchedState(t_avg=1.0)]
        ewma_update(states, 0, [3.0, 3.0], 0.5)
        assert states[1].t_avg == pytest.approx(0.5)

    def test_vanishing_alpha_first_order(self):
        states = [UeSchedState(t_avg=1.0)]
        ewma_update(states, 0, [3.0], 1e-9)
        assert abs(states[0].t_avg - 1.0) < 1e-8

    def test_invalid_alpha(self):
        with pytest.raises(ValueError):
            ewma_update([UeSchedState()], 0, [1.0], 1.0)

    @given(
        alpha=st.floats(0.01, 0.99),
        rate=st.floats(0.01, 10.0),
    )
    @settings(max_examples=1000, deadline=None)
    def test_fixed_point_reached_within_five_time_constants(self, alpha, rate):
        states = [UeSchedState()]
        for _ in range(math.ceil(5.0 / alpha)):
            ewma_update(states, 0, [rate], alpha)
        assert states[0].t_avg == pytest.approx(rate, rel=0.01)

    def test_fixed_point_small_alpha_spot_check(self):
        alpha = 5e-5
        states = [UeSchedState()]
        for _ in range(math.ceil(5.0 / alpha)):
            ewma_update(states, 0, [2.5], alpha)
        assert states[0].t_avg == pytest.approx(2.5, rel=0.01)


class TestRoundRobin:
    def test_two_ues_alternate(self):
        assert [rr_select(t, 2) for t in range(4)] == [0, 1, 0, 1]

    def test_single_ue(self):
        assert all(rr_select(t, 1) == 0 for t in range(5))

    def test_three_ues_offset(self):
        assert rr_select(7, 3) == 1

    def test_invalid_count(self):
        with pytest.raises(ValueError):
            rr_select(0, 0)


class TestFairnessExtreme:
    def test_large_alpha_splits_symmetric_alternating_channels(self):
        # Per-slot alternation of a symmetric two-level rate pair; with a
        # heavy EWMA weight the long-run served shares stay near 50%.
        alpha = 0.9
        cfg = PfConfig(alpha=alpha)
        states = [UeSchedState(), UeSchedState()]
        served = [0, 0]
        for t in range(10_000):
            rates = [3.0, 1.0] if t % 2 == 0 else [1.0, 3.0]
            k = select_ue(states, rates, cfg)
            served[k] += 1
            ewma_update(states, k, rates, alpha)
        share = served[0] / sum(served)
        assert 0.45 <= share <= 0.55
