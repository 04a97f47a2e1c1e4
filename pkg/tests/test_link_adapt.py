"""MCS table, block-error curve, outer-loop stepping, CQI cap, HARQ."""

import numpy as np
import pytest

from rissim.link_adapt import (
    DISCARD,
    HarqProcess,
    LinkAdaptState,
    MCS_TABLE_64QAM,
    RETRANSMIT,
    bler,
    cqi_update,
    harq_on_nack,
    measure_bler,
    step_mcs,
)


class TestMcsTable:
    def test_shape_and_orders(self):
        assert len(MCS_TABLE_64QAM) == 29
        assert {e.modulation_order for e in MCS_TABLE_64QAM} == {2, 4, 6}

    def test_se_increasing_and_capped(self):
        # The cited table is strictly increasing except for the single
        # 16QAM-to-64QAM handover at indices 16 -> 17 (2.5703 -> 2.5664),
        # which is verbatim from the standard.
        ses = [e.se for e in MCS_TABLE_64QAM]
        inversions = [i for i, (a, b) in enumerate(zip(ses, ses[1:])) if b <= a]
        assert inversions == [16]
        assert ses[16] == pytest.approx(2.5703)
        assert ses[17] == pytest.approx(2.5664)
        assert max(ses) == pytest.approx(5.5547)

    def test_invalid_index(self):
        with pytest.raises(ValueError):
            MCS_TABLE_64QAM.entry(29)


class TestBlerModel:
    def test_midpoint_at_threshold(self):
        thr = MCS_TABLE_64QAM.threshold_db(10)
        assert bler(thr, 10) == pytest.approx(0.5)

    def test_deep_tail(self):
        thr = MCS_TABLE_64QAM.threshold_db(10)
        assert bler(thr + 20.0, 10, model_slope=1.0) < 1e-8

    def test_monotone_in_snr_and_mcs(self):
        # Exhaustive sweep on a 0.1 dB grid around each threshold.
        for mcs in range(29):
            thr = MCS_TABLE_64QAM.threshold_db(mcs)
            grid = np.arange(thr - 10.0, thr + 30.0, 0.1)
            values = [bler(s, mcs) for s in grid]
            assert all(b < a for a, b in zip(values, values[1:]))
        for snr in (-5.0, 5.0, 15.0, 25.0):
            by_mcs = [bler(snr, m) for m in range(29)]
            rises = [
                i for i, (a, b) in enumerate(zip(by_mcs, by_mcs[1:])) if b < a - 1e-15
            ]
            # Error probability grows with the index except across the
            # table's single spectral-efficiency inversion at 16 -> 17.
            assert rises in ([], [16])


class TestMeasureBler:
    @pytest.mark.parametrize("window,expected", [((10, 1), 0.1), ((0, 0), 0.0), ((20, 4), 0.2)])
    def test_ratio(self, window, expected):
        assert measure_bler(window) == pytest.approx(expected)


class TestStepMcs:
    def test_step_up_on_low_bler(self):
        s = LinkAdaptState(mcs=10)
        assert step_mcs(s, 0.02).mcs == 11

    def test_step_down_on_high_bler(self):
        s = LinkAdaptState(mcs=10)
        assert step_mcs(s, 0.20).mcs == 9

    def test_floor_clamp(self):
        s = LinkAdaptState(mcs=3)
        assert step_mcs(s, 0.20).mcs == 3

    def test_dead_zone(self):
        s = LinkAdaptState(mcs=10)
        assert step_mcs(s, 0.10).mcs == 10

    def test_cqi_cap_clamp(self):
        s = LinkAdaptState(mcs=20, mcs_max_from_cqi=20)
        assert step_mcs(s, 0.01).mcs == 20


class TestCqiCap:
    def test_high_snr_reaches_table_top(self):
        assert cqi_update(60.0) == 28

    def test_low_snr_floors_at_minimum(self):
        assert cqi_update(-20.0) == 3

    def test_exact_boundary(self):
        snr = MCS_TABLE_64QAM.threshold_db(14) + 2.0
        assert cqi_update(snr, cqi_backoff_db=2.0) == 14


class TestHarq:
    def test_first_nack_retransmits(self):
        p = HarqProcess(tb_bits=1000, mcs_used=12)
        assert harq_on_nack(p) == RETRANSMIT
        assert p.attempts == 2
        assert p.mcs_used == 12

    def test_fourth_attempt_discards(self):
        p = HarqProcess(tb_bits=1000, mcs_used=12, attempts=4)
        assert harq_on_nack(p) == DISCARD
        assert p.attempts == 4

    def test_attempt_budget_is_three_retransmissions(self):
        p = HarqProcess(tb_bits=1000, mcs_used=12)
        outcomes = [harq_on_nack(p) for _ in range(4)]
        assert outcomes == [RETRANSMIT, RETRANSMIT, RETRANSMIT, DISCARD]


def _drive_link(snr_db, n_windows, rng, state=None, slots_per_window=140):
    """Minimal closed-loop driver: one UE scheduled every slot with
    stop-and-wait HARQ, outer-loop stepping at window boundaries."""
    state = state or LinkAdaptState()
    proc = None
    total_sched = total_retx = 0
    events = []
    for _ in range(n_windows):
        for _ in range(slots_per_window):
            if proc is not None:
                mcs_used, is_retx = proc.mcs_used, True
            else:
                mcs_used, is_retx = state.mcs, False
                proc = HarqProcess(tb_bits=1, mcs_used=mcs_used)
            nack = rng.random() < bler(snr_db, mcs_used)
            if nack:
                if harq_on_nack(proc) == DISCARD:
                    proc = None
            else:
                proc = None
            state.win_scheduled += 1
            total_sched += 1
            if is_retx:
                state.win_retx += 1
                total_retx += 1
        measured = measure_bler(state.window())
        mcs_before = state.mcs
        step_mcs(state, measured)
        events.append((measured, mcs_before, state.mcs))
        state.reset_window()
    return state, events, total_retx / total_sched


class TestClosedLoop:
    def test_static_snr_regulates_bler_into_band(self):
        rng = np.random.default_rng(21)
        for snr_db in (8.0, 14.0, 19.0):
            _, events, long_run = _drive_link(snr_db, 400, rng)
            settle = events[50:]
            measured = [m for m, _, _ in settle]
            assert 0.05 <= np.mean(measured) <= 0.15
            assert 0.05 <= np.mean([m for m, _, _ in events[50:]]) <= 0.15

    def test_downward_snr_step_overshoots_before_mcs_reacts(self):
        rng = np.random.default_rng(22)
        state, _, _ = _drive_link(19.0, 120, rng)
        mcs_at_step = state.mcs
        _, events, _ = _drive_link(9.0, 3, rng, state=state)
        first_measured, mcs_before, _ = events[0]
        assert first_measured > 0.15
        assert mcs_before == mcs_at_step  # excursion precedes the correction

    def test_upward_snr_step_undershoots_before_mcs_reacts(self):
        rng = np.random.default_rng(23)
        state, _, _ = _drive_link(9.0, 120, rng)
        mcs_at_step = state.mcs
        _, events, _ = _drive_link(19.0, 3, rng, state=state)
        first_measured, mcs_before, _ = events[0]
        assert first_measured < 0.05
        assert mcs_before == mcs_at_step
