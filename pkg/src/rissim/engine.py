"""Slot-ordered downlink MAC loop.

Per slot: advance the surface state, refresh CQI-derived rate estimates
on their cadence, pick the UE (pending retransmissions first, then the
configured policy), size the transport block, draw its outcome from the
block-error model, and update HARQ, EWMA and window counters.  The
scheduler and the EWMA see the CQI-cadence rate estimates, as a
CQI-driven MAC does; the block outcome is drawn against the true
current SNR, which is what produces the measured-BLER excursions right
after a surface switch.

All randomness derives from one master seed through three independent
streams (channel scatter, block outcomes, i.i.d. switching), so traces
are bit-reproducible and enabling scatter does not perturb HARQ draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import channel as ch
from . import link_adapt as la_mod
from . import ris_control as rc
from . import scheduler as sched_mod
from .array_model import design_phase_offsets
from .config import SLOT_MS, ExperimentConfig, scaled
from .link_adapt import MCS_TABLE_64QAM, HarqProcess, LinkAdaptState, McsTable

SUBCARRIERS_PER_PRB = 12

DL = "dl"
MIXED = "mixed"
UL = "ul"


@dataclass(frozen=True)
class TddPattern:
    """Slot roles within one period: 6 downlink, 1 mixed, 3 uplink."""

    period_slots: int = 10
    kinds: tuple[str, ...] = (DL,) * 6 + (MIXED,) + (UL,) * 3
    dl_symbols: tuple[int, ...] = (13,) * 6 + (6,) + (0,) * 3


DEFAULT_TDD = TddPattern()


def slot_kind(t: int, pattern: TddPattern = DEFAULT_TDD) -> tuple[str, int]:
    """(kind, schedulable DL symbols) of slot ``t``."""
    if t < 0:
        raise ValueError(f"slot index must be >= 0, got {t}")
    i = t % pattern.period_slots
    return pattern.kinds[i], pattern.dl_symbols[i]


def tb_bits(mcs: int, table: McsTable = MCS_TABLE_64QAM, prbs: int = 106, symbols: int = 13) -> int:
    """Transport-block size: spectral efficiency times resource elements."""
    if symbols <= 0:
        raise ValueError(f"symbols must be positive, got {symbols}")
    if prbs < 1:
        raise ValueError(f"prbs must be >= 1, got {prbs}")
    return math.floor(table.se(mcs) * SUBCARRIERS_PER_PRB * prbs * symbols)


class SlotRecord(NamedTuple):
    slot: int
    time_ms: float
    ris_state: int
    ue: int | None
    rsrp_dbm: tuple[float, ...]
    snr_db: float | None
    mcs: int | None
    tb_bits: int
    outcome: str  # "ack" | "nack" | "idle"
    is_retx: bool


@dataclass
class UeRunStats:
    acked_bits: int = 0
    scheduled: int = 0
    retx: int = 0
    served_aligned: int = 0
    served_misaligned: int = 0
    rsrp_aligned_sum: float = 0.0
    rsrp_aligned_n: int = 0
    rsrp_misaligned_sum: float = 0.0
    rsrp_misaligned_n: int = 0


@dataclass
class RunSummary:
    duration_s: float
    measured_s: float
    n_slots: int
    throughput_mbps: tuple[float, ...]
    aggregate_mbps: float
    long_run_bler: tuple[float, ...]
    mean_rsrp_aligned_dbm: tuple[float, ...]
    mean_rsrp_misaligned_dbm: tuple[float, ...]
    served_frac_aligned_dl: tuple[float, ...]
    served_frac_misaligned_dl: tuple[float, ...]
    served_frac_aligned_total: tuple[float, ...]
    served_frac_misaligned_total: tuple[float, ...]
    served_share: tuple[float, ...]
    new_tx_bits: int
    acked_bits: int
    discarded_bits: int
    inflight_bits: int

    def conservation_holds(self) -> bool:
        return self.new_tx_bits == self.acked_bits + self.discarded_bits + self.inflight_bits

    def as_kv_text(self) -> str:
        lines = []
        for key, value in sorted(vars(self).items()):
            if isinstance(value, tuple):
                for k, v in enumerate(value):
                    lines.append(f"{key}.{k}={v:.6f}")
            elif isinstance(value, float):
                lines.append(f"{key}={value:.6f}")
            else:
                lines.append(f"{key}={value}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LinkTables:
    """Per-(state, UE) channel constants precomputed for the slot loop.

    Row L (one past the last state) holds the no-surface scalar channel
    so that mode "off" shares the lookup path.
    """

    snr_db: np.ndarray  # (L+1, K)
    se: np.ndarray  # (L+1, K)
    rsrp: np.ndarray  # (L+1, K)
    bler: np.ndarray  # (L+1, K, 29)
    aligned_state: tuple[int, ...]  # per-UE index of its own beam state

    @property
    def n_states(self) -> int:
        return self.snr_db.shape[0] - 1


def build_link_tables(
    cfg: ExperimentConfig,
    dist: rc.SamplingDistribution,
    rng_channel: np.random.Generator,
    rician_k_db: float | None = None,
) -> LinkTables:
    g = cfg.geom
    n_ues = len(cfg.ues)
    n_states = len(dist)
    snr_db = np.zeros((n_states + 1, n_ues))
    se = np.zeros((n_states + 1, n_ues))
    rsrp = np.zeros((n_states + 1, n_ues))
    bler_tab = np.zeros((n_states + 1, n_ues, len(MCS_TABLE_64QAM)))
    aligned = []
    for k, ue in enumerate(cfg.ues):
        budget = ch.LinkBudget(
            tx_power_dbm=cfg.tx_power_dbm,
            pathloss_db=ue.pathloss_db,
            noise_dbm=ue.noise_dbm,
            rsrp_offset_db=cfg.rsrp_offset_db,
        )
        h_c = ch.los_cascaded_channel(
            ue.nu_deg,
            ue.psi_deg,
            g.n_h,
            g.n_v,
            g.spacing_ratio,
            amplitude=1.0 / (g.n_h * g.n_v),
            rician_k_db=rician_k_db,
            rng=rng_channel if rician_k_db is not None else None,
            ue_id=k,
        )
        effs = [ch.effective_channel(state, h_c) + ue.direct_leak for state in dist.states]
        effs.append(complex(ue.noris_gain))
        for s, h_eff in enumerate(effs):
            lin = ch.snr_linear(h_eff, budget)
            snr_db[s, k] = 10.0 * math.log10(lin) if lin > 0 else -np.inf
            se[s, k] = ch.spectral_efficiency(lin)
            rsrp[s, k] = ch.rsrp_dbm(h_eff, budget)
            for e in MCS_TABLE_64QAM:
                bler_tab[s, k, e.index] = la_mod.bler(
                    snr_db[s, k], e.index, MCS_TABLE_64QAM, cfg.la.slope, cfg.la.impl_margin_db
                )
        try:
            aligned.append(rc.genie_state_for(ue, dist))
        except LookupError:
            aligned.append(-1)
    return LinkTables(snr_db=snr_db, se=se, rsrp=rsrp, bler=bler_tab, aligned_state=tuple(aligned))


def build_distribution(cfg: ExperimentConfig) -> rc.SamplingDistribution:
    g = cfg.geom
    offsets = design_phase_offsets(g.n_h, g.n_v) if g.dither else None
    angles = cfg.ris.angles if cfg.ris.angles is not None else [
        (ue.nu_deg, ue.psi_deg) for ue in cfg.ues
    ]
    states = [
        rc.upa_profile(nu, psi, g.n_h, g.n_v, g.spacing_ratio, offsets) for nu, psi in angles
    ]
    probs = list(cfg.ris.probs) if cfg.ris.probs is not None else [1.0 / len(states)] * len(states)
    return rc.SamplingDistribution(states=states, probs=probs)


def run(cfg: ExperimentConfig) -> tuple[list[SlotRecord], RunSummary]:
    """Simulate one configuration; returns the slot trace and summary.

    Summary statistics cover slots at or after the warm-up boundary;
    the bit-conservation counters cover the whole run.
    """
    from .config import validate

    validate(cfg)
    n_ues = len(cfg.ues)
    alpha, ts_slots = scaled(cfg)
    n_slots = round(cfg.sim.duration_s * 1000.0 / SLOT_MS)
    warmup_slot = round(cfg.sim.warmup_s * 1000.0 / SLOT_MS)
    window_slots = max(1, round(cfg.la.window_ms / SLOT_MS / cfg.sim.ts_scaling))
    cqi_slots = max(1, round(cfg.la.cqi_period_ms / SLOT_MS / cfg.sim.ts_scaling))

    seed_root = np.random.SeedSequence(cfg.sim.seed)
    ss_channel, ss_blocks, ss_ris = seed_root.spawn(3)
    rng_channel = np.random.default_rng(ss_channel)
    rng_blocks = np.random.default_rng(ss_blocks)
    ris_seed = cfg.ris.seed if cfg.ris.seed is not None else int(ss_ris.generate_state(1)[0])

    dist = build_distribution(cfg)
    rician = cfg.chan.rician_k_db
    coherence = cfg.chan.coherence_slots if rician is not None else 0
    tables = build_link_tables(cfg, dist, rng_channel, rician)
    off_row = tables.n_states  # lookup row for mode "off"
    mode = cfg.ris.mode
    if mode == "genie" and any(a < 0 for a in tables.aligned_state):
        from .config import ConfigError

        raise ConfigError("ris.mode: genie requires a state aligned to every UE (ris.angles)")
    policy = rc.SwitchPolicy(
        mode=mode if mode in ("periodic", "iid") else "periodic",
        ts_slots=ts_slots,
        seed=ris_seed,
        offset_slots=cfg.ris.offset_slots,
    )

    pf_cfg = sched_mod.PfConfig(alpha=alpha, ewma_floor=cfg.sched.floor)
    sched_states = [sched_mod.UeSchedState(t_avg=cfg.sched.floor) for _ in range(n_ues)]
    la_states = [LinkAdaptState(mcs=cfg.la.mcs_min, mcs_min=cfg.la.mcs_min) for _ in range(n_ues)]
    harq: list[HarqProcess | None] = [None] * n_ues
    stats = [UeRunStats() for _ in range(n_ues)]

    rate_est = [0.0] * n_ues  # CQI-cadence rate estimates driving the scheduler
    trace: list[SlotRecord] = []
    dl_counter = 0
    genie_state = tables.aligned_state[0] if mode == "genie" else 0

    new_tx_bits = acked_bits = discarded_bits = 0
    measured_dl_slots = 0
    measured_slots = 0
    cur_interval = -1
    cur_state = 0

    snr_tab, se_tab, rsrp_tab, bler_tab = tables.snr_db, tables.se, tables.rsrp, tables.bler
    aligned_state = tables.aligned_state
    bler_draw = rng_blocks.random  # one uniform per transmission

    for t in range(n_slots):
        # Scatter evolves on its own coherence grid, from its own stream.
        if coherence > 0 and t > 0 and t % coherence == 0:
            tables = build_link_tables(cfg, dist, rng_channel, rician)
            snr_tab, se_tab, rsrp_tab, bler_tab = (
                tables.snr_db, tables.se, tables.rsrp, tables.bler,
            )

        if mode == "off":
            state = -1
            row = off_row
        elif mode == "genie":
            state = genie_state
            row = state
        else:
            # State draws are per switching interval; cache across slots.
            interval = (t + policy.offset_slots) // policy.ts_slots
            if interval != cur_interval:
                cur_interval = interval
                cur_state = rc.state_at_slot(t, policy, dist)
            state = cur_state
            row = state

        # CQI cadence: refresh the scheduler-side rate estimates and caps
        # from the channel each UE currently measures.
        if t % cqi_slots == 0:
            for k in range(n_ues):
                meas_row = aligned_state[k] if mode == "genie" else row
                cap = la_mod.cqi_update(
                    snr_tab[meas_row, k],
                    MCS_TABLE_64QAM,
                    cfg.la.cqi_backoff_db,
                    cfg.la.impl_margin_db,
                    cfg.la.mcs_min,
                )
                la_states[k].mcs_max_from_cqi = cap
                la_states[k].clamp()
                rate_est[k] = se_tab[meas_row, k]

        kind, symbols = slot_kind(t)
        in_window = t >= warmup_slot
        if in_window:
            measured_slots += 1

        if kind == UL:
            trace.append(
                SlotRecord(t, t * SLOT_MS, state, None, tuple(rsrp_tab[row]), None, None, 0, "idle", False)
            )
            if (t + 1) % window_slots == 0:
                for k in range(n_ues):
                    m = la_mod.measure_bler(la_states[k].window())
                    la_mod.step_mcs(la_states[k], m, cfg.la.bler_low, cfg.la.bler_high)
                    la_states[k].reset_window()
            continue

        if in_window:
            measured_dl_slots += 1

        # UE selection: pending retransmissions preempt the policy.
        ue = next((k for k in range(n_ues) if sched_states[k].pending_retx), None)
        if ue is None:
            if cfg.sched.kind == "rr":
                ue = sched_mod.rr_select(dl_counter, n_ues)
            else:
                ue = sched_mod.select_ue(sched_states, rate_est, pf_cfg)
        dl_counter += 1

        if mode == "genie":
            state = aligned_state[ue]
            row = state
            genie_state = state

        proc = harq[ue]
        if proc is not None:
            mcs_used = proc.mcs_used
            tb = proc.tb_bits
            is_retx = True
        else:
            mcs_used = la_states[ue].mcs
            tb = tb_bits(mcs_used, MCS_TABLE_64QAM, cfg.sim.prbs, symbols)
            is_retx = False
            proc = HarqProcess(tb_bits=tb, mcs_used=mcs_used)
            harq[ue] = proc
            new_tx_bits += tb

        nack = bler_draw() < bler_tab[row, ue, mcs_used]
        if nack:
            decision = la_mod.harq_on_nack(proc)
            if decision == la_mod.RETRANSMIT:
                sched_states[ue].pending_retx = True
            else:
                discarded_bits += proc.tb_bits
                harq[ue] = None
                sched_states[ue].pending_retx = False
        else:
            acked_bits += proc.tb_bits
            if in_window:
                stats[ue].acked_bits += proc.tb_bits
            harq[ue] = None
            sched_states[ue].pending_retx = False

        la_states[ue].win_scheduled += 1
        if is_retx:
            la_states[ue].win_retx += 1

        sched_states[ue].served_slots += 1
        served_aligned = state == aligned_state[ue]
        if served_aligned:
            sched_states[ue].served_slots_aligned += 1
        if in_window:
            st = stats[ue]
            st.scheduled += 1
            if is_retx:
                st.retx += 1
            if served_aligned:
                st.served_aligned += 1
            else:
                st.served_misaligned += 1
            for k in range(n_ues):
                sk = stats[k]
                if row == aligned_state[k]:
                    sk.rsrp_aligned_sum += rsrp_tab[row, k]
                    sk.rsrp_aligned_n += 1
                else:
                    sk.rsrp_misaligned_sum += rsrp_tab[row, k]
                    sk.rsrp_misaligned_n += 1

        sched_mod.ewma_update(sched_states, ue, rate_est, alpha, cfg.sched.floor)

        trace.append(
            SlotRecord(
                t,
                t * SLOT_MS,
                state,
                ue,
                tuple(rsrp_tab[row]),
                float(snr_tab[row, ue]),
                mcs_used,
                tb,
                "nack" if nack else "ack",
                is_retx,
            )
        )

        if (t + 1) % window_slots == 0:
            for k in range(n_ues):
                m = la_mod.measure_bler(la_states[k].window())
                la_mod.step_mcs(la_states[k], m, cfg.la.bler_low, cfg.la.bler_high)
                la_states[k].reset_window()

    inflight_bits = sum(p.tb_bits for p in harq if p is not None)
    measured_s = max(cfg.sim.duration_s - cfg.sim.warmup_s, 0.0) if n_slots else 0.0
    tput = tuple(
        (s.acked_bits / measured_s / 1e6) if measured_s > 0 else 0.0 for s in stats
    )
    total_served = sum(s.scheduled for s in stats)
    summary = RunSummary(
        duration_s=cfg.sim.duration_s,
        measured_s=measured_s,
        n_slots=n_slots,
        throughput_mbps=tput,
        aggregate_mbps=float(sum(tput)),
        long_run_bler=tuple(
            (s.retx / s.scheduled) if s.scheduled else 0.0 for s in stats
        ),
        mean_rsrp_aligned_dbm=tuple(
            (s.rsrp_aligned_sum / s.rsrp_aligned_n) if s.rsrp_aligned_n else float("nan")
            for s in stats
        ),
        mean_rsrp_misaligned_dbm=tuple(
            (s.rsrp_misaligned_sum / s.rsrp_misaligned_n) if s.rsrp_misaligned_n else float("nan")
            for s in stats
        ),
        served_frac_aligned_dl=tuple(
            (s.served_aligned / measured_dl_slots) if measured_dl_slots else 0.0 for s in stats
        ),
        served_frac_misaligned_dl=tuple(
            (s.served_misaligned / measured_dl_slots) if measured_dl_slots else 0.0 for s in stats
        ),
        served_frac_aligned_total=tuple(
            (s.served_aligned / measured_slots) if measured_slots else 0.0 for s in stats
        ),
        served_frac_misaligned_total=tuple(
            (s.served_misaligned / measured_slots) if measured_slots else 0.0 for s in stats
        ),
        served_share=tuple(
            (s.scheduled / total_served) if total_served else 0.0 for s in stats
        ),
        new_tx_bits=new_tx_bits,
        acked_bits=acked_bits,
        discarded_bits=discarded_bits,
        inflight_bits=inflight_bits,
    )
    return trace, summary


def scheduling_histogram(
    trace: list[SlotRecord],
    n_ues: int,
    aligned_state: tuple[int, ...] | None = None,
    start_slot: int = 0,
) -> list[dict[str, float]]:
    """Per-UE served-slot fractions split by surface alignment.

    ``aligned_fraction``/``misaligned_fraction`` use the DL-schedulable
    slots as denominator; the ``*_total`` variants use all slots from
    ``start_slot`` on.  By default state ``k`` counts as aligned to
    UE ``k``.
    """
    if aligned_state is None:
        aligned_state = tuple(range(n_ues))
    rows = [r for r in trace if r.slot >= start_slot]
    total = len(rows)
    dl_total = sum(1 for r in rows if slot_kind(r.slot)[0] != UL)
    counts_aligned = [0] * n_ues
    counts_mis = [0] * n_ues
    for r in rows:
        if r.ue is None:
            continue
        if r.ris_state == aligned_state[r.ue]:
            counts_aligned[r.ue] += 1
        else:
            counts_mis[r.ue] += 1
    out = []
    for k in range(n_ues):
        out.append(
            {
                "aligned_fraction": counts_aligned[k] / dl_total if dl_total else 0.0,
                "misaligned_fraction": counts_mis[k] / dl_total if dl_total else 0.0,
                "aligned_fraction_total": counts_aligned[k] / total if total else 0.0,
                "misaligned_fraction_total": counts_mis[k] / total if total else 0.0,
            }
        )
    return out


def sweep_alpha(
    cfg: ExperimentConfig, alphas: list[float]
) -> list[dict[str, float]]:
    """One independent run per EWMA weight, shared geometry and pairing.

    Each run gets an independent seed derived from the master seed; the
    configured time-compression factor applies to every point, so the
    (alpha, switching-interval) pairing is preserved across the sweep.
    """
    if not alphas:
        raise ValueError("alphas must be non-empty")
    from dataclasses import replace

    rows = []
    for i, alpha in enumerate(alphas):
        sub_seed = int(np.random.SeedSequence((cfg.sim.seed, i)).generate_state(1)[0])
        cfg_i = replace(
            cfg,
            sched=replace(cfg.sched, alpha=alpha),
            sim=replace(cfg.sim, seed=sub_seed),
        )
        _, summary = run(cfg_i)
        rows.append(
            {
                "alpha": alpha,
                "inv_alpha": 1.0 / alpha,
                "aggregate_mbps": summary.aggregate_mbps,
                **{f"throughput{k}_mbps": v for k, v in enumerate(summary.throughput_mbps)},
                **{f"served_share{k}": v for k, v in enumerate(summary.served_share)},
            }
        )
    return rows


def write_trace_csv(trace: list[SlotRecord], path, n_ues: int | None = None) -> None:
    """Exact trace schema: slot,time_ms,ris_state,ue,rsrp0_dbm,...,snr_db,mcs,tb_bits,outcome,is_retx."""
    if n_ues is None:
        n_ues = len(trace[0].rsrp_dbm) if trace else 0
    rsrp_cols = ",".join(f"rsrp{k}_dbm" for k in range(n_ues))
    lines = [f"slot,time_ms,ris_state,ue,{rsrp_cols},snr_db,mcs,tb_bits,outcome,is_retx"]
    for r in trace:
        rsrps = ",".join(f"{v:.4f}" for v in r.rsrp_dbm)
        lines.append(
            f"{r.slot},{r.time_ms:.1f},{r.ris_state},"
            f"{'' if r.ue is None else r.ue},{rsrps},"
            f"{'' if r.snr_db is None else f'{r.snr_db:.4f}'},"
            f"{'' if r.mcs is None else r.mcs},{r.tb_bits},{r.outcome},{int(r.is_retx)}"
        )
    with open(path, "w", newline="") as f:
        f.write("\n".join(lines) + "\n")
