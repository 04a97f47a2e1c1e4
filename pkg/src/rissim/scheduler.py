"""Per-slot UE selection: proportional fair with EWMA averaging, plus a
round-robin baseline.  Pending retransmissions preempt both policies.

The EWMA is applied literally at every scheduling opportunity: the
average of an unscheduled UE decays toward the floor, which is what
makes a starved UE's metric rise over time.
"""

from __future__ import annotations

from dataclasses import dataclass

EWMA_FLOOR = 1e-6


@dataclass
class UeSchedState:
    """Scheduler-side state of one UE."""

    t_avg: float = EWMA_FLOOR
    last_inst_se: float = 0.0
    pending_retx: bool = False
    served_slots: int = 0
    served_slots_aligned: int = 0


@dataclass(frozen=True)
class PfConfig:
    alpha: float
    ewma_floor: float = EWMA_FLOOR
    tie_rule: str = "lowest_index"

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")


def pf_metric(inst_se: float, t_avg: float, floor: float = EWMA_FLOOR) -> float:
    """Instantaneous-to-average rate ratio with a division floor."""
    if inst_se < 0.0:
        raise ValueError(f"inst_se must be non-negative, got {inst_se}")
    return inst_se / max(t_avg, floor)


def select_ue(states: list[UeSchedState], inst_se: list[float], cfg: PfConfig) -> int:
    """Index of the UE to serve this slot.

    Any UE with a pending retransmission preempts the metric (lowest
    index among them); otherwise the argmax of the PF metric, ties
    broken to the lowest index.
    """
    if not states or len(states) != len(inst_se):
        raise ValueError("states and inst_se must be non-empty and the same length")
    for k, s in enumerate(states):
        if s.pending_retx:
            return k
    best, best_metric = 0, -1.0
    for k, (s, se) in enumerate(zip(states, inst_se)):
        m = pf_metric(se, s.t_avg, cfg.ewma_floor)
        if m > best_metric:
            best, best_metric = k, m
    return best


def ewma_update(
    states: list[UeSchedState],
    scheduled: int,
    inst_se: list[float],
    alpha: float,
    floor: float = EWMA_FLOOR,
) -> list[UeSchedState]:
    """One EWMA tick: every UE decays, the served UE adds its rate."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    for k, s in enumerate(states):
        target = alpha * inst_se[k] if k == scheduled else 0.0
        s.t_avg = max((1.0 - alpha) * s.t_avg + target, floor)
        s.last_inst_se = inst_se[k]
    return states


def rr_select(dl_slot_counter: int, n_ues: int) -> int:
    """Round-robin over a downlink-slot counter."""
    if n_ues < 1:
        raise ValueError(f"n_ues must be >= 1, got {n_ues}")
    return dl_slot_counter % n_ues
