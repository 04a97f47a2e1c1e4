"""Rate adaptation: MCS table, block-error model, stepping, CQI cap, HARQ.

The block-error abstraction is a logistic curve in SNR (dB) anchored at
a per-MCS threshold: the Shannon limit of the entry's spectral
efficiency plus an implementation margin.  An outer loop steps the MCS
index by one whenever the measured retransmission ratio over a tumbling
window leaves the [low, high] band; the CQI report caps the usable
index on a slower cadence.  A failed transport block is retransmitted
at the same MCS at most three times before it is discarded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

# Outer-loop defaults; overridable per run through the la.* config keys.
BLER_LOW = 0.05
BLER_HIGH = 0.15
MCS_MIN = 3
DEFAULT_SLOPE = 2.0
DEFAULT_IMPL_MARGIN_DB = 3.0
DEFAULT_CQI_BACKOFF_DB = 2.0
MAX_ATTEMPTS = 4  # 1 initial transmission + 3 retransmissions


@dataclass(frozen=True)
class McsEntry:
    index: int
    modulation_order: int
    code_rate: float
    se: float  # bits/s/Hz


class McsTable:
    """Ordered MCS entries with cached per-entry SNR thresholds."""

    def __init__(self, entries: list[McsEntry]):
        self.entries = sorted(entries, key=lambda e: e.index)
        self._by_index = {e.index: e for e in self.entries}

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def entry(self, index: int) -> McsEntry:
        try:
            return self._by_index[index]
        except KeyError:
            raise ValueError(f"invalid MCS index {index}") from None

    def se(self, index: int) -> float:
        return self.entry(index).se

    @property
    def max_index(self) -> int:
        return self.entries[-1].index

    def threshold_db(self, index: int, impl_margin_db: float = DEFAULT_IMPL_MARGIN_DB) -> float:
        """SNR anchor of the block-error curve for one entry."""
        return 10.0 * math.log10(2.0 ** self.se(index) - 1.0) + impl_margin_db


# 64QAM PDSCH table: 29 entries, modulation orders 2/4/6, peak 5.5547.
MCS_TABLE_64QAM = McsTable(
    [
        McsEntry(0, 2, 120 / 1024, 0.2344),
        McsEntry(1, 2, 157 / 1024, 0.3066),
        McsEntry(2, 2, 193 / 1024, 0.3770),
        McsEntry(3, 2, 251 / 1024, 0.4902),
        McsEntry(4, 2, 308 / 1024, 0.6016),
        McsEntry(5, 2, 379 / 1024, 0.7402),
        McsEntry(6, 2, 449 / 1024, 0.8770),
        McsEntry(7, 2, 526 / 1024, 1.0273),
        McsEntry(8, 2, 602 / 1024, 1.1758),
        McsEntry(9, 2, 679 / 1024, 1.3262),
        McsEntry(10, 4, 340 / 1024, 1.3281),
        McsEntry(11, 4, 378 / 1024, 1.4766),
        McsEntry(12, 4, 434 / 1024, 1.6953),
        McsEntry(13, 4, 490 / 1024, 1.9141),
        McsEntry(14, 4, 553 / 1024, 2.1602),
        McsEntry(15, 4, 616 / 1024, 2.4063),
        McsEntry(16, 4, 658 / 1024, 2.5703),
        McsEntry(17, 6, 438 / 1024, 2.5664),
        McsEntry(18, 6, 466 / 1024, 2.7305),
        McsEntry(19, 6, 517 / 1024, 3.0293),
        McsEntry(20, 6, 567 / 1024, 3.3223),
        McsEntry(21, 6, 616 / 1024, 3.6094),
        McsEntry(22, 6, 666 / 1024, 3.9023),
        McsEntry(23, 6, 719 / 1024, 4.2129),
        McsEntry(24, 6, 772 / 1024, 4.5234),
        McsEntry(25, 6, 822 / 1024, 4.8164),
        McsEntry(26, 6, 873 / 1024, 5.1152),
        McsEntry(27, 6, 910 / 1024, 5.3320),
        McsEntry(28, 6, 948 / 1024, 5.5547),
    ]
)


def bler(
    snr_db: float,
    mcs: int,
    table: McsTable = MCS_TABLE_64QAM,
    model_slope: float = DEFAULT_SLOPE,
    impl_margin_db: float = DEFAULT_IMPL_MARGIN_DB,
) -> float:
    """Block-error probability: logistic in SNR, midpoint at the entry threshold.

    Strictly decreasing in SNR and, at fixed SNR, non-decreasing in the
    MCS index (thresholds grow with spectral efficiency).
    """
    thr = table.threshold_db(mcs, impl_margin_db)
    x = model_slope * (snr_db - thr)
    # Guard the exp against overflow at extreme SNR offsets.
    if x > 700.0:
        return 0.0
    if x < -700.0:
        return 1.0
    return 1.0 / (1.0 + math.exp(x))


def measure_bler(window: tuple[int, int]) -> float:
    """Retransmission ratio of a (scheduled_count, retx_count) window."""
    scheduled, retx = window
    if scheduled <= 0:
        return 0.0
    return retx / scheduled


@dataclass
class LinkAdaptState:
    """Per-UE outer-loop state."""

    mcs: int = MCS_MIN
    mcs_min: int = MCS_MIN
    mcs_max_from_cqi: int = 28
    win_scheduled: int = 0
    win_retx: int = 0

    def clamp(self) -> None:
        self.mcs = min(max(self.mcs, self.mcs_min), self.mcs_max_from_cqi)

    def window(self) -> tuple[int, int]:
        return (self.win_scheduled, self.win_retx)

    def reset_window(self) -> None:
        self.win_scheduled = 0
        self.win_retx = 0


def step_mcs(
    state: LinkAdaptState,
    measured_bler: float,
    bler_low: float = BLER_LOW,
    bler_high: float = BLER_HIGH,
) -> LinkAdaptState:
    """One outer-loop step at a window boundary: +-1 and clamp."""
    if measured_bler < bler_low:
        state.mcs += 1
    elif measured_bler > bler_high:
        state.mcs -= 1
    state.clamp()
    return state


def cqi_update(
    snr_db: float,
    table: McsTable = MCS_TABLE_64QAM,
    cqi_backoff_db: float = DEFAULT_CQI_BACKOFF_DB,
    impl_margin_db: float = DEFAULT_IMPL_MARGIN_DB,
    mcs_min: int = MCS_MIN,
) -> int:
    """Channel-quality cap: largest index whose threshold fits under
    ``snr_db - cqi_backoff_db``, floored at ``mcs_min``."""
    cap = mcs_min
    limit = snr_db - cqi_backoff_db
    for e in table.entries:
        if e.index < mcs_min:
            continue
        if table.threshold_db(e.index, impl_margin_db) <= limit:
            cap = e.index
    return cap


@dataclass
class HarqProcess:
    """Stop-and-wait process for one in-flight transport block."""

    tb_bits: int
    mcs_used: int
    attempts: int = 1
    is_retx: bool = field(default=False, compare=False)


RETRANSMIT = "retransmit"
DISCARD = "discard"


def harq_on_nack(proc: HarqProcess) -> str:
    """Advance a process after a NACK: retransmit at the same MCS until
    the attempt budget is spent, then discard."""
    if proc.attempts < MAX_ATTEMPTS:
        proc.attempts += 1
        proc.is_retx = True
        return RETRANSMIT
    return DISCARD
