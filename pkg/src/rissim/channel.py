"""Cascaded channels through the reflecting surface and link-budget maps.

A UE's cascaded channel is the element-wise product of the feeder-side
and UE-side channel vectors.  Under a surface configuration the
effective link collapses to a complex scalar, which the link budget
maps to SNR, Shannon spectral efficiency and an RSRP reading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .array_model import QUARTER_WAVE, RisPhaseProfile, steering_vector

RSRP_FLOOR_DBM = -156.0  # NR reporting floor


@dataclass(frozen=True)
class CascadedChannel:
    """Per-UE cascaded channel vector with its angular coordinates."""

    h_c: np.ndarray
    ue_id: int = 0
    nu_deg: float = float("nan")
    psi_deg: float = float("nan")

    def __len__(self) -> int:
        return self.h_c.size


@dataclass(frozen=True)
class LinkBudget:
    """Scalar budget that converts an effective channel gain to SNR/RSRP.

    ``noise_dbm`` is the noise power over the measurement bandwidth and
    ``rsrp_offset_db`` a one-time calibration constant.
    """

    tx_power_dbm: float
    pathloss_db: float
    noise_dbm: float
    rsrp_offset_db: float = 0.0


def cascade(
    h1: np.ndarray,
    h2k: np.ndarray,
    ue_id: int = 0,
    nu_deg: float = float("nan"),
    psi_deg: float = float("nan"),
) -> CascadedChannel:
    """Element-wise (Hadamard) product of the two channel segments."""
    h1 = np.asarray(h1, dtype=complex)
    h2k = np.asarray(h2k, dtype=complex)
    if h1.shape != h2k.shape:
        raise ValueError(f"segment lengths differ: {h1.shape} vs {h2k.shape}")
    return CascadedChannel(h_c=h1 * h2k, ue_id=ue_id, nu_deg=nu_deg, psi_deg=psi_deg)


def los_cascaded_channel(
    nu_deg: float,
    psi_deg: float,
    n_h: int,
    n_v: int,
    spacing_ratio: float = QUARTER_WAVE,
    amplitude: float = 1.0,
    rician_k_db: float | None = None,
    rng: np.random.Generator | None = None,
    ue_id: int = 0,
) -> CascadedChannel:
    """Line-of-sight cascaded channel at angles (nu, psi), broadside feed.

    The deterministic component is ``amplitude`` times the planar-array
    response.  When ``rician_k_db`` is given, an independent complex
    Gaussian scatter term is added with per-element power
    ``amplitude**2 / K`` so the line-of-sight-to-scatter power ratio
    equals the K-factor.
    """
    if amplitude <= 0.0:
        raise ValueError(f"amplitude must be positive, got {amplitude}")
    los = amplitude * np.kron(
        steering_vector(nu_deg, n_h, spacing_ratio),
        steering_vector(psi_deg, n_v, spacing_ratio),
    )
    if rician_k_db is not None:
        if rng is None:
            raise ValueError("rician_k_db requires an rng")
        k_lin = 10.0 ** (rician_k_db / 10.0)
        sigma = amplitude / math.sqrt(k_lin)
        n = n_h * n_v
        scatter = sigma * (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2.0)
        los = los + scatter
    return CascadedChannel(h_c=los, ue_id=ue_id, nu_deg=nu_deg, psi_deg=psi_deg)


def effective_channel(phi, h_c) -> complex:
    """Scalar effective channel of a surface configuration over ``h_c``.

    ``phi`` may be a raw complex phase vector (the conjugated-phase
    convention: the result is ``phi^H h``, maximal and real when
    ``phi`` matches the element-wise phase of ``h``) or a
    RisPhaseProfile, in which case the realized one-bit reflection
    weights are applied.
    """
    h = h_c.h_c if isinstance(h_c, CascadedChannel) else np.asarray(h_c, dtype=complex)
    if isinstance(phi, RisPhaseProfile):
        w = phi.reflection_weights()
        if w.size != h.size:
            raise ValueError(f"profile length {w.size} does not match channel length {h.size}")
        return complex(np.sum(w * h))
    phi = np.asarray(phi, dtype=complex)
    if phi.size != h.size:
        raise ValueError(f"phase-vector length {phi.size} does not match channel length {h.size}")
    return complex(np.vdot(phi, h))


def snr_linear(h_k: complex, budget: LinkBudget) -> float:
    """Received SNR (linear) of an effective channel under a budget."""
    gain = 10.0 ** ((budget.tx_power_dbm - budget.pathloss_db - budget.noise_dbm) / 10.0)
    return float(abs(h_k) ** 2 * gain)


def spectral_efficiency(snr: float) -> float:
    """Shannon spectral efficiency log2(1 + snr) in bits/s/Hz."""
    if snr < 0.0:
        raise ValueError(f"snr must be non-negative, got {snr}")
    return math.log2(1.0 + snr)


def rsrp_dbm(h_k: complex, budget: LinkBudget) -> float:
    """Reference-signal received power reading, floored at -156 dBm."""
    mag = abs(h_k)
    if mag == 0.0:
        return RSRP_FLOOR_DBM
    value = (
        budget.tx_power_dbm
        - budget.pathloss_db
        + 20.0 * math.log10(mag)
        + budget.rsrp_offset_db
    )
    return max(value, RSRP_FLOOR_DBM)
