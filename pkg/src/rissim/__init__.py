"""Slot-level simulator of a switched-reflector 5G NR downlink.

A 32x32 one-bit coded reflecting surface alternates between a small set
of beam states while a proportional-fair MAC scheduler serves two UEs.
The package models the array geometry, the cascaded channel, link
adaptation with HARQ, and the slot-ordered MAC loop, and reproduces the
headline behaviors of that system: beam quality of the one-bit surface,
RSRP alternation, closed-loop BLER regulation, and near-genie throughput
for small EWMA weights.
"""

__version__ = "0.1.0"
