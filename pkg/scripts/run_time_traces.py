#!/usr/bin/env python3
"""Two-UE alternating-surface run: full slot trace, summary, and the
served-slot histogram (the time-series behind the RSRP / BLER / MCS /
throughput plots)."""

import sys

from rissim.cli import main

if __name__ == "__main__":
    sys.exit(main(["--out-dir", "out/traces", "schedule", "--alpha", "5e-5"]))
