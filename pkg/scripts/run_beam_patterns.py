#!/usr/bin/env python3
"""Far-field cuts of the one-bit surface steered across the scan range.

Writes one angle/gain CSV per steering target and prints the peak,
half-power width and sidelobe level of each pattern.
"""

import sys

from rissim.cli import main

if __name__ == "__main__":
    steer = [str(a) for a in range(0, 61, 5)]
    sys.exit(main(["--out-dir", "out/patterns", "beam-pattern", "--steer-deg", *steer]))
