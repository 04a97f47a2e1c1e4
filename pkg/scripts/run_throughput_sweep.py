#!/usr/bin/env python3
"""Aggregate throughput versus the EWMA weight, with genie-aided and
no-surface reference rows."""

import sys

from rissim.cli import main

if __name__ == "__main__":
    sys.exit(main(["--out-dir", "out/sweep", "sweep-alpha"]))
