#!/usr/bin/env python3
"""Regenerate the shipped quasi-optimal method presets.

Usage: python scripts/build_presets.py [out_dir]

Each preset is a method built on the disc B(-r, r) for the radii in
awilt.tame.PRESET_ROWS, saved in the standard parameter-file format with
its measured epsilon, max weight, and eta in the metadata.
"""

import sys
import time

from awilt.tame import build_presets


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "src/awilt/presets"
    t0 = time.time()
    for path in build_presets(out_dir):
        print(path)
    print(f"done in {time.time() - t0:.1f}s")


if __name__ == "__main__":
    main()
