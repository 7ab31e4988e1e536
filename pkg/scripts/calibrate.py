"""Reproduce the frozen constants C_CELLS (cutting size) and C_REP (repetition size).

Calibration seeds are disjoint from the acceptance seeds.

    python3 scripts/calibrate.py cells
    python3 scripts/calibrate.py rep
"""

import argparse
import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from acceptance_runs import DELTA_STAR, repetition_instance  # noqa: E402
from helpers import random_lines  # noqa: E402
from multicover.cutting import build_cutting  # noqa: E402
from multicover.harness import run_method  # noqa: E402


def cells(seeds):
    for r in (5, 10, 20):
        worst = max(len(build_cutting(random_lines(200, s), r, seed=s)) / r**2 for s in seeds)
        print(f"r={r}: max cells/r^2 = {worst:.2f}")


def rep(seeds):
    worst = 0.0
    for s in seeds:
        _, rec = run_method(repetition_instance(s), "vc-rep", s)
        if rec.f > 0:
            worst = max(worst, rec.size / (DELTA_STAR * rec.f * math.log(rec.f + 2)))
    print(f"max size/(delta* f ln(f+2)) = {worst:.3f}")


def main():
    p = argparse.ArgumentParser()
    p.add_argument("what", choices=["cells", "rep"])
    args = p.parse_args()
    if args.what == "cells":
        cells(range(1000, 1050))
    else:
        rep(range(10000, 10200))


if __name__ == "__main__":
    main()
