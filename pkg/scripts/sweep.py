#!/usr/bin/env python3
"""Run one of the standard schedule sweeps and print a one-line verdict.

Usage: python scripts/sweep.py [alg1|alg2|alg3|afek|naive] [--fast]
"""
import sys
import time

from snaplab import ExploreConfig, Exhaustive, OpScript, explore
from snaplab.harness import DfsBounded, RandomWalks

SWEEPS = {
    "alg1": ("jayanti1", 2, [[("write", 0, 2)], [("write", 1, 4)], [("scan",)]],
             Exhaustive(300_000), ("F", "S", "CHAIN")),
    "alg2": ("jayanti2", 1, [[("write", 0, 2)], [("write", 0, 3)], [("scan",)]],
             DfsBounded(200_000), ("M", "M+", "L", "F+", "F", "S", "CHAIN")),
    "alg3": ("jayanti3", 1, [[("write", 0, 2)], [("scan",)], [("scan",)]],
             RandomWalks(20260808, 10_000), ("M", "M+", "L", "F+", "F", "S", "CHAIN")),
    "afek": ("afek", 2, [[("write", 0, 1), ("write", 0, 2)], [("scan",)]],
             Exhaustive(300_000), ("F", "S", "CHAIN")),
    "naive": ("naive", 2, [[("scan",)], [("write", 0, 2)], [("write", 1, 3)]],
              Exhaustive(300_000), ("S",)),
}

FAST = {"alg2": DfsBounded(10_000), "alg3": RandomWalks(20260808, 500)}


def main() -> int:
    name = sys.argv[1] if len(sys.argv) > 1 else "alg1"
    fast = "--fast" in sys.argv
    algorithm, n, threads, mode, suites = SWEEPS[name]
    if fast and name in FAST:
        mode = FAST[name]
    cfg = ExploreConfig(algorithm, n, OpScript.from_lists(threads), mode,
                        suites=suites, linearize=True, oracle=True)
    t0 = time.perf_counter()
    summary = explore(cfg)
    dt = time.perf_counter() - t0
    print(f"{name}: {summary.schedules} schedules in {dt:.1f}s; "
          f"violations={summary.violations} lin_failures={summary.lin_failures} "
          f"oracle_mismatches={summary.oracle_mismatches}")
    if name == "naive":
        print("  (the naive sweep is the negative control: failures expected)")
        return 0
    return 0 if summary.clean else 1


if __name__ == "__main__":
    sys.exit(main())
