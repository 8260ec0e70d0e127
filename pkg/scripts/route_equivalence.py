#!/usr/bin/env python3
"""Closed form against grid oracle on a seeded random batch, plus timing.

    python3 scripts/route_equivalence.py --count 1000 --seed 2024
"""
import argparse
import sys
import time

import numpy as np

from orthoweak.checks import ROUTE_TOL, route_equivalence


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--tol", type=float, default=ROUTE_TOL)
    args = ap.parse_args(argv)

    t0 = time.perf_counter()
    rows = route_equivalence(args.seed, args.count)
    elapsed = time.perf_counter() - t0
    for tag in ("q", "p"):
        errs = np.array([r.scaled_error for r in rows if r.observable == tag])
        print(f"{tag}: n={errs.size} median={np.median(errs):.2e} p99={np.quantile(errs, 0.99):.2e} "
              f"max={errs.max():.2e}")
    worst = max(rows, key=lambda r: r.scaled_error)
    print(f"worst case ({worst.observable}): {worst.tuple}")
    print(f"elapsed {elapsed:.2f}s")
    return 0 if worst.scaled_error <= args.tol else 1


if __name__ == "__main__":
    sys.exit(main())
