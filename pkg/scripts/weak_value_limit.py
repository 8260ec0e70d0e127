#!/usr/bin/env python3
"""Normalized pointer shifts against the weak value as g shrinks.

    python3 scripts/weak_value_limit.py --alpha 0.3 --x 0.6 --theta 0.9
"""
import argparse
import sys

import numpy as np

from orthoweak.checks import weak_value_limit
from orthoweak.model import ObservableA
from orthoweak.probe import GaussianProbe


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=0.3)
    ap.add_argument("--x", type=float, default=0.6)
    ap.add_argument("--theta", type=float, default=0.9)
    ap.add_argument("--sigma", type=float, default=1.0)
    ap.add_argument("--gmin", type=float, default=1e-6)
    ap.add_argument("--gmax", type=float, default=1e-1)
    args = ap.parse_args(argv)
    gs = tuple(np.geomspace(args.gmax, args.gmin, 6))
    print("observable,g,normalized_shift,weak_value_part,error")
    for lim in weak_value_limit(args.x, args.theta, args.alpha, ObservableA(1, -1), GaussianProbe(0, args.sigma), gs):
        for g, v, e in zip(lim.g, lim.normalized, lim.errors):
            print(f"{lim.observable},{g:.3g},{v:.15g},{lim.target:.15g},{e:.3e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
