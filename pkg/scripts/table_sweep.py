#!/usr/bin/env python3
"""Regime table sweep: fitted exponents per competition exponent s.

Writes a summary table and, with --samples, plot-ready (s, beta, value) rows.

    python3 scripts/table_sweep.py --observable p --samples sweep.csv
"""
import argparse
import csv
import sys

from orthoweak.asymptotics import check_table_row
from orthoweak.model import ObservableA
from orthoweak.probe import GaussianProbe, overlaps, pointer_observable

DEFAULT_S = "0.05,0.3,0.5,0.7,0.95,1,1.05,1.5,2,3,-0.5,-1,-2,none"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--s", default=DEFAULT_S, help="comma-separated exponents; 'none' holds x fixed")
    ap.add_argument("--observable", default="q")
    ap.add_argument("--g", type=float, default=0.3)
    ap.add_argument("--a1", type=float, default=1.0)
    ap.add_argument("--a2", type=float, default=-0.5)
    ap.add_argument("--theta", type=float, default=0.7)
    ap.add_argument("--x", type=float, default=0.6)
    ap.add_argument("--mean", type=float, default=0.2)
    ap.add_argument("--sigma", type=float, default=1.0)
    ap.add_argument("--kick", type=float, default=0.3)
    ap.add_argument("--samples", help="CSV file for the raw sweep samples")
    args = ap.parse_args(argv)

    ov = overlaps(GaussianProbe(args.mean, args.sigma, args.kick), args.g,
                  ObservableA(args.a1, args.a2), pointer_observable(args.observable))
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["s", "regime", "prediction", "predicted_exponent", "fitted", "limit", "passed"])
    samples = []
    all_ok = True
    for token in args.s.split(","):
        s = None if token.strip() == "none" else float(token)
        row = check_table_row(s, ov, args.theta, args.x if s is None else None)
        all_ok &= row.passed
        rep = row.report
        out.writerow([token.strip(), rep.regime.value, rep.table_label, rep.leading_exponent,
                      "" if row.fitted is None else f"{row.fitted:.6f}", f"{rep.predicted_limit:.17g}", row.passed])
        samples.extend((token.strip(), b, v) for b, v in row.samples)
    if args.samples:
        with open(args.samples, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["s", "beta", "expectation"])
            w.writerows((s, f"{b:.17g}", f"{v:.17g}") for s, b, v in samples)
    return 0 if all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
