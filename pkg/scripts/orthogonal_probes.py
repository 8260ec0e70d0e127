#!/usr/bin/env python3
"""alpha = 0 readings for several probe shapes by three routes.

Shows that symmetric and antisymmetric probes give g (a1 + a2)/2 and 0,
while skewed and complex probes move away from those values.

    python3 scripts/orthogonal_probes.py --g 0.1 0.5 1.0
"""
import argparse
import sys

import numpy as np

from orthoweak.exact import expectation_orthogonal, oracle_expectation
from orthoweak.model import ObservableA, make_selection
from orthoweak.probe import P, Q, GaussianProbe, derivative_integrals, grid_probe, overlaps
from orthoweak.series import orthogonal_p_series, orthogonal_q_series, symmetry_shortcut

DOMAIN = (-12.0, 12.0)
Q_GRID = DOMAIN[0] + 24.0 / 4096 * np.arange(4096)


def probes():
    def normal(m, s):
        return np.exp(-((Q_GRID - m) ** 2) / (2 * s * s)) / s

    return {
        "gaussian": GaussianProbe(),
        "hermite1": grid_probe(DOMAIN, Q_GRID * np.exp(-Q_GRID**2 / 4)),
        "mixture": grid_probe(DOMAIN, 0.8 * normal(0, 1) + 0.6 * normal(2, 0.5)),
        "cubic": grid_probe(DOMAIN, GaussianProbe()(Q_GRID) * np.exp(0.1j * Q_GRID**3)),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--g", type=float, nargs="+", default=[0.1, 0.5])
    ap.add_argument("--a1", type=float, default=1.0)
    ap.add_argument("--a2", type=float, default=-1.0)
    args = ap.parse_args(argv)
    obs = ObservableA(args.a1, args.a2)
    print("probe,parity,g,observable,formula,series,oracle,series_terms")
    for name, probe in probes().items():
        table = derivative_integrals(probe, 24)
        parity = symmetry_shortcut(probe).value
        for g in args.g:
            for m_op, series in ((Q, orthogonal_q_series), (P, orthogonal_p_series)):
                closed = expectation_orthogonal(overlaps(probe, g, obs, m_op)).expectation
                ser = series(table, g, obs)
                orc = oracle_expectation(make_selection(0.5, 0.0, 0.0), obs, probe, g, m_op).expectation
                print(f"{name},{parity},{g:g},{m_op.tag},{closed:.15g},{ser.value:.15g},{orc:.15g},"
                      f"{ser.terms_used}{'' if ser.converged else '*'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
