"""Series expansions of the displaced overlaps in derivative integrals.

With G = g (a1 - a2) and the table entries I_n, J_n, K_n of
``probe.derivative_integrals``:

    Re Y12          = sum (-1)^n G^2n/(2n)! I_n
    Re W12 (M = q)  = sum (-1)^n G^2n/(2n)! J_n + g (a1 + a2)/2 * Re Y12
    Re W12 (M = p)  = 2 sum (-1)^n G^2n/(2n)! K_n

and at alpha = 0

    <q> = g (a1 + a2)/2 + sum c_n J_{n+1} / sum c_n I_{n+1}
    <p> = 2 sum c_n K_{n+1} / sum c_n I_{n+1},      c_n = (-1)^n G^2n/(2n+2)!

The module also classifies probe parity and checks the integration-by-parts
identities these expansions rest on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import ObservableA, ValidationError
from .probe import (
    DerivativeIntegralTable,
    GaussianProbe,
    GridProbe,
    ProbeState,
    reflected_about_centre,
    spectral_derivatives,
)

TERM_TOL = 1e-14
MAX_TERMS = 32
PARITY_TOL = 1e-10


class SeriesDegenerateError(ValueError):
    pass


@dataclass(frozen=True)
class SeriesResult:
    value: float
    terms_used: int
    last_term_ratio: float
    converged: bool


def _ratio(term: float, total: float) -> float:
    if term == 0.0:
        return 0.0
    return abs(term) / abs(total) if total != 0.0 else math.inf


def sum_alternating(coeffs, values, limit: int | None = None) -> SeriesResult:
    """Partial sums of sum coeffs[n] * values[n].

    Stops once two consecutive terms fall below 1e-14 of the partial sum, or
    when the table (or ``limit``, at most 32 terms) is exhausted.
    """
    n_avail = min(len(coeffs), len(values), MAX_TERMS if limit is None else limit)
    total = 0.0
    small = 0
    ratio = math.inf
    used = 0
    for n in range(n_avail):
        term = float(coeffs[n] * values[n])
        total += term
        used = n + 1
        ratio = _ratio(term, total)
        small = small + 1 if ratio < TERM_TOL else 0
        if small >= 2:
            return SeriesResult(total, used, ratio, True)
    return SeriesResult(total, used, ratio, ratio < TERM_TOL)


def _coeffs(G: float, count: int, shift: int = 0) -> np.ndarray:
    """(-1)^n G^2n / (2n + 2 shift)! for n < count."""
    out = np.empty(count)
    for n in range(count):
        out[n] = (-1) ** n * G ** (2 * n) / math.factorial(2 * n + 2 * shift)
    return out


def _gap(g: float, obs: ObservableA) -> float:
    return float(g) * (obs.a1 - obs.a2)


def series_re_y12(table: DerivativeIntegralTable, g: float, obs: ObservableA) -> SeriesResult:
    G = _gap(g, obs)
    return sum_alternating(_coeffs(G, table.n_max + 1), table.I)


def series_re_w12_q(table: DerivativeIntegralTable, g: float, obs: ObservableA) -> SeriesResult:
    G = _gap(g, obs)
    c = _coeffs(G, table.n_max + 1)
    j_part = sum_alternating(c, table.J)
    i_part = sum_alternating(c, table.I)
    value = j_part.value + 0.5 * float(g) * (obs.a1 + obs.a2) * i_part.value
    return SeriesResult(value, max(j_part.terms_used, i_part.terms_used),
                        max(j_part.last_term_ratio, i_part.last_term_ratio),
                        j_part.converged and i_part.converged)


def series_re_w12_p(table: DerivativeIntegralTable, g: float, obs: ObservableA) -> SeriesResult:
    G = _gap(g, obs)
    r = sum_alternating(_coeffs(G, table.n_max + 1), table.K)
    return SeriesResult(2.0 * r.value, r.terms_used, r.last_term_ratio, r.converged)


def _orthogonal_ratio(num_values, table, g, obs, prefactor=1.0, offset=0.0) -> SeriesResult:
    if obs.degenerate:
        raise ValidationError("observable", "orthogonal limit undefined for degenerate observable")
    G = _gap(g, obs)
    count = len(num_values)
    c = _coeffs(G, count, shift=1)
    num = sum_alternating(c, num_values)
    den = sum_alternating(c, table.I[1:count + 1])
    if abs(den.value) < 1e-14:
        raise SeriesDegenerateError(f"series degenerate: denominator {den.value:.3e}")
    return SeriesResult(offset + prefactor * num.value / den.value,
                        max(num.terms_used, den.terms_used),
                        max(num.last_term_ratio, den.last_term_ratio),
                        num.converged and den.converged)


def orthogonal_q_series(table: DerivativeIntegralTable, g: float, obs: ObservableA) -> SeriesResult:
    """<q> at alpha = 0 from the derivative-integral series."""
    return _orthogonal_ratio(table.J[1:], table, g, obs, offset=0.5 * float(g) * (obs.a1 + obs.a2))


def orthogonal_p_series(table: DerivativeIntegralTable, g: float, obs: ObservableA) -> SeriesResult:
    """<p> at alpha = 0 from the derivative-integral series.

    The numerator carries a factor 2 (from Re W12 = 2 sum ... K_n); without it
    the series disagrees with the exact alpha = 0 formula.
    """
    return _orthogonal_ratio(table.K_prime[:table.n_max], table, g, obs, prefactor=2.0)


class Parity(str, Enum):
    SYMMETRIC = "Symmetric"
    ANTISYMMETRIC = "Antisymmetric"
    NEITHER = "Neither"


def symmetry_shortcut(probe: ProbeState) -> Parity:
    """Classify phi(c + u) = +/- phi(c - u) about the centre of mass c."""
    if isinstance(probe, GaussianProbe):
        return Parity.SYMMETRIC if probe.momentum_kick == 0.0 else Parity.NEITHER
    phi, mirrored = reflected_about_centre(probe)
    if np.max(np.abs(phi - mirrored)) < PARITY_TOL:
        return Parity.SYMMETRIC
    if np.max(np.abs(phi + mirrored)) < PARITY_TOL:
        return Parity.ANTISYMMETRIC
    return Parity.NEITHER


def parity_values(probe: ProbeState, g: float, obs: ObservableA) -> tuple[float, float] | None:
    """(<q>, <p>) at alpha = 0 for a parity-definite probe, else None."""
    if symmetry_shortcut(probe) is Parity.NEITHER:
        return None
    return probe.mean_q() + 0.5 * float(g) * (obs.a1 + obs.a2), 0.0


# -- integration-by-parts identities -----------------------------------------

def identity_residuals(probe: GridProbe, n_max: int = 4) -> dict[str, float]:
    """Largest residual of each derivative-integral identity for n <= n_max.

    Residuals are |lhs - rhs| / (1 + |rhs| + s), where s is the Cauchy-Schwarz
    bound sqrt(int w a^2 int w b^2) on the left-hand integral of w a b (w = 1
    or |q|); this keeps zero right-hand sides meaningful at high order.
    Families:

    ``re_even``  int R^(k) R^(2n-k)   = (-1)^(n-k) int (R^(n))^2
    ``re_odd``   int R^(k) R^(2n+1-k) = 0
    ``q_even``   int q R^(k) R^(2n-k) = (-1)^(n-k) int q (R^(n))^2
    ``q_odd``    int q R^(k) R^(2n+1-k) = (-1)^(n-k+1) (n-k+1/2) int (R^(n))^2
    ``im_*``     the same four for I = Im phi
    ``mix_even`` int R^(k) I^(2n-k)   = (-1)^(n-k) int R^(n) I^(n)
    ``mix_odd``  int R^(k) I^(2n+1-k) = (-1)^(n-k) int R^(n) I^(n+1)
    ``mix_rev``  int I^(k) R^(2n+1-k) = (-1)^(n-k) int I^(n) R^(n+1)
    """
    if not isinstance(probe, GridProbe):
        raise ValidationError("probe", "identity checks need a grid probe")
    ders = spectral_derivatives(probe, 2 * n_max + 1)
    R = [d.real for d in ders]
    Im = [d.imag for d in ders]
    h, q = probe.h, probe.q

    def integral(a, b, weight=None):
        return h * float(np.sum(a * b if weight is None else weight * a * b))

    out = {k: 0.0 for k in ("re_even", "re_odd", "q_even", "q_odd", "im_even", "im_odd",
                            "imq_even", "imq_odd", "mix_even", "mix_odd", "mix_rev")}

    absq = np.abs(q)
    norm = {id(F): [integral(d, d) for d in F] for F in (R, Im)}
    qnorm = {id(F): [integral(d, d, absq) for d in F] for F in (R, Im)}

    def record(key, lhs, rhs, F, G, i, j, weighted=False):
        table = qnorm if weighted else norm
        bound = math.sqrt(table[id(F)][i] * table[id(G)][j])
        out[key] = max(out[key], abs(lhs - rhs) / (1.0 + abs(rhs) + bound))

    for n in range(n_max + 1):
        for F, tag in ((R, "re"), (Im, "im")):
            qtag = "q" if tag == "re" else "imq"
            sq = integral(F[n], F[n])
            qsq = integral(F[n], F[n], q)
            for k in range(2 * n + 1):
                j = 2 * n - k
                sign = (-1) ** (n - k)
                record(f"{tag}_even", integral(F[k], F[j]), sign * sq, F, F, k, j)
                record(f"{qtag}_even", integral(F[k], F[j], q), sign * qsq, F, F, k, j, True)
            for k in range(2 * n + 2):
                j = 2 * n + 1 - k
                record(f"{tag}_odd", integral(F[k], F[j]), 0.0, F, F, k, j)
                record(f"{qtag}_odd", integral(F[k], F[j], q),
                       (-1) ** (n - k + 1) * (n - k + 0.5) * sq, F, F, k, j, True)
        mix_n = integral(R[n], Im[n])
        mix_n1 = integral(R[n], Im[n + 1])
        rev_n1 = integral(Im[n], R[n + 1])
        for k in range(2 * n + 1):
            record("mix_even", integral(R[k], Im[2 * n - k]), (-1) ** (n - k) * mix_n, R, Im, k, 2 * n - k)
        for k in range(2 * n + 2):
            j = 2 * n + 1 - k
            record("mix_odd", integral(R[k], Im[j]), (-1) ** (n - k) * mix_n1, R, Im, k, j)
            record("mix_rev", integral(Im[k], R[j]), (-1) ** (n - k) * rev_n1, Im, R, k, j)
    return out
