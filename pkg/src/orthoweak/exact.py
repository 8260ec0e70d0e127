"""Exact post-selected pointer expectations.

Three routes that never share their algebra:

* ``expectation_closed_form``: the ratio of the quadratic forms in (k1, k2)
  built from an ``OverlapSet``;
* ``expectation_orthogonal``: the alpha = 0 formula
  (W11 + W22 - 2 Re W12) / (2 (1 - Re Y12));
* ``oracle_expectation``: builds the conditioned pointer wavefunction
  k1 phi(q - g a1) + k2 phi(q - g a2) on a grid and measures it directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import ObservableA, SelectionPair, ValidationError
from .probe import (
    DEFAULT_POINTS,
    GaussianProbe,
    OverlapSet,
    ProbeState,
    Q,
    apply_pointer,
    default_overlap_grid,
    shift,
)

ZERO_PROBABILITY_TOL = 1e-14

CLOSED_FORM = "ClosedForm"
ORTHOGONAL = "OrthogonalFormula"
ORACLE = "Oracle"


class ZeroPostselectionError(ValueError):
    pass


class DegenerateObservableError(ValueError):
    pass


@dataclass(frozen=True)
class MeasurementResult:
    expectation: float
    postselection_probability: float | None
    route: str
    diagnostics: dict = field(default_factory=dict)


def _scaled_amplitudes(sel: SelectionPair):
    """(k1, k2) divided by max(|k1|, |k2|), and that scale.

    The conditioned expectation is invariant under a common rescaling of the
    amplitudes; rescaling keeps extreme limiting paths clear of underflow.
    """
    scale = max(abs(sel.k1), abs(sel.k2))
    if scale == 0.0:
        raise ZeroPostselectionError(
            "zero post-selection probability: alpha = 0 with an eigenstate pre-selection")
    return sel.k1 / scale, sel.k2 / scale, scale


def expectation_closed_form(sel: SelectionPair, ov: OverlapSet) -> MeasurementResult:
    """<M> = (|k1|^2 W11 + |k2|^2 W22 + 2 Re(k1* k2 W12))
           / (|k1|^2 + |k2|^2 + 2 Re(k1* k2 Y12))."""
    k1, k2, scale = _scaled_amplitudes(sel)
    n1, n2 = abs(k1) ** 2, abs(k2) ** 2
    cross = k1.conjugate() * k2
    num = n1 * ov.W11.real + n2 * ov.W22.real + 2.0 * (cross * ov.W12).real
    den = n1 + n2 + 2.0 * (cross * ov.Y12).real
    if den < ZERO_PROBABILITY_TOL * (n1 + n2):
        raise ZeroPostselectionError(
            f"zero post-selection probability (relative denominator {den / (n1 + n2):.3e})")
    prob = den * scale * scale
    return MeasurementResult(
        float(num / den), float(prob), CLOSED_FORM,
        {"denominator": float(prob), "abs_k1": abs(sel.k1), "abs_k2": abs(sel.k2),
         "relative_denominator": float(den / (n1 + n2))},
    )


def expectation_beta_y(beta: float, y: float, theta: float, ov: OverlapSet) -> float:
    """Same expectation written in beta = alpha/sqrt(1-alpha^2), y = x/sqrt(1-x^2).

    Only valid for finite beta and y; kept as an independent transcription
    for cross-checking ``expectation_closed_form``.
    """
    w11, w22 = ov.W11.real, ov.W22.real
    rw, iw = ov.W12.real, ov.W12.imag
    ry, iy = ov.Y12.real, ov.Y12.imag
    c, s = math.cos(theta), math.sin(theta)
    num = (beta**2 * (y**4 * w11 + w22 + 2 * y**2 * rw)
           + y**2 * (w11 + w22 - 2 * rw)
           + 2 * beta * y * (y**2 * ((w11 - rw) * c - iw * s) + ((rw - w22) * c - iw * s)))
    den = (beta**2 * (y**4 + 1 + 2 * y**2 * ry)
           + 2 * y**2 * (1 - ry)
           + 2 * beta * y * ((y**2 - 1) * (1 - ry) * c - (y**2 + 1) * iy * s))
    return num / den


def expectation_orthogonal(ov: OverlapSet, x: float | None = None) -> MeasurementResult:
    """alpha = 0 expectation; depends only on the probe and g.

    ``x`` is optional and only used to report the post-selection probability
    2 x^2 (1 - x^2) (1 - Re Y12).
    """
    if ov.a1 == ov.a2:
        raise DegenerateObservableError("orthogonal limit undefined for degenerate observable")
    if ov.g == 0.0:
        raise DegenerateObservableError("orthogonal limit undefined at g = 0 (Re Y12 = 1)")
    gap = 1.0 - ov.Y12.real
    if gap <= 0.0:
        raise ZeroPostselectionError(f"1 - Re Y12 = {gap:.3e} is not positive")
    value = (ov.W11.real + ov.W22.real - 2.0 * ov.W12.real) / (2.0 * gap)
    prob = None if x is None else 2.0 * x * x * (1.0 - x * x) * gap
    return MeasurementResult(float(value), prob, ORTHOGONAL, {"one_minus_re_y12": gap})


def _grid_for(probe: ProbeState, g: float, obs: ObservableA, n: int):
    if isinstance(probe, GaussianProbe):
        return default_overlap_grid(probe, g, obs, n)
    return probe


def oracle_expectation(sel: SelectionPair, obs: ObservableA, probe: ProbeState, g: float,
                       m_op=Q, n: int = DEFAULT_POINTS) -> MeasurementResult:
    """Direct simulation: translate, superpose, normalize, measure on a grid."""
    grid = _grid_for(probe, float(g), obs, n)
    k1, k2, scale = _scaled_amplitudes(sel)
    phi1 = shift(grid, g * obs.a1).samples
    phi2 = shift(grid, g * obs.a2).samples
    psi = k1 * phi1 + k2 * phi2
    norm2 = grid.h * float(np.vdot(psi, psi).real)
    ref = abs(k1) ** 2 + abs(k2) ** 2
    if norm2 < ZERO_PROBABILITY_TOL * ref:
        raise ZeroPostselectionError(
            f"zero post-selection probability (relative norm {norm2 / ref:.3e})")
    value = grid.h * np.vdot(psi, apply_pointer(grid, psi, m_op)).real / norm2
    prob = norm2 * scale * scale
    return MeasurementResult(float(value), float(prob), ORACLE,
                             {"grid_points": grid.n, "q_min": grid.q_min, "q_max": grid.q_max})


def denominator_coefficients(ov: OverlapSet, y: float, theta: float):
    """(A, B, C) with the closed-form denominator equal to A beta^2 + B beta + C
    (in the beta, y normalization)."""
    ry, iy = ov.Y12.real, ov.Y12.imag
    a = y**4 + 1 + 2 * y**2 * ry
    b = 2 * y * ((y**2 - 1) * (1 - ry) * math.cos(theta) - (y**2 + 1) * iy * math.sin(theta))
    c = 2 * y**2 * (1 - ry)
    return a, b, c


def denominator_discriminant(ov: OverlapSet, y: float, theta: float) -> float:
    """Discriminant B^2 - 4AC of the denominator as a quadratic in beta.

    In terms of u = y^2 this is
    4u[(u-1)(1-Re Y12) cos t - (u+1) Im Y12 sin t]^2 - 8u(1-Re Y12)(u^2+1+2u Re Y12),
    which is negative whenever |Y12| < 1, so the denominator never vanishes.
    """
    y = float(y)
    if not (math.isfinite(y) and y > 0):
        raise ValidationError("y", f"must be finite and > 0, got {y!r}")
    u = y * y
    ry, iy = ov.Y12.real, ov.Y12.imag
    bracket = (u - 1) * (1 - ry) * math.cos(theta) - (u + 1) * iy * math.sin(theta)
    return 4 * u * bracket**2 - 8 * u * (1 - ry) * (u * u + 1 + 2 * u * ry)


def discriminant_bound(ov: OverlapSet, y: float) -> float:
    """Upper bound -4u(u+1)^2 (1-|Y12|^2), u = y^2, on the discriminant."""
    u = y * y
    return -4 * u * (u + 1) ** 2 * (1 - abs(ov.Y12) ** 2)
