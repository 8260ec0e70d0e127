"""Behaviour of <M> as the selections become orthogonal.

The limiting path is beta -> 0 with either x held fixed ("no competition")
or y = beta^s, so the pre-selection approaches |a2> (s > 0) or |a1> (s < 0)
at a rate set by s.  Regimes and exponents:

    regime          <M> - limit     d<M>/dbeta
    NoCompetition   beta^1          beta^0
    SubUnit         beta^(1-|s|)    beta^(-|s|)
    Critical        constant        0
    SuperUnit       beta^(|s|-1)    beta^(|s|-2)

Throughout, C_W = (Re W12 - W22) cos t - Im W12 sin t,
C1_W = (W11 - Re W12) cos t - Im W12 sin t and C_Y, C1_Y are the same with
(W11, W22, W12) -> (1, 1, Y12).
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import stats

from .exact import expectation_closed_form, expectation_orthogonal
from .model import ObservableA, ValidationError, make_selection, selection_from_beta_y
from .probe import OverlapSet, ProbeState, Q, overlaps

NOISE_FLOOR = 1e-10
EXPONENT_TOL = 0.05
PLATEAU_TOL = 1e-6


class InsufficientRangeError(ValueError):
    pass


class Regime(str, Enum):
    NO_COMPETITION = "NoCompetition"
    SUB_UNIT = "SubUnit"
    CRITICAL = "Critical"
    SUPER_UNIT = "SuperUnit"


@dataclass(frozen=True)
class RegimeReport:
    s: float | None
    regime: Regime
    predicted_limit: float
    leading_exponent: float
    speed_exponent: float
    linear_coefficient: float | None = None
    leading_coefficient: float | None = None
    theta: float = 0.0

    @property
    def table_label(self) -> str:
        if self.regime is Regime.CRITICAL:
            return "constant"
        if self.regime is Regime.NO_COMPETITION:
            return "beta"
        return "beta^(1-|s|)" if self.regime is Regime.SUB_UNIT else "beta^(|s|-1)"


def _pieces(ov: OverlapSet, theta: float):
    c, s = math.cos(theta), math.sin(theta)
    w11, w22 = ov.W11.real, ov.W22.real
    rw, iw = ov.W12.real, ov.W12.imag
    ry, iy = ov.Y12.real, ov.Y12.imag
    return dict(
        N0=w11 + w22 - 2 * rw, D0=1 - ry,
        C_W=(rw - w22) * c - iw * s, C_Y=(ry - 1) * c - iy * s,
        C1_W=(w11 - rw) * c - iw * s, C1_Y=(1 - ry) * c - iy * s,
        W11=w11, W22=w22, RW=rw, RY=ry,
    )


def orthogonal_limit(ov: OverlapSet) -> float:
    return expectation_orthogonal(ov).expectation


def linear_coefficient(ov: OverlapSet, theta: float, y: float) -> float:
    """Slope of <M> in alpha at alpha = 0 for fixed y = x/sqrt(1-x^2)."""
    t = _pieces(ov, theta)
    num1 = y * y * t["C1_W"] + t["C_W"]
    den1 = y * y * t["C1_Y"] + t["C_Y"]
    return num1 / (y * t["D0"]) - den1 * t["N0"] / (2 * y * t["D0"] ** 2)


def critical_limit(ov: OverlapSet, theta: float, sign: int) -> float:
    t = _pieces(ov, theta)
    if sign > 0:
        num = t["W11"] / 2 + t["W22"] - t["RW"] + t["C_W"]
        den = 1.5 - t["RY"] + t["C_Y"]
    else:
        num = t["W11"] + t["W22"] / 2 - t["RW"] + t["C1_W"]
        den = 1.5 - t["RY"] + t["C1_Y"]
    return num / den


def _leading_coefficient(ov: OverlapSet, theta: float, s: float) -> float:
    t = _pieces(ov, theta)
    if 0 < s < 1:
        return t["C_W"] / t["D0"] - t["C_Y"] * t["N0"] / (2 * t["D0"] ** 2)
    if -1 < s < 0:
        return t["C1_W"] / t["D0"] - t["C1_Y"] * t["N0"] / (2 * t["D0"] ** 2)
    if s > 1:
        return 2 * (t["C_W"] - t["W22"] * t["C_Y"])
    if s < -1:
        return 2 * (t["C1_W"] - t["W11"] * t["C1_Y"])
    return 0.0


def classify_regime(s: float | None, ov: OverlapSet, theta: float = 0.0, x: float | None = None) -> RegimeReport:
    """Regime, limit and exponents for competition exponent ``s``.

    ``s=None`` means x is held fixed; pass ``x`` to get the linear
    coefficient.  ``s=0`` is the fixed point y = 1.
    """
    if ov.a1 == ov.a2:
        raise ValidationError("observable", "asymptotic regimes undefined for degenerate observable")
    if s is not None and s == 0:
        s, x = None, math.sqrt(0.5)
    if s is None:
        lin = None
        if x is not None:
            if not 0 < x < 1:
                raise ValidationError("x", "fixed-x path needs 0 < x < 1")
            lin = linear_coefficient(ov, theta, x / math.sqrt(1 - x * x))
        return RegimeReport(None, Regime.NO_COMPETITION, orthogonal_limit(ov), 1.0, 0.0, lin, lin, theta)
    s = float(s)
    a = abs(s)
    if a < 1:
        return RegimeReport(s, Regime.SUB_UNIT, orthogonal_limit(ov), 1 - a, -a, None,
                            _leading_coefficient(ov, theta, s), theta)
    if a == 1:
        return RegimeReport(s, Regime.CRITICAL, critical_limit(ov, theta, 1 if s > 0 else -1), 0.0, 0.0,
                            None, 0.0, theta)
    limit = ov.W22.real if s > 0 else ov.W11.real
    return RegimeReport(s, Regime.SUPER_UNIT, limit, a - 1, a - 2, None, _leading_coefficient(ov, theta, s), theta)


def dropped_exponent(s: float | None) -> float:
    """Power of beta of the first term the first-order expansion drops."""
    if s is None or s == 0:
        return 2.0
    a = abs(s)
    if a < 1:
        return min(2 - 2 * a, 1 + a)
    if a == 1:
        return 2.0
    return 2 * (a - 1)


@dataclass(frozen=True)
class ExpansionValue:
    value: float
    dropped_term: float

    def __float__(self):
        return self.value


def expansion_value(point, ov: OverlapSet, x: float | None = None) -> ExpansionValue:
    """First-order asymptotic value at ``point = (beta, s, theta)``.

    For ``s=None`` the expansion is in alpha = beta/sqrt(1+beta^2) at fixed
    ``x``.  ``dropped_term`` is beta raised to the first omitted power.
    """
    beta, s, theta = point
    beta = float(beta)
    rep = classify_regime(s, ov, theta, x)
    if rep.regime is Regime.NO_COMPETITION:
        if rep.linear_coefficient is None:
            raise ValidationError("x", "fixed-x expansion needs x")
        alpha = beta / math.sqrt(1 + beta * beta)
        value = rep.predicted_limit + rep.linear_coefficient * alpha
    elif rep.regime is Regime.CRITICAL:
        value = rep.predicted_limit
    else:
        value = rep.predicted_limit + rep.leading_coefficient * beta ** rep.leading_exponent
    return ExpansionValue(float(value), beta ** dropped_exponent(s))


def _workers() -> int | None:
    raw = os.environ.get("ORTHOWEAK_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValidationError("ORTHOWEAK_THREADS", f"not an integer: {raw!r}") from exc
    if n < 0:
        raise ValidationError("ORTHOWEAK_THREADS", "must be >= 0")
    return None if n == 0 else n


def parallel_map(fn, items):
    """Ordered map over ``items`` using up to ORTHOWEAK_THREADS workers."""
    items = list(items)
    workers = _workers()
    if workers == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def path_selection(beta: float, s: float | None, theta: float, x: float | None = None):
    if s is None:
        if x is None:
            raise ValidationError("x", "fixed-x path needs x")
        return make_selection(x, theta, beta / math.sqrt(1 + beta * beta))
    return selection_from_beta_y(beta, beta ** s, theta)


def sweep_path(s, beta_grid, theta, probe: ProbeState | None = None, g: float | None = None,
               obs: ObservableA | None = None, m_op=Q, x: float | None = None,
               ov: OverlapSet | None = None) -> list[tuple[float, float]]:
    """Exact <M> along beta_grid on the path y = beta^s (or fixed ``x``)."""
    betas = [float(b) for b in beta_grid]
    if any(not (0 < b < 1) for b in betas):
        raise ValidationError("beta_grid", "values must lie in (0, 1)")
    if any(b2 >= b1 for b1, b2 in zip(betas, betas[1:])):
        raise ValidationError("beta_grid", "must be strictly decreasing")
    if ov is None:
        ov = overlaps(probe, g, obs, m_op)

    def point(beta):
        return beta, expectation_closed_form(path_selection(beta, s, theta, x), ov).expectation

    return parallel_map(point, betas)


@dataclass(frozen=True)
class ExponentFit:
    exponent: float
    r_squared: float
    retained: int


def fit_exponent(samples, limit: float, floor: float = NOISE_FLOOR) -> ExponentFit:
    """Least-squares slope of log|value - limit| against log beta."""
    samples = list(samples)
    if len(samples) < 5:
        raise ValidationError("samples", f"need at least 5 samples, got {len(samples)}")
    pts = [(b, abs(v - limit)) for b, v in samples if abs(v - limit) > floor]
    if len(pts) < 3:
        raise InsufficientRangeError(
            f"insufficient dynamic range: {len(pts)} samples above the {floor:g} noise floor")
    lb = np.log([b for b, _ in pts])
    lr = np.log([r for _, r in pts])
    fit = stats.linregress(lb, lr)
    return ExponentFit(float(fit.slope), float(fit.rvalue ** 2), len(pts))


def auto_beta_grid(report: RegimeReport, points: int = 12, beta_max: float | None = None,
                   beta_min: float | None = None) -> np.ndarray:
    """Geometric beta grid on which the leading correction spans ~1e-2..1e-8."""
    e = report.leading_exponent
    if report.regime is Regime.CRITICAL:
        hi, lo = 1e-1, 1e-4
    else:
        hi, lo = 10 ** (-2.0 / e), 10 ** (-8.0 / e)
    hi = min(hi, 0.5) if beta_max is None else beta_max
    lo = hi * 1e-6 if (beta_min is None and beta_max is not None) else (lo if beta_min is None else beta_min)
    if not 0 < lo < hi < 1:
        raise ValidationError("beta_grid", f"need 0 < beta_min < beta_max < 1, got {lo:g}, {hi:g}")
    return np.geomspace(hi, lo, points)


@dataclass
class TableCheck:
    report: RegimeReport
    samples: list
    fitted: float | None
    r_squared: float | None
    passed: bool
    detail: dict = field(default_factory=dict)


def check_table_row(s, ov: OverlapSet, theta: float, x: float | None = None, points: int = 12,
                    beta_max: float | None = None, beta_min: float | None = None,
                    tol: float = EXPONENT_TOL) -> TableCheck:
    """Sweep the path for ``s`` and compare with the predicted scaling.

    Non-critical regimes pass when the fitted log-log slope is within ``tol``
    of the predicted exponent.  The critical regime passes when <M> settles
    on its constant (final residual <= 1e-6 (1 + |limit|)) with successive
    differences shrinking faster than beta.
    """
    rep = classify_regime(s, ov, theta, x)
    grid = auto_beta_grid(rep, points, beta_max, beta_min)
    samples = sweep_path(s, grid, theta, x=x, ov=ov)
    L = rep.predicted_limit
    if rep.regime is not Regime.CRITICAL:
        fit = fit_exponent(samples, L)
        ok = abs(fit.exponent - rep.leading_exponent) <= tol
        return TableCheck(rep, samples, fit.exponent, fit.r_squared, ok, {"retained": fit.retained})
    final = abs(samples[-1][1] - L)
    diffs = [(b2, abs(v2 - v1)) for (b1, v1), (b2, v2) in zip(samples, samples[1:])]
    diffs = [(b, d) for b, d in diffs if d > NOISE_FLOOR]
    slope = None
    if len(diffs) >= 3:
        f = stats.linregress(np.log([b for b, _ in diffs]), np.log([d for _, d in diffs]))
        slope = float(f.slope)
    # all successive differences below the noise floor is a plateau too
    faster = slope is None or slope > 1.0
    ok = final <= PLATEAU_TOL * (1 + abs(L)) and faster
    return TableCheck(rep, samples, slope, None, ok, {"final_residual": final})
