"""Seeded verification batches shared by the CLI, scripts and acceptance suite."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .asymptotics import parallel_map
from .exact import (
    denominator_discriminant,
    discriminant_bound,
    expectation_closed_form,
    oracle_expectation,
)
from .model import ObservableA, make_selection, weak_value
from .probe import P, Q, GaussianProbe, grid_probe, overlaps
from .series import identity_residuals

ROUTE_TOL = 1e-8


@dataclass(frozen=True)
class RouteTuple:
    x: float
    theta: float
    alpha: float
    g: float
    sigma: float
    mean: float
    kick: float
    a1: float
    a2: float


def draw_route_tuples(rng: np.random.Generator, count: int, max_gap: float = 2.0) -> list[RouteTuple]:
    """Random parameter tuples with 0.05 <= |g (a1 - a2)| / sigma <= max_gap.

    One in twenty draws has alpha = 0 exactly.
    """
    out = []
    while len(out) < count:
        a1, a2 = rng.uniform(-2, 2, size=2)
        if abs(a1 - a2) < 0.1:
            continue
        sigma = rng.uniform(0.5, 2.0)
        gap = math.exp(rng.uniform(math.log(0.05), math.log(max_gap)))
        g = gap * sigma / abs(a1 - a2) * rng.choice((-1.0, 1.0))
        alpha = 0.0 if rng.random() < 0.05 else rng.uniform(0, 1)
        out.append(RouteTuple(rng.uniform(0.01, 0.99), rng.uniform(0, 2 * math.pi), alpha, g,
                              sigma, rng.uniform(-1, 1), rng.uniform(-1, 1), a1, a2))
    return out


@dataclass(frozen=True)
class RouteComparison:
    tuple: RouteTuple
    observable: str
    closed_form: float
    oracle: float
    probability: float
    scaled_error: float


def compare_routes(t: RouteTuple, m_op) -> RouteComparison:
    sel = make_selection(t.x, t.theta, t.alpha)
    obs = ObservableA(t.a1, t.a2)
    probe = GaussianProbe(t.mean, t.sigma, t.kick)
    cf = expectation_closed_form(sel, overlaps(probe, t.g, obs, m_op))
    orc = oracle_expectation(sel, obs, probe, t.g, m_op)
    err = abs(cf.expectation - orc.expectation) / (1 + abs(cf.expectation))
    return RouteComparison(t, m_op.tag, cf.expectation, orc.expectation, cf.postselection_probability, err)


def route_equivalence(seed: int = 0, count: int = 1000, observables=(Q, P)) -> list[RouteComparison]:
    tuples = draw_route_tuples(np.random.default_rng(seed), count)
    jobs = [(t, m) for t in tuples for m in observables]
    return parallel_map(lambda job: compare_routes(*job), jobs)


def discriminant_sweep(seed: int = 0, count: int = 10_000):
    """(max discriminant, max discriminant - bound) over random (y, theta, g, sigma)."""
    rng = np.random.default_rng(seed)
    worst, worst_gap = -math.inf, -math.inf
    for _ in range(count):
        y = math.exp(rng.uniform(math.log(1e-3), math.log(1e3)))
        theta = rng.uniform(0, 2 * math.pi)
        sigma = rng.uniform(0.5, 2.0)
        a1, a2 = rng.uniform(-2, 2, size=2)
        if a1 == a2:
            continue
        g = rng.uniform(1e-3, 3.0) * sigma / abs(a1 - a2) * rng.choice((-1.0, 1.0))
        ov = overlaps(GaussianProbe(rng.uniform(-1, 1), sigma, rng.uniform(-1, 1)), g, ObservableA(a1, a2))
        d = denominator_discriminant(ov, y, theta)
        worst = max(worst, d)
        worst_gap = max(worst_gap, d - discriminant_bound(ov, y))
    return worst, worst_gap


@dataclass(frozen=True)
class WeakLimit:
    observable: str
    target: float
    g: tuple
    normalized: tuple
    errors: tuple
    shift_ratios: tuple
    error_ratios: tuple


def weak_value_limit(x: float, theta: float, alpha: float, obs: ObservableA,
                     probe: GaussianProbe, gs=(1e-3, 1e-4, 1e-5)) -> list[WeakLimit]:
    """Normalized exact shifts against the weak value as g -> 0."""
    sel = make_selection(x, theta, alpha)
    aw = weak_value(sel, obs).value
    out = []
    for m_op, base, scale, target in ((Q, probe.mean_q(), 1.0, aw.real),
                                      (P, probe.mean_p(), 2.0 * probe.var_p(), aw.imag)):
        shifts = [expectation_closed_form(sel, overlaps(probe, g, obs, m_op)).expectation - base for g in gs]
        norm = [s / (g * scale) for s, g in zip(shifts, gs)]
        errs = [v - target for v in norm]
        out.append(WeakLimit(m_op.tag, target, tuple(gs), tuple(norm), tuple(errs),
                             tuple(a / b for a, b in zip(shifts, shifts[1:])),
                             tuple(abs(a) / abs(b) if b else math.inf for a, b in zip(errs, errs[1:]))))
    return out


def random_smooth_probe(rng: np.random.Generator, n: int = 4096, half_width: float = 16.0):
    """Normalized grid probe: 1-3 kicked Gaussians, optional weak cubic phase."""
    q = -half_width + 2 * half_width / n * np.arange(n)
    psi = np.zeros(n, dtype=complex)
    for _ in range(rng.integers(1, 4)):
        m = rng.uniform(-1.5, 1.5)
        s = rng.uniform(0.5, 1.2)
        c = rng.normal() + 1j * rng.normal()
        k = rng.uniform(-1, 1)
        psi += c * np.exp(-((q - m) ** 2) / (4 * s * s) + 1j * k * q)
    if rng.random() < 0.5:
        psi *= np.exp(1j * rng.uniform(-0.05, 0.05) * q**3)
    return grid_probe((-half_width, half_width), psi)


def identity_batch(seed: int = 0, count: int = 20, n_max: int = 4) -> list[float]:
    rng = np.random.default_rng(seed)
    return [max(identity_residuals(random_smooth_probe(rng), n_max).values()) for _ in range(count)]
