"""Qubit observable, pre/post-selection geometry and the weak value.

All later formulas consume the amplitude pair (k1, k2) defined by

    <psi_f| exp(-i g A p) |psi_i> = k1 exp(-i g a1 p) + k2 exp(-i g a2 p)

with k1 = alpha x^2 + sqrt(1-alpha^2) x sqrt(1-x^2) e^{-i theta}
and  k2 = alpha (1-x^2) - sqrt(1-alpha^2) x sqrt(1-x^2) e^{-i theta}.
Working with (k1, k2) instead of beta = alpha/sqrt(1-alpha^2) and
y = x/sqrt(1-x^2) keeps alpha -> 1 and x -> 1 finite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field


class ValidationError(ValueError):
    """Raised for out-of-range or non-finite inputs."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(name, f"must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class ObservableA:
    """Two-level observable a1 |a1><a1| + a2 |a2><a2|."""

    a1: float
    a2: float

    def __post_init__(self):
        object.__setattr__(self, "a1", _finite("a1", self.a1))
        object.__setattr__(self, "a2", _finite("a2", self.a2))

    @property
    def degenerate(self) -> bool:
        return self.a1 == self.a2


@dataclass(frozen=True)
class SelectionPair:
    """Pre/post-selection geometry.

    ``x`` is <a1|psi_i>, ``theta`` the phase of <a1|psi_i_perp>, ``alpha`` the
    fidelity |<psi_f|psi_i>|.  The phase of <a2|psi_i_perp> is theta - pi and
    is never stored.  ``y`` and ``beta`` are ``math.inf`` when x = 1 or
    alpha = 1 respectively.

    ``x_complement`` = sqrt(1 - x^2) and ``alpha_complement`` =
    sqrt(1 - alpha^2) may be supplied when known more accurately than the
    subtraction allows (x or alpha close to 1).
    """

    x: float
    theta: float
    alpha: float
    x_complement: float | None = field(default=None, repr=False)
    alpha_complement: float | None = field(default=None, repr=False)
    k1: complex = field(init=False)
    k2: complex = field(init=False)

    def __post_init__(self):
        x = _finite("x", self.x)
        theta = _finite("theta", self.theta)
        alpha = _finite("alpha", self.alpha)
        if not 0.0 <= x <= 1.0:
            raise ValidationError("x", f"must lie in [0, 1], got {x!r}")
        if not 0.0 <= alpha <= 1.0:
            raise ValidationError("alpha", f"must lie in [0, 1], got {alpha!r}")
        if not 0.0 <= theta < 2.0 * math.pi:
            raise ValidationError("theta", f"must lie in [0, 2*pi), got {theta!r}")
        v = self._complement("x_complement", x, self.x_complement)
        w = self._complement("alpha_complement", alpha, self.alpha_complement)
        for name, val in (("x", x), ("theta", theta), ("alpha", alpha),
                          ("x_complement", v), ("alpha_complement", w)):
            object.__setattr__(self, name, val)
        cross = w * x * v * complex(math.cos(theta), -math.sin(theta))
        object.__setattr__(self, "k1", alpha * x * x + cross)
        object.__setattr__(self, "k2", alpha * v * v - cross)

    @staticmethod
    def _complement(name, value, given):
        if given is None:
            return math.sqrt(1.0 - value * value)
        given = _finite(name, given)
        if given < 0 or abs(value * value + given * given - 1.0) > 1e-12:
            raise ValidationError(name, "inconsistent with its partner")
        return given

    @property
    def y(self) -> float:
        return self.x / self.x_complement if self.x_complement > 0 else math.inf

    @property
    def beta(self) -> float:
        return self.alpha / self.alpha_complement if self.alpha_complement > 0 else math.inf

    @property
    def y_finite(self) -> bool:
        return self.x_complement > 0

    @property
    def beta_finite(self) -> bool:
        return self.alpha_complement > 0

    @property
    def excluded(self) -> bool:
        """True when post-selection can never succeed (alpha = 0, x in {0, 1})."""
        return self.alpha == 0.0 and self.x in (0.0, 1.0)


def make_selection(x: float, theta: float, alpha: float) -> SelectionPair:
    return SelectionPair(x, theta, alpha)


def _unit_pair(t: float) -> tuple[float, float]:
    """(t/sqrt(1+t^2), 1/sqrt(1+t^2)) without overflow."""
    if math.isinf(t):
        return 1.0, 0.0
    if t > 1.0:
        r = 1.0 / t
        c = r / math.sqrt(1.0 + r * r)
        return 1.0 / math.sqrt(1.0 + r * r), c
    c = 1.0 / math.sqrt(1.0 + t * t)
    return t * c, c


def selection_from_beta_y(beta: float, y: float, theta: float) -> SelectionPair:
    """Invert beta = alpha/sqrt(1-alpha^2), y = x/sqrt(1-x^2)."""
    alpha, ac = _unit_pair(float(beta))
    x, xc = _unit_pair(float(y))
    return SelectionPair(x, theta % (2.0 * math.pi), alpha, x_complement=xc, alpha_complement=ac)


@dataclass(frozen=True)
class WeakValue:
    value: complex

    @property
    def real(self) -> float:
        return self.value.real

    @property
    def imag(self) -> float:
        return self.value.imag


class OrthogonalSelectionError(ValueError):
    pass


def weak_value(sel: SelectionPair, obs: ObservableA) -> WeakValue:
    """A_w = <psi_f|A|psi_i> / <psi_f|psi_i> = (k1 a1 + k2 a2) / alpha."""
    if sel.alpha == 0.0:
        raise OrthogonalSelectionError(
            "weak value undefined for orthogonal selections; "
            "use exact.expectation_orthogonal"
        )
    return WeakValue((sel.k1 * obs.a1 + sel.k2 * obs.a2) / sel.alpha)


def first_order_shifts(aw: WeakValue, g: float, probe_moments) -> tuple[float, float]:
    """Linear-response pointer readings <q>_f and <p>_f.

    ``probe_moments`` is ``(mean_q, mean_p, var_p)`` of the unperturbed probe.
    The free-evolution contribution to <q>_f is not modelled.
    """
    mean_q, mean_p, var_p = (_finite(n, v) for n, v in zip(("mean_q", "mean_p", "var_p"), probe_moments))
    g = _finite("g", g)
    value = complex(aw.value)
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise ValidationError("aw", "must be finite")
    return mean_q + g * value.real, mean_p + 2.0 * g * value.imag * var_p
