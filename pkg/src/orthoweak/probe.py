"""Pointer wavefunctions and their displaced-overlap integrals.

Two backends share one interface.  ``GaussianProbe`` evaluates everything in
closed form; ``GridProbe`` holds samples on a uniform periodic grid and uses
FFT phase ramps for translation and differentiation, trapezoid sums for
integrals.  Having both lets every closed-form overlap be checked against an
independent numerical route.

Conventions: p = -i d/dq, translation exp(-i d p) phi(q) = phi(q - d),
grid points q_j = q_min + j h with h = (q_max - q_min) / n (q_max excluded).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .model import ObservableA, ValidationError

TAIL_FRACTION = 0.05
TAIL_MASS_TOL = 1e-10
NORM_TOL = 1e-10
DERIVATIVE_TAIL_TOL = 1e-8
SPECTRAL_FLOOR = 1e-14
MAX_DERIVATIVE_ORDER = 32
DEFAULT_POINTS = 4096
DEFAULT_HALF_WIDTH = 12.0


class DecayConditionError(ValueError):
    """Probe mass reaches the edge of its grid."""


class DomainOverflowError(DecayConditionError):
    """A translation pushed probe mass into the grid edge band."""


class UnresolvedDerivativeError(ValueError):
    """Spectral derivatives of the requested order are not resolved by the grid."""


# -- pointer observables ---------------------------------------------------

@dataclass(frozen=True)
class PositionQ:
    tag = "q"


@dataclass(frozen=True)
class MomentumP:
    tag = "p"


@dataclass(frozen=True, eq=False)
class MultiplicationBy:
    """Real function f(q) acting by multiplication, given as samples on ``q``."""

    q: np.ndarray
    f: np.ndarray
    tag = "f"

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        f = np.asarray(self.f, dtype=float)
        if q.shape != f.shape or q.ndim != 1 or q.size < 2:
            raise ValidationError("f", "q and f must be equal-length 1-D arrays")
        if np.any(np.diff(q) <= 0):
            raise ValidationError("f", "q must be strictly increasing")
        q.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "f", f)

    def on(self, q: np.ndarray) -> np.ndarray:
        if self.q.shape == q.shape and np.allclose(self.q, q, rtol=0, atol=1e-12):
            return self.f
        return np.interp(q, self.q, self.f)


Q = PositionQ()
P = MomentumP()


def pointer_observable(name: str):
    """Parse ``q``, ``p`` or ``file:path.csv`` (columns ``q,f``)."""
    if name == "q":
        return Q
    if name == "p":
        return P
    if name.startswith("file:"):
        rows = _read_csv(name[5:], ("q", "f"))
        return MultiplicationBy(rows["q"], rows["f"])
    raise ValidationError("observable", f"expected q, p or file:<path>, got {name!r}")


# -- probe states ----------------------------------------------------------

class ProbeState:
    """Base class; see ``GaussianProbe`` and ``GridProbe``."""

    backend: str

    def mean_q(self) -> float:
        raise NotImplementedError

    def mean_p(self) -> float:
        raise NotImplementedError

    def var_q(self) -> float:
        raise NotImplementedError

    def var_p(self) -> float:
        raise NotImplementedError

    def moments(self) -> tuple[float, float, float]:
        """(mean_q, mean_p, var_p) as consumed by ``model.first_order_shifts``."""
        return self.mean_q(), self.mean_p(), self.var_p()


@dataclass(frozen=True)
class GaussianProbe(ProbeState):
    """(2 pi sigma^2)^(-1/4) exp(-(q - mean)^2 / (4 sigma^2)) exp(i kick q)."""

    mean: float = 0.0
    sigma: float = 1.0
    momentum_kick: float = 0.0
    backend = "gaussian"

    def __post_init__(self):
        for name in ("mean", "sigma", "momentum_kick"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValidationError(name, "must be finite")
            object.__setattr__(self, name, v)
        if self.sigma <= 0:
            raise ValidationError("sigma", f"must be > 0, got {self.sigma!r}")

    def __call__(self, q):
        q = np.asarray(q, dtype=float)
        norm = (2.0 * math.pi * self.sigma**2) ** -0.25
        return norm * np.exp(-((q - self.mean) ** 2) / (4.0 * self.sigma**2) + 1j * self.momentum_kick * q)

    def mean_q(self):
        return self.mean

    def mean_p(self):
        return self.momentum_kick

    def var_q(self):
        return self.sigma**2

    def var_p(self):
        return 0.25 / self.sigma**2

    def to_grid(self, n: int = DEFAULT_POINTS, domain=None, check=True) -> "GridProbe":
        if domain is None:
            half = DEFAULT_HALF_WIDTH * self.sigma
            domain = (self.mean - half, self.mean + half)
        q_min, q_max = map(float, domain)
        q = q_min + (q_max - q_min) / n * np.arange(n)
        return grid_probe((q_min, q_max), self(q), check=check)


@dataclass(frozen=True, eq=False)
class GridProbe(ProbeState):
    """Normalized samples on a periodic uniform grid."""

    q_min: float
    q_max: float
    samples: np.ndarray
    backend = "grid"
    _c: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        s = np.array(self.samples, dtype=complex)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        c = np.fft.fft(s)
        c.setflags(write=False)
        object.__setattr__(self, "_c", c)

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def h(self) -> float:
        return (self.q_max - self.q_min) / self.n

    @property
    def q(self) -> np.ndarray:
        return self.q_min + self.h * np.arange(self.n)

    @property
    def p(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n, self.h)

    @property
    def spectrum(self) -> np.ndarray:
        return self._c

    def density(self) -> np.ndarray:
        return np.abs(self.samples) ** 2

    def mean_q(self):
        return float(self.h * np.sum(self.q * self.density()))

    def var_q(self):
        rho = self.density()
        m = self.h * np.sum(self.q * rho)
        return float(self.h * np.sum((self.q - m) ** 2 * rho))

    def _pweights(self):
        w = np.abs(self._c) ** 2
        return w / w.sum()

    def mean_p(self):
        return float(np.sum(self.p * self._pweights()))

    def var_p(self):
        w = self._pweights()
        m = np.sum(self.p * w)
        return float(np.sum((self.p - m) ** 2 * w))

    def tail_mass(self) -> float:
        q = self.q
        band = TAIL_FRACTION * (self.q_max - self.q_min)
        mask = (q < self.q_min + band) | (q >= self.q_max - band)
        return float(self.h * np.sum(self.density()[mask]))

    def to_grid(self, n=None, domain=None, check=True) -> "GridProbe":
        if n in (None, self.n) and domain is None:
            return self
        raise ValidationError("grid", "resampling a grid probe is not supported")


def gaussian_probe(mean: float = 0.0, sigma: float = 1.0, momentum_kick: float = 0.0) -> GaussianProbe:
    return GaussianProbe(mean, sigma, momentum_kick)


def _is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def grid_probe(domain, samples, check: bool = True) -> GridProbe:
    """Build a normalized grid probe from samples at q_min + j h.

    Raises ``DecayConditionError`` when more than 1e-10 of the probability
    lies in the outer 5% of the domain on either side.
    """
    q_min, q_max = map(float, domain)
    if not (math.isfinite(q_min) and math.isfinite(q_max)) or q_max <= q_min:
        raise ValidationError("domain", f"need finite q_min < q_max, got {domain!r}")
    s = np.asarray(samples, dtype=complex)
    if s.ndim != 1:
        raise ValidationError("samples", "must be one-dimensional")
    if not _is_power_of_two(s.size) or s.size < 256:
        raise ValidationError("samples", f"count must be a power of two >= 256, got {s.size}")
    if not np.all(np.isfinite(s)):
        raise ValidationError("samples", "must be finite")
    h = (q_max - q_min) / s.size
    norm = h * np.sum(np.abs(s) ** 2)
    if norm <= 0:
        raise ValidationError("samples", "wavefunction is identically zero")
    probe = GridProbe(q_min, q_max, s / math.sqrt(norm))
    if check:
        tail = probe.tail_mass()
        if tail >= TAIL_MASS_TOL:
            raise DecayConditionError(
                f"decay condition violated: tail mass {tail:.3e} in the outer "
                f"{TAIL_FRACTION:.0%} of the domain")
    return probe


def _read_csv(path, columns):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != list(columns):
            raise ValidationError("csv", f"{path}: header must be {','.join(columns)}")
        reader.fieldnames = list(columns)
        out = {c: [] for c in columns}
        for row in reader:
            for c in columns:
                out[c].append(float(row[c]))
    return {c: np.asarray(v) for c, v in out.items()}


def load_probe_csv(path) -> GridProbe:
    """Read ``q,re,im`` rows (header required) into a grid probe."""
    rows = _read_csv(path, ("q", "re", "im"))
    q = rows["q"]
    if q.size < 2:
        raise ValidationError("csv", "need at least two rows")
    h = np.diff(q)
    if np.any(h <= 0) or not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise ValidationError("csv", "q must be uniformly spaced and increasing")
    step = (q[-1] - q[0]) / (q.size - 1)
    return grid_probe((q[0], q[0] + step * q.size), rows["re"] + 1j * rows["im"])


def save_probe_csv(probe: GridProbe, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("q,re,im\n")
        for qj, v in zip(probe.q, probe.samples):
            fh.write(f"{qj:.17g},{v.real:.17g},{v.imag:.17g}\n")


# -- translation -----------------------------------------------------------

def _shifted_samples(probe: GridProbe, distance: float) -> np.ndarray:
    if distance == 0.0:
        return np.asarray(probe.samples)
    ramp = np.exp(-1j * probe.p * distance)
    if probe.n % 2 == 0:
        # Nyquist mode has no unique band-limited translate; use its real part
        ramp[probe.n // 2] = math.cos(probe.p[probe.n // 2] * distance)
    return np.fft.ifft(probe.spectrum * ramp)


def shift(probe: ProbeState, distance: float) -> ProbeState:
    """Return phi(q - distance)."""
    distance = float(distance)
    if isinstance(probe, GaussianProbe):
        return GaussianProbe(probe.mean + distance, probe.sigma, probe.momentum_kick)
    moved = GridProbe(probe.q_min, probe.q_max, _shifted_samples(probe, distance))
    tail = moved.tail_mass()
    if tail >= TAIL_MASS_TOL:
        raise DomainOverflowError(f"domain overflow: shift {distance:g} leaves tail mass {tail:.3e}")
    return moved


def apply_pointer(probe: GridProbe, samples: np.ndarray, m_op) -> np.ndarray:
    """Samples of M phi for M in {q, p, f(q)} on ``probe``'s grid."""
    if isinstance(m_op, PositionQ):
        return probe.q * samples
    if isinstance(m_op, MomentumP):
        c = np.fft.fft(samples)
        kp = probe.p.copy()
        if probe.n % 2 == 0:
            kp[probe.n // 2] = 0.0
        return np.fft.ifft(kp * c)
    if isinstance(m_op, MultiplicationBy):
        return m_op.on(probe.q) * samples
    raise ValidationError("observable", f"unsupported pointer observable {m_op!r}")


# -- overlaps --------------------------------------------------------------

@dataclass(frozen=True)
class OverlapSet:
    """Displaced matrix elements W_ij = <phi|e^{i g a_i p} M e^{-i g a_j p}|phi>
    and Y12 = <phi|e^{i g (a1 - a2) p}|phi>.  W21 = conj(W12) is implied."""

    W11: complex
    W22: complex
    W12: complex
    Y12: complex
    observable_tag: str
    g: float
    a1: float
    a2: float

    @property
    def W21(self) -> complex:
        return self.W12.conjugate()

    @property
    def Y21(self) -> complex:
        return self.Y12.conjugate()

    @property
    def degenerate(self) -> bool:
        return self.g * (self.a1 - self.a2) == 0.0

    def as_dict(self) -> dict:
        out = {"observable": self.observable_tag, "g": self.g, "a1": self.a1, "a2": self.a2}
        for name in ("W11", "W22", "W12", "Y12"):
            v = complex(getattr(self, name))
            out[name] = [v.real, v.imag]
        return out


def _gaussian_overlaps(probe: GaussianProbe, g, obs, m_op) -> OverlapSet:
    d1, d2 = g * obs.a1, g * obs.a2
    dd = d1 - d2
    k, mu, s2 = probe.momentum_kick, probe.mean, probe.sigma**2
    y12 = complex(math.cos(k * dd), math.sin(k * dd)) * math.exp(-dd * dd / (8.0 * s2))
    if isinstance(m_op, PositionQ):
        w11, w22, w12 = mu + d1, mu + d2, y12 * (mu + 0.5 * (d1 + d2))
    else:
        w11 = w22 = k
        w12 = y12 * complex(k, dd / (4.0 * s2))
    return OverlapSet(complex(w11), complex(w22), complex(w12), y12, m_op.tag, g, obs.a1, obs.a2)


def default_overlap_grid(probe: GaussianProbe, g: float, obs: ObservableA, n: int = DEFAULT_POINTS):
    """Grid wide enough to hold the probe undisplaced and at both displacements."""
    spots = (probe.mean, probe.mean + g * obs.a1, probe.mean + g * obs.a2)
    centre = 0.5 * (min(spots) + max(spots))
    half = DEFAULT_HALF_WIDTH * probe.sigma + 0.5 * (max(spots) - min(spots)) / (1.0 - 2 * TAIL_FRACTION)
    return probe.to_grid(n, (centre - half, centre + half))


def _grid_overlaps(probe: GridProbe, g, obs, m_op) -> OverlapSet:
    phi1 = shift(probe, g * obs.a1).samples
    phi2 = shift(probe, g * obs.a2).samples
    h = probe.h
    m1 = apply_pointer(probe, phi1, m_op)
    m2 = apply_pointer(probe, phi2, m_op)
    w11 = h * np.vdot(phi1, m1)
    w22 = h * np.vdot(phi2, m2)
    w12 = h * np.vdot(phi1, m2)
    y12 = h * np.vdot(phi1, phi2)
    # diagonal elements of a Hermitian M are real
    w11, w22 = w11.real, w22.real
    return OverlapSet(complex(w11), complex(w22), complex(w12), complex(y12), m_op.tag, g, obs.a1, obs.a2)


def overlaps(probe: ProbeState, g: float, obs: ObservableA, m_op=Q, n: int = DEFAULT_POINTS) -> OverlapSet:
    """W11, W22, W12, Y12 for pointer observable ``m_op``.

    Gaussian probes use closed forms for q and p; a ``MultiplicationBy``
    observable on a Gaussian probe is evaluated on a default grid of ``n``
    points.
    """
    g = float(g)
    if not math.isfinite(g):
        raise ValidationError("g", "must be finite")
    if isinstance(probe, GaussianProbe):
        if isinstance(m_op, (PositionQ, MomentumP)):
            return _gaussian_overlaps(probe, g, obs, m_op)
        probe = default_overlap_grid(probe, g, obs, n)
    return _grid_overlaps(probe, g, obs, m_op)


# -- derivative integrals ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class DerivativeIntegralTable:
    """I_n = int |phi^(n)|^2, J_n = int q |phi^(n)|^2,
    K_n = int (Re phi)^(n) (Im phi)^(n+1) for n = 0..n_max, and
    K_prime_n = int (Re phi)^(n+1) (Im phi)^(n+2), which is K_{n+1}."""

    n_max: int
    I: np.ndarray
    J: np.ndarray
    K: np.ndarray
    K_prime: np.ndarray
    source: str = "grid"

    def __post_init__(self):
        for name in ("I", "J", "K", "K_prime"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def normal_raw_moments(mean: float, var: float, m_max: int) -> np.ndarray:
    """E[X^m], X ~ N(mean, var), via M_{m+1} = mean M_m + m var M_{m-1}."""
    out = np.empty(m_max + 1)
    out[0] = 1.0
    if m_max >= 1:
        out[1] = mean
    for m in range(1, m_max):
        out[m + 1] = mean * out[m] + m * var * out[m - 1]
    return out


def filtered_spectrum(probe: GridProbe) -> np.ndarray:
    """FFT coefficients with round-off noise and the Nyquist mode removed."""
    c = np.array(probe.spectrum)
    c[np.abs(c) < SPECTRAL_FLOOR * np.abs(c).max()] = 0.0
    if probe.n % 2 == 0:
        c[probe.n // 2] = 0.0
    return c


def spectral_derivatives(probe: GridProbe, order_max: int, check: bool = True) -> list[np.ndarray]:
    """phi, phi', ..., phi^(order_max) on the grid.

    With ``check`` set, raises ``UnresolvedDerivativeError`` when more than
    1e-8 of the weight p^(2m)|c_p|^2 of some order m sits in the outer third
    of the resolved momentum band.
    """
    c = filtered_spectrum(probe)
    real_input = not np.any(probe.samples.imag)
    p = probe.p
    outer = np.abs(p) > (2.0 / 3.0) * np.abs(p).max()
    power = np.abs(c) ** 2
    out = []
    ip = 1j * p
    cur = c
    for m in range(order_max + 1):
        if check:
            w = power * p ** (2 * m)
            total = w.sum()
            if total > 0 and w[outer].sum() > DERIVATIVE_TAIL_TOL * total:
                raise UnresolvedDerivativeError(
                    f"derivative order unresolved: order {m} has "
                    f"{w[outer].sum() / total:.2e} of its weight near the band edge")
        d = np.fft.ifft(cur)
        # derivatives of a real function are real
        out.append(d.real + 0j if real_input else d)
        cur = cur * ip
    return out


def derivative_integrals(probe: ProbeState, n_max: int) -> DerivativeIntegralTable:
    """I_n, J_n, K_n (and K_prime_n = K_{n+1}) for n = 0..n_max.

    Gaussian: I_n = <p^(2n)>, J_n = mean * I_n, K_n = <p^(2n+1)>/2 with p
    normal of mean ``momentum_kick`` and variance 1/(4 sigma^2).
    Grid: spectral derivatives and trapezoid sums.
    """
    n_max = int(n_max)
    if not 0 <= n_max <= MAX_DERIVATIVE_ORDER:
        raise ValidationError("n_max", f"must lie in [0, {MAX_DERIVATIVE_ORDER}]")
    if isinstance(probe, GaussianProbe):
        mom = normal_raw_moments(probe.momentum_kick, probe.var_p(), 2 * n_max + 5)
        I = mom[0:2 * n_max + 1:2]
        K_all = 0.5 * mom[1:2 * n_max + 4:2]
        return DerivativeIntegralTable(n_max, I, probe.mean * I, K_all[:n_max + 1], K_all[1:n_max + 2],
                                       source="gaussian")
    ders = spectral_derivatives(probe, n_max + 2)
    h, q = probe.h, probe.q
    I = np.array([h * np.sum(np.abs(d) ** 2) for d in ders[:n_max + 1]])
    J = np.array([h * np.sum(q * np.abs(d) ** 2) for d in ders[:n_max + 1]])
    K_all = np.array([h * np.sum(ders[m].real * ders[m + 1].imag) for m in range(n_max + 2)])
    return DerivativeIntegralTable(n_max, I, J, K_all[:n_max + 1], K_all[1:], source="grid")


# -- parity ----------------------------------------------------------------

def reflected_about_centre(probe: GridProbe):
    """Return (phi, phi reflected about <q>) on a common grid.

    The probe is first translated by less than h/2 so that its centre lands on
    a grid point or midpoint; reflection is then an exact index map.
    """
    c = probe.mean_q()
    m = round(2.0 * (c - probe.q_min) / probe.h)
    delta = probe.q_min + 0.5 * m * probe.h - c
    moved = _shifted_samples(probe, delta)
    idx = (m - np.arange(probe.n)) % probe.n
    return moved, moved[idx]
