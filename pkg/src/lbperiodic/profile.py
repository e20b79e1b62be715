"""
Periodic candidate profiles as truncated trigonometric series.

A profile is ``mean + sum_k a_k cos(k w t) + b_k sin(k w t)`` for
``k = 1..K``.  The oscillatory part has zero period-average, so the mean
constraint holds by construction.

Sampling uses the uniform grid ``t_j = j T / N`` with ``T = 2 pi / w``.  On
that grid ``k w t_j = 2 pi k j / N`` does not depend on ``w``; the frequency
only enters through the derivative factors ``(k w)^m``.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "QuadratureError",
    "PeriodicProfile",
    "PhasePoint",
    "SampledProfile",
    "min_points",
    "check_points",
    "evaluate",
    "phase_point",
    "sample",
    "phase_align",
    "minimal_period",
    "sup_norms",
]


class QuadratureError(ValueError):
    """Raised when a grid is too coarse to integrate the energy exactly."""


def min_points(harmonics):
    # quartic in a degree-K trigonometric polynomial is band-limited to 4K
    return 4 * harmonics + 2


def check_points(harmonics, n_points):
    if n_points < min_points(harmonics):
        raise QuadratureError(
            f"n_points={n_points} is below the exactness floor 4K+2={min_points(harmonics)} for K={harmonics}"
        )


@dataclass(frozen=True, eq=False)
class PeriodicProfile:
    """Immutable truncated Fourier profile.

    Parameters
    ----------
    mean : float
        Period average of the profile.
    cos_coeffs, sin_coeffs : array_like, shape (K,)
        Coefficients of ``cos(k w t)`` and ``sin(k w t)`` for ``k = 1..K``.
    omega : float
        Fundamental angular frequency ``w > 0``; the period is ``2 pi / w``.
    """

    mean: float
    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray
    omega: float

    def __post_init__(self):
        cos_coeffs = np.array(self.cos_coeffs, dtype=float).reshape(-1)
        sin_coeffs = np.array(self.sin_coeffs, dtype=float).reshape(-1)
        if cos_coeffs.size < 1 or cos_coeffs.shape != sin_coeffs.shape:
            raise ValueError("cos_coeffs and sin_coeffs must have the same length K >= 1")
        omega = float(self.omega)
        if not (math.isfinite(omega) and omega > 0):
            raise ValueError(f"omega must be positive and finite, got {self.omega!r}")
        mean = float(self.mean)
        if not math.isfinite(mean):
            raise ValueError("mean must be finite")
        if not (np.all(np.isfinite(cos_coeffs)) and np.all(np.isfinite(sin_coeffs))):
            raise ValueError("coefficients must be finite")
        cos_coeffs.setflags(write=False)
        sin_coeffs.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "cos_coeffs", cos_coeffs)
        object.__setattr__(self, "sin_coeffs", sin_coeffs)

    @classmethod
    def constant(cls, mean, harmonics=1, omega=1.0):
        return cls(mean, np.zeros(harmonics), np.zeros(harmonics), omega)

    @property
    def harmonics(self):
        return self.cos_coeffs.size

    @property
    def period(self):
        return 2.0 * math.pi / self.omega

    def with_mean(self, mean):
        return PeriodicProfile(mean, self.cos_coeffs, self.sin_coeffs, self.omega)

    def resized(self, harmonics):
        """Truncate or zero-pad to ``harmonics`` terms."""
        a = np.zeros(harmonics)
        b = np.zeros(harmonics)
        n = min(harmonics, self.harmonics)
        a[:n] = self.cos_coeffs[:n]
        b[:n] = self.sin_coeffs[:n]
        return PeriodicProfile(self.mean, a, b, self.omega)

    def to_dict(self):
        return {
            "mean": self.mean,
            "omega": self.omega,
            "cos_coeffs": self.cos_coeffs.tolist(),
            "sin_coeffs": self.sin_coeffs.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data["mean"], data["cos_coeffs"], data["sin_coeffs"], data["omega"])

    def __eq__(self, other):
        if not isinstance(other, PeriodicProfile):
            return NotImplemented
        return (
            self.mean == other.mean
            and self.omega == other.omega
            and np.array_equal(self.cos_coeffs, other.cos_coeffs)
            and np.array_equal(self.sin_coeffs, other.sin_coeffs)
        )

    __hash__ = None


@dataclass(frozen=True)
class PhasePoint:
    value: float
    slope: float


@dataclass(frozen=True, eq=False)
class SampledProfile:
    """Profile and its first four derivatives on one period, endpoint excluded."""

    n_points: int
    values: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray
    d4: np.ndarray

    def derivative(self, order):
        return (self.values, self.d1, self.d2, self.d3, self.d4)[order]


def _complex_coeffs(profile):
    # Re sum_k (a_k - i b_k) exp(i k w t)
    return profile.cos_coeffs - 1j * profile.sin_coeffs


def evaluate(profile, t, order=0):
    """Value of the ``order``-th derivative of the profile at ``t``."""
    if order not in (0, 1, 2, 3, 4):
        raise ValueError(f"order must be in 0..4, got {order!r}")
    k = np.arange(1, profile.harmonics + 1)
    kw = k * profile.omega
    phase = np.exp(1j * np.multiply.outer(np.asarray(t, dtype=float), kw))
    osc = np.real(phase @ ((1j * kw) ** order * _complex_coeffs(profile)))
    if order == 0:
        osc = osc + profile.mean
    return osc if np.ndim(osc) else float(osc)


def synthesize(spectrum, n_points):
    """``Re sum_k c_k exp(2 pi i k j / N)`` for ``k = 1..K`` on the N-point grid."""
    full = np.zeros(n_points // 2 + 1, dtype=complex)
    full[1:spectrum.size + 1] = 0.5 * n_points * spectrum
    return np.fft.irfft(full, n=n_points)


def project(samples, harmonics):
    """Grid sums ``(sum_j f_j cos(k t_j), sum_j f_j sin(k t_j))`` for ``k = 1..K``."""
    coeffs = np.fft.rfft(samples)[1:harmonics + 1]
    return coeffs.real, -coeffs.imag


def sample(profile, n_points):
    check_points(profile.harmonics, n_points)
    kw = np.arange(1, profile.harmonics + 1) * profile.omega
    c = _complex_coeffs(profile)
    ikw = 1j * kw
    return SampledProfile(
        n_points=int(n_points),
        values=profile.mean + synthesize(c, n_points),
        d1=synthesize(ikw * c, n_points),
        d2=synthesize(ikw**2 * c, n_points),
        d3=synthesize(ikw**3 * c, n_points),
        d4=synthesize(ikw**4 * c, n_points),
    )


def phase_point(profile, t):
    return PhasePoint(evaluate(profile, t, 0), evaluate(profile, t, 1))


def shifted(profile, shift):
    """Profile ``t -> p(t + shift)``."""
    phi = np.arange(1, profile.harmonics + 1) * profile.omega * shift
    c, s = np.cos(phi), np.sin(phi)
    a, b = profile.cos_coeffs, profile.sin_coeffs
    return PeriodicProfile(profile.mean, a * c + b * s, b * c - a * s, profile.omega)


def phase_align(profile, n_scan):
    """Shift time so that the profile's minimum sits at ``t = 0``.

    The minimum is located on a uniform scan of one period and refined by
    60 bisection steps on the derivative inside the bracketing cells.
    """
    check_points(profile.harmonics, n_scan)
    if not (np.any(profile.cos_coeffs) or np.any(profile.sin_coeffs)):
        return profile
    period = profile.period
    h = period / n_scan
    values = sample(profile, n_scan).values
    j = int(np.argmin(values))  # first occurrence: smallest t on ties
    t0 = j * h

    lo, hi = t0 - h, t0 + h
    d_lo, d_hi = evaluate(profile, lo, 1), evaluate(profile, hi, 1)
    if d_lo < 0.0 < d_hi:
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if evaluate(profile, mid, 1) < 0.0:
                lo = mid
            else:
                hi = mid
        t_min = 0.5 * (lo + hi)
        if evaluate(profile, t_min, 0) > values[j]:
            t_min = t0
    else:
        t_min = t0
    return shifted(profile, math.fmod(t_min, period) % period)


def minimal_period(profile, rel_tol=1e-7):
    """Rewrite a profile whose active harmonics share a factor ``m > 1``.

    Harmonics below ``rel_tol`` times the largest amplitude are treated as
    inactive and dropped.  The result keeps the same number of terms.
    """
    amp = np.hypot(profile.cos_coeffs, profile.sin_coeffs)
    if not np.any(amp):
        return profile
    active = np.flatnonzero(amp > rel_tol * amp.max()) + 1
    m = int(np.gcd.reduce(active))
    if m == 1:
        return profile
    k = profile.harmonics
    a = np.zeros(k)
    b = np.zeros(k)
    a_src = profile.cos_coeffs[m - 1::m]
    b_src = profile.sin_coeffs[m - 1::m]
    a[:a_src.size] = a_src
    b[:b_src.size] = b_src
    return PeriodicProfile(profile.mean, a, b, profile.omega * m)


def sup_norms(profile, n_points):
    s = sample(profile, n_points)
    return float(np.max(np.abs(s.values))), float(np.max(np.abs(s.d1)))
