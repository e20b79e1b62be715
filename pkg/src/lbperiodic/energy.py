"""
Period-averaged energy of a profile, its exact gradient, and the
Euler-Lagrange residual.

On a periodic uniform grid the trapezoidal rule is the plain sample mean.
With ``N >= 4K + 2`` points it integrates the (band-limited) energy density
exactly, so the discrete gradient below is also the exact gradient of the
continuous average energy restricted to K harmonics.
"""

from dataclasses import dataclass

import numpy as np

from .model import integrand, integrand_primal, potential_h_prime
from .profile import check_points, project, sample, synthesize

__all__ = [
    "EnergyGradient",
    "ResidualReport",
    "average_energy",
    "average_energy_primal",
    "average_energy_lagrangian",
    "energy_and_gradient",
    "gradient",
    "el_expression",
    "el_residual",
    "recover_multiplier",
]


@dataclass(frozen=True, eq=False)
class EnergyGradient:
    d_mean: float
    d_cos: np.ndarray
    d_sin: np.ndarray
    d_log_omega: float

    def as_vector(self, mean_free=False):
        head = [self.d_mean] if mean_free else []
        return np.concatenate([head, self.d_cos, self.d_sin, [self.d_log_omega]])


@dataclass(frozen=True)
class ResidualReport:
    rms: float
    max_abs: float
    lambda_used: float


def _sample_xyz(profile, n_points):
    check_points(profile.harmonics, n_points)
    c = profile.cos_coeffs - 1j * profile.sin_coeffs
    ikw = 1j * np.arange(1, profile.harmonics + 1) * profile.omega
    x = profile.mean + synthesize(c, n_points)
    return x, synthesize(ikw * c, n_points), synthesize(ikw * ikw * c, n_points)


def average_energy(params, profile, n_points):
    x, y, z = _sample_xyz(profile, n_points)
    return float(np.mean(integrand(params, x, y, z)))


def average_energy_primal(params, profile, n_points):
    x, _, z = _sample_xyz(profile, n_points)
    return float(np.mean(integrand_primal(params, x, z)))


def average_energy_lagrangian(params, lam, profile, n_points):
    return average_energy(params, profile, n_points) - lam * profile.mean


def energy_and_gradient(params, lam, profile, n_points, mean_free=False):
    """Lagrangian average energy together with its :class:`EnergyGradient`."""
    lam = 0.0 if lam is None else float(lam)
    x, y, z = _sample_xyz(profile, n_points)
    xi2 = params.xi**2
    value = float(np.mean(integrand(params, x, y, z))) - lam * profile.mean

    f_x = (xi2 + params.tau) * x - 0.5 * params.gamma * x**2 + x**3 / 6.0
    f_y = -2.0 * xi2 * y
    f_z = xi2 * z

    k = profile.harmonics
    kw = np.arange(1, k + 1) * profile.omega
    n = float(n_points)
    cx, sx = project(f_x, k)
    cy, sy = project(f_y, k)
    cz, sz = project(f_z, k)
    # d/da_k:  x -> cos, y -> -kw sin, z -> -(kw)^2 cos ; d/db_k likewise
    d_cos = (cx - kw * sy - kw * kw * cz) / n
    d_sin = (sx + kw * cy - kw * kw * sz) / n
    # y scales like w and z like w^2
    d_log_omega = float(np.mean(f_y * y + 2.0 * f_z * z))
    d_mean = float(np.mean(f_x)) - lam if mean_free else 0.0
    return value, EnergyGradient(d_mean, d_cos, d_sin, d_log_omega)


def gradient(params, lam, profile, n_points, mean_free=False):
    return energy_and_gradient(params, lam, profile, n_points, mean_free)[1]


def el_expression(params, profile, n_points):
    """``xi^2 (p'''' + 2 p'' + p) + h'(p)`` sampled on the grid, without multiplier."""
    s = sample(profile, n_points)
    return params.xi**2 * (s.d4 + 2.0 * s.d2 + s.values) + potential_h_prime(params, s.values)


def el_residual(params, lam, profile, n_points):
    r = el_expression(params, profile, n_points) - lam
    return ResidualReport(
        rms=float(np.sqrt(np.mean(r * r))),
        max_abs=float(np.max(np.abs(r))),
        lambda_used=float(lam),
    )


def recover_multiplier(params, profile, n_points):
    """Zero-mode projection of the Euler-Lagrange expression."""
    return float(np.mean(el_expression(params, profile, n_points)))
