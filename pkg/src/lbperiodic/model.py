"""
Scalar pieces of the Landau-Brazovskii energy.

The pointwise integrand is written in two equivalent forms.  The primal
form ``xi^2/2 (z + x)^2 + h(x)`` is what one writes down first; the
expanded form ``xi^2/2 z^2 - xi^2 y^2 + (xi^2 + tau)/2 x^2 - gamma/6 x^3 + x^4/24``
follows from integrating the cross term by parts, and only agrees with
the primal form after integration over a full period.

Here ``x``, ``y``, ``z`` stand for a profile value and its first and
second derivatives.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModelParams",
    "integrand",
    "integrand_primal",
    "lagrangian_integrand",
    "potential_h",
    "potential_h_prime",
    "potential_hstar",
    "real_cubic_roots",
    "constant_state_floor",
    "constant_lagrangian_floor",
]


@dataclass(frozen=True)
class ModelParams:
    """Controlling parameters of the energy.

    Parameters
    ----------
    xi : float
        Gradient-penalty scale, strictly positive.
    tau : float
        Quadratic coefficient of the double-well potential.
    gamma : float
        Cubic coefficient of the double-well potential.
    """

    xi: float
    tau: float
    gamma: float

    def __post_init__(self):
        for name in ("xi", "tau", "gamma"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.xi <= 0:
            raise ValueError(f"xi must be positive, got {self.xi!r}")

    def as_dict(self):
        return {"xi": self.xi, "tau": self.tau, "gamma": self.gamma}


def integrand(params, x, y, z):
    xi2 = params.xi**2
    return (
        0.5 * xi2 * z**2
        - xi2 * y**2
        + 0.5 * (xi2 + params.tau) * x**2
        - params.gamma / 6.0 * x**3
        + x**4 / 24.0
    )


def integrand_primal(params, x, z):
    """Integrand before integration by parts: ``xi^2/2 (z + x)^2 + h(x)``."""
    return 0.5 * params.xi**2 * (z + x) ** 2 + potential_h(params, x)


def lagrangian_integrand(params, lam, x, y, z):
    return integrand(params, x, y, z) - lam * x


def potential_h(params, x):
    return 0.5 * params.tau * x**2 - params.gamma / 6.0 * x**3 + x**4 / 24.0


def potential_h_prime(params, x):
    return params.tau * x - 0.5 * params.gamma * x**2 + x**3 / 6.0


def potential_hstar(params, x):
    """Energy density of the constant state ``x``: ``xi^2/2 x^2 + h(x)``."""
    return 0.5 * params.xi**2 * x**2 + potential_h(params, x)


def real_cubic_roots(c3, c2, c1, c0):
    """Real roots of ``c3 t^3 + c2 t^2 + c1 t + c0`` in closed form.

    Degenerate leading coefficients fall through to the quadratic and
    linear formulas.  Roots are returned sorted and de-duplicated.
    """
    if c3 == 0.0:
        if c2 == 0.0:
            return [] if c1 == 0.0 else [-c0 / c1]
        disc = c1 * c1 - 4.0 * c2 * c0
        if disc < 0.0:
            return []
        sq = math.sqrt(disc)
        return sorted({(-c1 - sq) / (2.0 * c2), (-c1 + sq) / (2.0 * c2)})

    # depressed cubic t = s - b/3:  s^3 + p s + q = 0
    b, c, d = c2 / c3, c1 / c3, c0 / c3
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    shift = -b / 3.0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if p == 0.0 and q == 0.0:
        roots = [shift]
    # a repeated root sits at disc = 0, which roundoff can push either way
    elif p > 0.0 or disc > 1e-12 * ((q / 2.0) ** 2 + abs(p / 3.0) ** 3):
        sq = math.sqrt(disc)
        roots = [math.copysign(abs(-q / 2.0 + sq) ** (1 / 3), -q / 2.0 + sq)
                 + math.copysign(abs(-q / 2.0 - sq) ** (1 / 3), -q / 2.0 - sq) + shift]
    else:
        r = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * r) if p * r != 0.0 else 0.0
        phi = math.acos(min(1.0, max(-1.0, arg)))
        roots = [r * math.cos((phi - 2.0 * math.pi * k) / 3.0) + shift for k in range(3)]

    # one Newton step per root cleans up cancellation in the formulas
    polished = []
    for t in roots:
        fp = 3.0 * c3 * t * t + 2.0 * c2 * t + c1
        if fp != 0.0:
            step = (((c3 * t + c2) * t + c1) * t + c0) / fp
            if math.isfinite(step) and abs(step) < 1e-6 * (1.0 + abs(t)):
                t -= step
        polished.append(t)
    return sorted(set(polished))


def _golden_section(fun, lo, hi, iters=200):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = fun(x1), fun(x2)
    for _ in range(iters):
        if hi - lo <= 1e-15 * (1.0 + abs(lo) + abs(hi)):
            break
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = fun(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = fun(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def _quartic_min(params, lam):
    # t -> hstar(t) - lam t ; derivative t^3/6 - gamma/2 t^2 + (xi^2+tau) t - lam
    fun = lambda t: potential_hstar(params, t) - lam * t
    candidates = real_cubic_roots(1.0 / 6.0, -0.5 * params.gamma, params.xi**2 + params.tau, -lam)

    radius = 8.0 * (1.0 + abs(params.tau) + abs(params.gamma) + params.xi**2) + abs(lam)
    grid = np.linspace(-radius, radius, 4001)
    values = fun(grid)
    j = int(np.argmin(values))
    lo, hi = grid[max(j - 1, 0)], grid[min(j + 1, grid.size - 1)]
    candidates.append(_golden_section(fun, float(lo), float(hi))[0])

    best_t, best_v = 0.0, math.inf
    for t in sorted(candidates):
        v = fun(t)
        if v < best_v:
            best_t, best_v = t, v
    return best_v, best_t


def constant_state_floor(params):
    """Global minimum of the integrand over constant states.

    Returns
    -------
    m_f : float
        ``min_t f(t, 0, 0)``.
    argmin : float
        A minimizing ``t`` (the smallest one when several tie exactly).
    """
    return _quartic_min(params, 0.0)


def constant_lagrangian_floor(params, lam):
    """``min_c hstar(c) - lam c`` and its minimizer."""
    return _quartic_min(params, float(lam))
