"""
Multi-start minimization of the average energy.

The constrained problem fixes the mean and optimizes the oscillatory
coefficients and the frequency.  The Lagrangian problem additionally
frees the mean and subtracts ``lam * mean``.

The frequency is kept inside ``omega_bounds`` through
``log w = log lo + (log hi - log lo) * sigmoid(u)``, so ``u`` is
unconstrained.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .energy import ResidualReport, el_residual, energy_and_gradient, recover_multiplier
from .model import constant_lagrangian_floor
from .profile import PeriodicProfile, check_points, minimal_period, sample

__all__ = [
    "MinimizeOptions",
    "MinimizeResult",
    "TRIVIAL_THRESHOLD",
    "quasi_newton_minimize",
    "initial_profiles",
    "minimize_constrained",
    "minimize_lagrangian",
]

TRIVIAL_THRESHOLD = 1e-6


@dataclass(frozen=True)
class MinimizeOptions:
    harmonics: int = 16
    grid: int = 128
    grad_tol: float = 1e-8
    max_iters: int = 500
    starts: int = 8
    seed: int = 0
    omega_bounds: tuple = (0.2, 3.0)

    def __post_init__(self):
        object.__setattr__(self, "omega_bounds", tuple(float(w) for w in self.omega_bounds))
        if self.harmonics < 1:
            raise ValueError("harmonics must be >= 1")
        check_points(self.harmonics, self.grid)
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if self.max_iters < 1 or self.starts < 1:
            raise ValueError("max_iters and starts must be >= 1")
        lo, hi = self.omega_bounds
        if not (0 < lo < hi and math.isfinite(hi)):
            raise ValueError(f"omega_bounds must satisfy 0 < low < high, got {self.omega_bounds}")

    def as_dict(self):
        return {
            "harmonics": self.harmonics,
            "grid": self.grid,
            "grad_tol": self.grad_tol,
            "max_iters": self.max_iters,
            "starts": self.starts,
            "seed": self.seed,
            "omega_bounds": list(self.omega_bounds),
        }


@dataclass(frozen=True, eq=False)
class MinimizeResult:
    profile: PeriodicProfile
    energy: float
    multiplier: float
    residual: ResidualReport
    converged: bool
    iterations: int
    start_index: int
    is_trivial: bool
    grad_norm: float = field(default=math.nan)

    def to_dict(self):
        return {
            "profile": self.profile.to_dict(),
            "energy": self.energy,
            "multiplier": self.multiplier,
            "residual": {
                "rms": self.residual.rms,
                "max_abs": self.residual.max_abs,
                "lambda_used": self.residual.lambda_used,
            },
            "converged": self.converged,
            "iterations": self.iterations,
            "start_index": self.start_index,
            "is_trivial": self.is_trivial,
            "grad_norm": self.grad_norm,
            "period": self.profile.period,
        }


def quasi_newton_minimize(fun, x0, grad_tol=1e-8, max_iters=500, memory=10):
    """Limited-memory BFGS with Armijo backtracking.

    Parameters
    ----------
    fun : callable
        ``fun(x) -> (value, gradient)``.
    x0 : array_like
        Starting point.

    Returns
    -------
    x, value, converged, iterations
        ``converged`` is True when the gradient sup-norm dropped to
        ``grad_tol``.  A failed line search returns the best iterate with
        ``converged=False``.
    """
    x = np.array(x0, dtype=float)
    f, g = fun(x)
    s_hist, y_hist = [], []
    it = 0
    while True:
        if np.max(np.abs(g), initial=0.0) <= grad_tol:
            return x, f, True, it
        if it >= max_iters:
            return x, f, False, it

        # two-loop recursion
        q = g.copy()
        alphas = []
        for s, y in zip(reversed(s_hist), reversed(y_hist)):
            rho = 1.0 / (y @ s)
            alpha = rho * (s @ q)
            q -= alpha * y
            alphas.append((rho, alpha))
        if s_hist:
            y_last = y_hist[-1]
            q *= (s_hist[-1] @ y_last) / (y_last @ y_last)
        else:
            q /= max(1.0, np.linalg.norm(g))
        for (s, y), (rho, alpha) in zip(zip(s_hist, y_hist), reversed(alphas)):
            beta = rho * (y @ q)
            q += (alpha - beta) * s
        p = -q
        slope = g @ p
        if not slope < 0:
            s_hist.clear()
            y_hist.clear()
            p = -g / max(1.0, np.linalg.norm(g))
            slope = g @ p

        step = 1.0
        accepted = False
        noise = 8.0 * np.finfo(float).eps * (abs(f) + 1.0)
        for _ in range(60):
            x_new = x + step * p
            f_new, g_new = fun(x_new)
            if np.isfinite(f_new):
                if f_new <= f + 1e-4 * step * slope:
                    accepted = True
                    break
                # Armijo is unresolvable at roundoff level; accept a step
                # that keeps f within a few ulps and shrinks the gradient
                if f_new <= f + noise and np.max(np.abs(g_new)) < np.max(np.abs(g)):
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            if s_hist:
                s_hist.clear()
                y_hist.clear()
                it += 1
                continue
            return x, f, False, it

        s_vec, y_vec = x_new - x, g_new - g
        if s_vec @ y_vec > 1e-12 * np.linalg.norm(s_vec) * np.linalg.norm(y_vec):
            s_hist.append(s_vec)
            y_hist.append(y_vec)
            if len(s_hist) > memory:
                s_hist.pop(0)
                y_hist.pop(0)
        x, f, g = x_new, f_new, g_new
        it += 1


def _sigmoid(u):
    return 1.0 / (1.0 + math.exp(-u)) if u >= 0 else math.exp(u) / (1.0 + math.exp(u))


class _Packing:
    """Map between a profile and the optimizer's flat vector.

    Coefficients are scaled by the square root of their quadratic
    curvature ``xi^2 (1 - (k w0)^2)^2 / 2 + 1`` at the start frequency
    ``w0``, which makes the optimizer's coordinates roughly isotropic.
    """

    def __init__(self, params, harmonics, omega_bounds, omega0, mean_free, fixed_mean=0.0):
        self.k = harmonics
        self.log_lo = math.log(omega_bounds[0])
        self.log_span = math.log(omega_bounds[1]) - self.log_lo
        self.mean_free = mean_free
        self.fixed_mean = fixed_mean
        kw = np.arange(1, harmonics + 1) * omega0
        self.scale = np.sqrt(0.5 * params.xi**2 * (1.0 - kw * kw) ** 2 + 1.0)
        self.mean_scale = math.sqrt(params.xi**2 + 1.0)

    def omega(self, u):
        return math.exp(self.log_lo + self.log_span * _sigmoid(u))

    def u_of(self, omega):
        frac = (math.log(omega) - self.log_lo) / self.log_span
        frac = min(max(frac, 1e-9), 1.0 - 1e-9)
        return math.log(frac / (1.0 - frac))

    def pack(self, profile):
        p = profile.resized(self.k)
        head = [p.mean * self.mean_scale] if self.mean_free else []
        return np.concatenate(
            [head, p.cos_coeffs * self.scale, p.sin_coeffs * self.scale, [self.u_of(p.omega)]]
        )

    def unpack(self, x):
        off = 1 if self.mean_free else 0
        mean = x[0] / self.mean_scale if self.mean_free else self.fixed_mean
        k = self.k
        return PeriodicProfile(
            mean,
            x[off:off + k] / self.scale,
            x[off + k:off + 2 * k] / self.scale,
            self.omega(x[-1]),
        )

    def chain(self, grad, u):
        sig = _sigmoid(u)
        d_u = grad.d_log_omega * self.log_span * sig * (1.0 - sig)
        head = [grad.d_mean / self.mean_scale] if self.mean_free else []
        return np.concatenate([head, grad.d_cos / self.scale, grad.d_sin / self.scale, [d_u]])


def initial_profiles(params, a, opts):
    """Deterministic start list.

    Index 0 is the constant ``a``; 1-3 are ``a + A0 cos(w t)`` with
    ``w = 1, 0.9, 1.1``; the rest are seeded perturbations of index 1 with
    ``1/k^2`` decay.  ``A0 = sqrt(max(-8 tau, 1))``.
    """
    mean = 0.0 if a is None else float(a)
    k = opts.harmonics
    amp = math.sqrt(max(-8.0 * params.tau, 1.0))
    lo, hi = opts.omega_bounds

    def clip(w):
        return min(max(w, lo * 1.01), hi / 1.01)

    def harmonic(w):
        c = np.zeros(k)
        c[0] = amp
        return PeriodicProfile(mean, c, np.zeros(k), clip(w))

    starts = [PeriodicProfile.constant(mean, k, clip(1.0))]
    starts += [harmonic(1.0), harmonic(0.9), harmonic(1.1)]
    rng = np.random.default_rng(opts.seed)
    decay = 1.0 / np.arange(1, k + 1) ** 2
    base = harmonic(1.0)
    while len(starts) < opts.starts:
        da = 0.5 * amp * decay * rng.uniform(-1.0, 1.0, k)
        db = 0.5 * amp * decay * rng.uniform(-1.0, 1.0, k)
        w = clip(math.exp(0.1 * rng.standard_normal()))
        starts.append(PeriodicProfile(mean, base.cos_coeffs + da, base.sin_coeffs + db, w))
    return starts[: opts.starts]


def _oscillation(profile, n_points):
    s = sample(profile, n_points)
    return float(np.max(np.abs(s.values - profile.mean)))


def _run(params, lam, start, opts, mean_free, fixed_mean=0.0):
    packing = _Packing(params, opts.harmonics, opts.omega_bounds, start.omega, mean_free, fixed_mean)

    def fun(x):
        prof = packing.unpack(x)
        value, grad = energy_and_gradient(params, lam, prof, opts.grid, packing.mean_free)
        return value, packing.chain(grad, x[-1])

    x, value, converged, iters = quasi_newton_minimize(
        fun,
        packing.pack(start),
        grad_tol=opts.grad_tol,
        max_iters=opts.max_iters,
    )
    profile = minimal_period(packing.unpack(x))
    if profile.omega > opts.omega_bounds[1]:
        profile = packing.unpack(x)
    else:
        value = energy_and_gradient(params, lam, profile, opts.grid, mean_free)[0]
    grad_norm = float(np.max(np.abs(fun(x)[1])))
    return profile, value, converged, iters, grad_norm


def _best(params, lam, starts, opts, mean_free, fixed_mean, report_lambda):
    runs = []
    for index, start in enumerate(starts):
        profile, value, converged, iters, grad_norm = _run(params, lam, start, opts, mean_free, fixed_mean)
        runs.append((profile, value, converged, iters, index, grad_norm))
    pool = [r for r in runs if r[2]] or runs
    profile, value, converged, iters, index, grad_norm = min(pool, key=lambda r: (r[1], r[4]))
    multiplier = report_lambda(profile)
    return MinimizeResult(
        profile=profile,
        energy=float(value),
        multiplier=multiplier,
        residual=el_residual(params, multiplier, profile, opts.grid),
        converged=bool(converged),
        iterations=int(iters),
        start_index=int(index),
        is_trivial=_oscillation(profile, opts.grid) < TRIVIAL_THRESHOLD,
        grad_norm=grad_norm,
    )


def minimize_constrained(params, a, opts=None, extra_starts=()):
    """Best multi-start minimizer of the average energy at fixed mean ``a``.

    ``extra_starts`` (e.g. a neighbouring sweep solution) are appended after
    the standard list; their means are reset to ``a``.
    """
    opts = opts or MinimizeOptions()
    a = float(a)
    starts = initial_profiles(params, a, opts)
    starts += [s.with_mean(a).resized(opts.harmonics) for s in extra_starts]
    return _best(
        params, 0.0, starts, opts, False, a,
        lambda prof: recover_multiplier(params, prof, opts.grid),
    )


def minimize_lagrangian(params, lam, opts=None, extra_starts=()):
    """Best multi-start minimizer of ``average_energy - lam * mean`` over all profiles."""
    opts = opts or MinimizeOptions()
    lam = float(lam)
    starts = initial_profiles(params, None, opts)
    # the best constant competitor anchors the start list
    c_star = constant_lagrangian_floor(params, lam)[1]
    starts[0] = starts[0].with_mean(c_star)
    starts += [s.resized(opts.harmonics) for s in extra_starts]
    return _best(params, lam, starts, opts, True, 0.0, lambda prof: lam)


def with_starts(opts, starts):
    return replace(opts, starts=starts)
