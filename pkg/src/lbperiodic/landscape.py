"""
Reconstruction of the constrained value function and its dual.

``sweep_mean`` samples ``psi(a)``, the least average energy at mean ``a``
found over periodic profiles; ``sweep_lambda`` samples the Lagrangian value
``psi_lam``.  Every value is an upper bound on the exact infimum, so the
checks below treat discrepancies as solver diagnostics.

Where the exact value function is a common tangent between a patterned
state and a constant state (phase coexistence), the infimum is approached
only by profiles that alternate between the two over ever longer periods.
``check_convexity`` therefore re-solves violating points from spliced
seeds built out of the bracketing hull neighbours.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.fft import next_fast_len

from .model import constant_state_floor, potential_hstar
from .optimize import (
    MinimizeOptions,
    minimize_constrained,
    minimize_lagrangian,
    _run,
    _oscillation,
    TRIVIAL_THRESHOLD,
    MinimizeResult,
)
from .energy import el_residual, recover_multiplier
from .profile import PeriodicProfile, evaluate

__all__ = [
    "LandscapeTable",
    "DualTable",
    "ConvexityReport",
    "DualityReport",
    "ConditionReport",
    "ConjectureReport",
    "default_mean_grid",
    "default_lambda_grid",
    "sweep_mean",
    "sweep_lambda",
    "convex_envelope",
    "check_duality",
    "check_convexity",
    "exposedness",
    "existence_condition",
    "conjecture_gap",
]


def default_mean_grid():
    return np.linspace(-1.5, 1.5, 31)


def default_lambda_grid():
    return np.linspace(-0.5, 0.5, 21)


@dataclass(frozen=True, eq=False)
class LandscapeTable:
    a_grid: np.ndarray
    psi: np.ndarray
    hstar: np.ndarray
    envelope: np.ndarray
    nontrivial: np.ndarray
    results: tuple
    params: object = None
    opts: MinimizeOptions = None

    @classmethod
    def from_values(cls, a_grid, psi, hstar=None):
        """Bare table around given values, without minimizer records."""
        a_grid = np.asarray(a_grid, dtype=float)
        psi = np.asarray(psi, dtype=float)
        hstar = psi.copy() if hstar is None else np.asarray(hstar, dtype=float)
        return cls(
            a_grid=a_grid,
            psi=psi,
            hstar=hstar,
            envelope=convex_envelope(a_grid, hstar),
            nontrivial=np.zeros(a_grid.size, dtype=bool),
            results=(),
        )

    def __len__(self):
        return self.a_grid.size

    def index_of(self, a, atol=1e-12):
        hits = np.flatnonzero(np.abs(self.a_grid - a) <= atol)
        if hits.size == 0:
            raise ValueError(f"a={a} is not on the mean grid")
        return int(hits[0])


@dataclass(frozen=True, eq=False)
class DualTable:
    lambda_grid: np.ndarray
    psi_dual: np.ndarray
    mean_at_opt: np.ndarray
    results: tuple = ()


def _table(params, opts, a_grid, results):
    a_grid = np.asarray(a_grid, dtype=float)
    hstar = potential_hstar(params, a_grid)
    return LandscapeTable(
        a_grid=a_grid,
        psi=np.array([r.energy for r in results]),
        hstar=hstar,
        envelope=convex_envelope(a_grid, hstar),
        nontrivial=np.array([not r.is_trivial for r in results]),
        results=tuple(results),
        params=params,
        opts=opts,
    )


def sweep_mean(params, a_grid=None, opts=None):
    """Constrained minimum at each mean on an ascending grid.

    Each point is warm-started from the previous point's minimizer in
    addition to the standard start list.
    """
    opts = opts or MinimizeOptions()
    a_grid = default_mean_grid() if a_grid is None else np.asarray(a_grid, dtype=float)
    if a_grid.ndim != 1 or a_grid.size < 3:
        raise ValueError("a_grid must be one-dimensional with at least 3 points")
    if np.any(np.diff(a_grid) <= 0):
        raise ValueError("a_grid must be strictly ascending")
    results = []
    for a in a_grid:
        warm = [results[-1].profile] if results else []
        results.append(minimize_constrained(params, a, opts, extra_starts=warm))
    return _table(params, opts, a_grid, results)


def sweep_lambda(params, lambda_grid=None, opts=None):
    opts = opts or MinimizeOptions()
    lambda_grid = default_lambda_grid() if lambda_grid is None else np.asarray(lambda_grid, dtype=float)
    if lambda_grid.ndim != 1 or lambda_grid.size < 1 or np.any(np.diff(lambda_grid) <= 0):
        raise ValueError("lambda_grid must be strictly ascending")
    results = []
    for lam in lambda_grid:
        warm = [results[-1].profile] if results else []
        results.append(minimize_lagrangian(params, lam, opts, extra_starts=warm))
    return DualTable(
        lambda_grid=lambda_grid,
        psi_dual=np.array([r.energy for r in results]),
        mean_at_opt=np.array([r.profile.mean for r in results]),
        results=tuple(results),
    )


def _lower_hull(xs, ys):
    hull = []
    for i in range(len(xs)):
        while len(hull) >= 2:
            j, k = hull[-2], hull[-1]
            # drop k unless (j, k, i) turns left
            cross = (xs[k] - xs[j]) * (ys[i] - ys[j]) - (xs[i] - xs[j]) * (ys[k] - ys[j])
            if cross <= 0.0:
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def convex_envelope(xs, ys):
    """Greatest convex minorant of the piecewise-linear data, on the same grid."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim != 1 or xs.shape != ys.shape:
        raise ValueError("xs and ys must be 1-D arrays of equal length")
    if xs.size < 2:
        raise ValueError("need at least two points")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("xs must be strictly ascending")
    hull = _lower_hull(xs, ys)
    out = np.interp(xs, xs[hull], ys[hull])
    out[hull] = ys[hull]
    return out


@dataclass(frozen=True, eq=False)
class DualityReport:
    lambda_grid: np.ndarray
    grid_min: np.ndarray
    psi_dual: np.ndarray
    deviation: np.ndarray
    max_abs_deviation: float
    higher_indices: list

    @property
    def one_sided_ok(self):
        return not self.higher_indices


def check_duality(landscape, dual):
    """Compare ``psi_lam`` with ``min_a psi(a) - lam a`` over the mean grid.

    ``deviation = psi_dual - grid_min``; it may only be negative (the
    Lagrangian search is over a superset), so positive entries beyond
    ``1e-9`` are listed in ``higher_indices``.
    """
    lam = np.asarray(dual.lambda_grid, dtype=float)
    grid_min = np.min(landscape.psi[None, :] - lam[:, None] * landscape.a_grid[None, :], axis=1)
    deviation = dual.psi_dual - grid_min
    return DualityReport(
        lambda_grid=lam,
        grid_min=grid_min,
        psi_dual=np.asarray(dual.psi_dual),
        deviation=deviation,
        max_abs_deviation=float(np.max(np.abs(deviation))) if deviation.size else 0.0,
        higher_indices=[int(j) for j in np.flatnonzero(deviation > 1e-9)],
    )


def convexity_violations(a_grid, psi, rel_tol=1e-4):
    """Interior indices where ``psi`` sits above the chord of its neighbours."""
    a_grid = np.asarray(a_grid, dtype=float)
    psi = np.asarray(psi, dtype=float)
    out = []
    for i in range(1, psi.size - 1):
        w = (a_grid[i + 1] - a_grid[i]) / (a_grid[i + 1] - a_grid[i - 1])
        chord = w * psi[i - 1] + (1.0 - w) * psi[i + 1]
        if psi[i] > chord + rel_tol * (1.0 + abs(psi[i])):
            out.append(i)
    return out


@dataclass(frozen=True, eq=False)
class ConvexityReport:
    violations: list
    initial_violations: list
    resolved: list
    rounds: int
    table: LandscapeTable

    @property
    def ok(self):
        return not self.violations


def _splice_seed(left, right, a, period_target, rel_cut=1e-4):
    """Profile alternating ``left`` and ``right`` over one long period.

    The time fraction spent on ``left`` is chosen so the spliced mean is
    close to ``a``; the caller pins the mean exactly.
    """
    theta = (right.mean - a) / (right.mean - left.mean)

    def span(p, frac):
        target = frac * period_target
        if _oscillation(p, 4 * p.harmonics + 2) < TRIVIAL_THRESHOLD:
            return target
        return max(1, round(target / p.period)) * p.period

    len_l, len_r = span(left, theta), span(right, 1.0 - theta)
    total = len_l + len_r
    omega = 2.0 * math.pi / total

    def cutoff(p):
        c = np.hypot(p.cos_coeffs, p.sin_coeffs)
        if _oscillation(p, 4 * p.harmonics + 2) < TRIVIAL_THRESHOLD:
            return 0.0
        k = np.flatnonzero(c >= rel_cut * c.max()).max() + 1
        return k * p.omega

    freq = max(cutoff(left), cutoff(right), 1.0)
    harmonics = int(math.ceil(freq / omega))
    m = 1 << int(math.ceil(math.log2(8 * harmonics + 8)))
    t = np.arange(m) * total / m
    x = np.where(t < len_l, evaluate(left, t, 0), evaluate(right, t - len_l, 0))
    c = np.fft.rfft(x) / m
    return PeriodicProfile(a, 2.0 * c.real[1:harmonics + 1], -2.0 * c.imag[1:harmonics + 1], omega)


def _resolve_point(params, opts, table, i, hull, splice_period):
    a = table.a_grid[i]
    doubled = replace(opts, starts=2 * opts.starts)
    warm = [table.results[j].profile for j in (i - 1, i + 1) if 0 <= j < len(table)]
    best = minimize_constrained(params, a, doubled, extra_starts=warm)

    # hull neighbours with primitive (short-period) minimizers
    lo_w = opts.omega_bounds[0]
    left = [j for j in hull if j < i and table.results[j].profile.omega >= lo_w]
    right = [j for j in hull if j > i and table.results[j].profile.omega >= lo_w]
    if left and right:
        pl = table.results[left[-1]].profile
        pr = table.results[right[0]].profile
        seed = _splice_seed(pl, pr, a, splice_period)
        k = seed.harmonics
        grid = next_fast_len(4 * k + 2, real=True)
        long_opts = replace(
            opts,
            harmonics=k,
            grid=grid,
            max_iters=max(opts.max_iters, 4000),
            omega_bounds=(min(opts.omega_bounds[0], 0.5 * seed.omega), opts.omega_bounds[1]),
        )
        profile, value, converged, iters, grad_norm = _run(params, 0.0, seed, long_opts, False, a)
        if value < best.energy:
            mult = recover_multiplier(params, profile, grid)
            best = MinimizeResult(
                profile=profile,
                energy=float(value),
                multiplier=mult,
                residual=el_residual(params, mult, profile, grid),
                converged=bool(converged),
                iterations=int(iters),
                start_index=-1,
                is_trivial=_oscillation(profile, grid) < TRIVIAL_THRESHOLD,
                grad_norm=grad_norm,
            )
    return best


def check_convexity(landscape, rel_tol=1e-4, resolve=True, max_rounds=6, splice_period=1000.0):
    """Midpoint-convexity check with re-solves of flagged points.

    Each flagged point is re-solved with doubled starts, warm starts from
    both neighbours, and a spliced two-phase seed of period about
    ``splice_period``.  A lower energy replaces the table entry, and the
    check repeats until no violation is left, nothing improves, or
    ``max_rounds`` is reached.  ``spliced`` rows carry ``start_index = -1``.
    """
    if len(landscape) < 3:
        raise ValueError("need at least 3 grid points")
    initial = convexity_violations(landscape.a_grid, landscape.psi, rel_tol)
    violations = list(initial)
    table = landscape
    resolved = []
    rounds = 0
    can_resolve = resolve and landscape.params is not None and landscape.opts is not None
    while violations and can_resolve and rounds < max_rounds:
        rounds += 1
        results = list(table.results)
        hull = _lower_hull(table.a_grid, table.psi)
        improved = False
        for i in violations:
            new = _resolve_point(table.params, table.opts, table, i, hull, splice_period)
            if new.energy < results[i].energy - 1e-12:
                results[i] = new
                improved = True
                if i not in resolved:
                    resolved.append(i)
        table = _table(table.params, table.opts, table.a_grid, results)
        violations = convexity_violations(table.a_grid, table.psi, rel_tol)
        if not improved:
            break
    return ConvexityReport(
        violations=violations,
        initial_violations=initial,
        resolved=sorted(resolved),
        rounds=rounds,
        table=table,
    )


def exposedness(landscape, index, delta=1e-4):
    """Grid-level verdict on whether ``a[index]`` is an exposed point.

    The supporting slope is the midpoint of the one-sided secant slopes.
    With margins ``m_j = (psi_j - psi_i - lam (a_j - a_i)) / |a_j - a_i|``:
    "exposed" if every ``m_j > delta``; "not-exposed" if the slope supports
    the data (every ``m_j >= -delta``) but touches another point
    (some ``m_j <= delta``); otherwise "inconclusive", which covers
    boundary indices and data that no slope supports.
    """
    a = np.asarray(landscape.a_grid, dtype=float)
    psi = np.asarray(landscape.psi, dtype=float)
    n = a.size
    if not 0 <= index < n:
        raise IndexError(f"index {index} out of range for {n} grid points")
    if index == 0 or index == n - 1:
        return "inconclusive"
    slope_l = (psi[index] - psi[index - 1]) / (a[index] - a[index - 1])
    slope_r = (psi[index + 1] - psi[index]) / (a[index + 1] - a[index])
    lam = 0.5 * (slope_l + slope_r)
    others = np.arange(n) != index
    da = a[others] - a[index]
    margins = (psi[others] - psi[index] - lam * da) / np.abs(da)
    if np.all(margins > delta):
        return "exposed"
    if np.all(margins >= -delta):
        return "not-exposed"
    return "inconclusive"


@dataclass(frozen=True)
class ConditionReport:
    psi_at_zero: float
    m_f: float
    floor_argmin: float
    condition_holds: bool
    margin: float
    exposedness_verdict: str
    minimizer_period: float = None
    is_trivial: bool = True

    def as_dict(self):
        return {
            "psi_at_zero": self.psi_at_zero,
            "m_f": self.m_f,
            "floor_argmin": self.floor_argmin,
            "condition_holds": self.condition_holds,
            "margin": self.margin,
            "exposedness_verdict": self.exposedness_verdict,
            "minimizer_period": self.minimizer_period,
            "is_trivial": self.is_trivial,
        }


def existence_condition(params, landscape, margin=1e-6):
    """Compare the zero-mean value with the constant-state floor.

    ``condition_holds`` is ``psi(0) < m_f - margin``.  The exposedness
    verdict at ``a = 0`` is reported alongside, since the existence result
    also asks for it.
    """
    try:
        i0 = landscape.index_of(0.0)
    except ValueError:
        raise ValueError("landscape grid must contain a = 0") from None
    m_f, t_min = constant_state_floor(params)
    psi0 = float(landscape.psi[i0])
    result = landscape.results[i0]
    return ConditionReport(
        psi_at_zero=psi0,
        m_f=float(m_f),
        floor_argmin=float(t_min),
        condition_holds=bool(psi0 < m_f - margin),
        margin=float(margin),
        exposedness_verdict=exposedness(landscape, i0),
        minimizer_period=None if result.is_trivial else float(result.profile.period),
        is_trivial=bool(result.is_trivial),
    )


@dataclass(frozen=True, eq=False)
class ConjectureReport:
    a_grid: np.ndarray
    gap: np.ndarray
    max_gap: float
    max_gap_at: float
    min_gap: float
    tolerance: float
    evidence_against_equality: bool

    def as_dict(self):
        return {
            "a_grid": self.a_grid.tolist(),
            "gap": self.gap.tolist(),
            "max_gap": self.max_gap,
            "max_gap_at": self.max_gap_at,
            "min_gap": self.min_gap,
            "tolerance": self.tolerance,
            "evidence_against_equality": self.evidence_against_equality,
        }


def conjecture_gap(landscape, solver_tol=1e-6):
    """``envelope - psi`` on the grid.

    A positive gap means a periodic profile beats the convex envelope of
    the constant-state energy; since ``psi`` is only an upper bound on the
    exact value, a gap beyond ``10 * solver_tol`` is numerical evidence
    against the envelope being the value function, never a proof either way.
    """
    gap = np.asarray(landscape.envelope) - np.asarray(landscape.psi)
    j = int(np.argmax(gap))
    return ConjectureReport(
        a_grid=np.asarray(landscape.a_grid),
        gap=gap,
        max_gap=float(gap[j]),
        max_gap_at=float(landscape.a_grid[j]),
        min_gap=float(np.min(gap)),
        tolerance=float(solver_tol),
        evidence_against_equality=bool(gap[j] > 10.0 * solver_tol),
    )
