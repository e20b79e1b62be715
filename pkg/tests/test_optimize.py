import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize as scipy_minimize, rosen, rosen_der

from lbperiodic import (
    MinimizeOptions,
    ModelParams,
    PeriodicProfile,
    average_energy,
    initial_profiles,
    minimize_constrained,
    minimize_lagrangian,
    potential_hstar,
    quasi_newton_minimize,
)

WEAK = ModelParams(1.0, -0.5, 0.0)
FAST = MinimizeOptions(harmonics=8, grid=64, starts=4)


def test_rosenbrock_against_scipy():
    x0 = np.array([-1.2, 1.0, 0.5, -0.3])
    x, f, ok, _ = quasi_newton_minimize(lambda x: (rosen(x), rosen_der(x)), x0, grad_tol=1e-9, max_iters=5000)
    ref = scipy_minimize(rosen, x0, jac=rosen_der, method="L-BFGS-B", options={"gtol": 1e-12, "ftol": 0}).x
    assert ok
    np.testing.assert_allclose(x, ref, atol=1e-6)
    assert f < 1e-14


@given(st.integers(0, 500))
def test_quadratic(seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(5, 5))
    a = m @ m.T + np.eye(5)
    b = rng.normal(size=5)
    x, _, ok, _ = quasi_newton_minimize(lambda x: (0.5 * x @ a @ x - b @ x, a @ x - b), np.zeros(5), grad_tol=1e-10)
    assert ok
    np.testing.assert_allclose(x, np.linalg.solve(a, b), atol=1e-8)


def test_iteration_cap():
    _, _, ok, its = quasi_newton_minimize(lambda x: (rosen(x), rosen_der(x)), np.array([-1.2, 1.0]), max_iters=3)
    assert not ok and its == 3


@pytest.mark.parametrize("kwargs", [
    {"harmonics": 0}, {"grid": 10}, {"grad_tol": 0}, {"max_iters": 0}, {"starts": 0},
    {"omega_bounds": (1.0, 0.5)}, {"omega_bounds": (0.0, 1.0)},
])
def test_options_validation(kwargs):
    with pytest.raises(ValueError):
        MinimizeOptions(**kwargs)


def test_initial_profiles():
    opts = MinimizeOptions(harmonics=6, grid=32, starts=7, seed=3)
    starts = initial_profiles(WEAK, 0.3, opts)
    assert len(starts) == 7
    assert all(s.mean == 0.3 and s.harmonics == 6 for s in starts)
    assert not np.any(starts[0].cos_coeffs) and starts[1].cos_coeffs[0] == pytest.approx(2.0)
    assert [s.omega for s in starts[1:4]] == pytest.approx([1.0, 0.9, 1.1])
    again = initial_profiles(WEAK, 0.3, opts)
    assert all(x == y for x, y in zip(starts, again))
    other = initial_profiles(WEAK, 0.3, MinimizeOptions(harmonics=6, grid=32, starts=7, seed=4))
    assert not all(x == y for x, y in zip(starts, other))


def single_harmonic_best(tau):
    # A cos t at zero mean, gamma = 0: A^2 tau/4 + A^4/64, minimized at A^2 = -8 tau
    return -(tau**2)


@pytest.mark.parametrize("tau", [-0.5, -1.0, -2.0])
def test_beats_single_harmonic_oracle(tau):
    r = minimize_constrained(ModelParams(1.0, tau, 0.0), 0.0, FAST)
    assert r.converged
    assert r.energy <= single_harmonic_best(tau) + 1e-8
    assert r.profile.mean == 0.0


@settings(max_examples=8, deadline=None)
@given(st.floats(-1.2, 1.2))
def test_constrained_below_constant_competitor(a):
    r = minimize_constrained(WEAK, a, FAST)
    assert r.profile.mean == a
    assert r.energy <= potential_hstar(WEAK, a) + 1e-12
    assert r.energy == pytest.approx(average_energy(WEAK, r.profile, FAST.grid), abs=1e-14)


@settings(max_examples=6, deadline=None)
@given(st.floats(-0.6, 0.6))
def test_lagrangian_below_constant_scan(lam):
    xs = np.linspace(-6, 6, 120001)
    floor = float(np.min(potential_hstar(WEAK, xs) - lam * xs))
    r = minimize_lagrangian(WEAK, lam, FAST)
    assert r.energy <= floor + 1e-9
    assert r.multiplier == lam


def test_lagrangian_zero_matches_constrained_zero():
    # symmetric potential: the optimal mean at lam = 0 is 0
    r_lam = minimize_lagrangian(WEAK, 0.0, FAST)
    r_a = minimize_constrained(WEAK, 0.0, FAST)
    assert r_lam.energy <= r_a.energy + 1e-9
    assert r_lam.energy == pytest.approx(r_a.energy, abs=1e-6)


def test_extra_start_never_hurts():
    base = minimize_constrained(WEAK, 0.4, FAST)
    again = minimize_constrained(WEAK, 0.4, FAST, extra_starts=[base.profile])
    assert again.energy <= base.energy + 1e-12


def test_deterministic_and_serializable():
    r1 = minimize_constrained(WEAK, 0.1, FAST)
    r2 = minimize_constrained(WEAK, 0.1, FAST)
    assert r1.profile == r2.profile and r1.energy == r2.energy
    d = json.loads(json.dumps(r1.to_dict()))
    assert PeriodicProfile.from_dict(d["profile"]) == r1.profile
    assert d["period"] == pytest.approx(r1.profile.period)


def test_trivial_regime():
    r = minimize_constrained(ModelParams(1.0, 1.0, 0.0), 0.0, FAST)
    assert r.is_trivial and r.energy == 0.0
