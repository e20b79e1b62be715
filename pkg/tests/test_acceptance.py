"""Acceptance criteria 1-11, one test each; a summary line per criterion is
printed at the end of the run (see conftest.py)."""

import math
import time

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

import lbperiodic as lb
from lbperiodic.cli import cli_main
from lbperiodic.diagnostics import check_gradient_fd, check_monotone_structure, random_profile

WEAK = lb.ModelParams(1.0, -0.5, 0.0)
STRONG = lb.ModelParams(1.0, -2.0, 0.0)
HOT = lb.ModelParams(1.0, 1.0, 0.0)


def single_harmonic_oracle(params):
    """min over amplitude of the closed-form energy of A cos t at zero mean (gamma = 0, w = 1)."""
    def e(amp):
        return amp**2 / 4 * params.tau + amp**4 / 64

    return minimize_scalar(e, bounds=(0.0, 10.0), method="bounded", options={"xatol": 1e-12}).fun


def test_c01_gradient_fd(record):
    t0 = time.perf_counter()
    result = check_gradient_fd(WEAK, seed=0, trials=20)
    elapsed = time.perf_counter() - t0
    ok = result.value <= 1e-6 and elapsed < 5.0
    record(1, ok, f"gradient vs central FD: max rel err {result.value:.2e} (<= 1e-6), {elapsed:.2f} s (< 5 s)")
    assert ok


def test_c02_quadrature_exactness(record):
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(20):
        p = random_profile(rng, 16, decay=2.0)
        worst = max(worst, abs(lb.average_energy(WEAK, p, 66) - lb.average_energy(WEAK, p, 132)))
    ok = worst <= 1e-11
    record(2, ok, f"K=16 energy at N=66 vs N=132: {worst:.2e} (<= 1e-11)")
    assert ok


def test_c03_form_equivalence(record):
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(50):
        p = random_profile(rng, 16, decay=2.0)
        worst = max(worst, abs(lb.average_energy(WEAK, p, 66) - lb.average_energy_primal(WEAK, p, 66)))
    ok = worst <= 1e-11
    record(3, ok, f"expanded vs primal energy on 50 profiles: {worst:.2e} (<= 1e-11)")
    assert ok


def test_c04_weak_segregation(record):
    oracle = single_harmonic_oracle(WEAK)
    assert oracle == pytest.approx(-0.25, abs=1e-9)
    t0 = time.perf_counter()
    r = lb.minimize_constrained(WEAK, 0.0)
    elapsed = time.perf_counter() - t0
    checks = {
        "energy": r.energy <= oracle + 1e-6,
        "lambda": abs(r.multiplier) <= 1e-4,
        "residual": r.residual.rms <= 1e-5,
        "omega": abs(r.profile.omega - 1.0) <= 0.05,
        "nontrivial": not r.is_trivial,
        "time": elapsed < 2.0,
    }
    ok = all(checks.values())
    record(4, ok, f"psi(0)={r.energy:.7f} (oracle {oracle:.7f}), |lam|={abs(r.multiplier):.1e}, "
                  f"EL rms={r.residual.rms:.1e}, w={r.profile.omega:.5f}, {elapsed:.2f} s")
    assert ok, checks


def test_c05_trivial_regime(record):
    r = lb.minimize_constrained(HOT, 0.0)
    values = lb.sample(r.profile, 128).values
    zero = float(np.max(np.abs(values)))
    ok = abs(r.energy) <= 1e-8 and zero <= 1e-8 and r.is_trivial
    record(5, ok, f"psi(0)={r.energy:.1e}, sup|p|={zero:.1e}, trivial={r.is_trivial}")
    assert ok


def test_c06_existence_condition(record):
    grid = np.linspace(-0.2, 0.2, 5)
    weak = lb.existence_condition(WEAK, lb.sweep_mean(WEAK, grid))
    strong = lb.existence_condition(STRONG, lb.sweep_mean(STRONG, grid))
    # m_f oracles: min of h* = (1+tau)/2 x^2 + x^4/24 is 0 for tau >= -1, else -3/2 (1+tau)^2
    ok_weak = (weak.condition_holds and weak.m_f == pytest.approx(0.0, abs=1e-12)
               and weak.psi_at_zero < weak.m_f and not weak.is_trivial
               and abs(weak.minimizer_period - 2 * math.pi) <= 0.05 * 2 * math.pi)
    ok_strong = (strong.m_f == pytest.approx(-1.5, abs=1e-9)
                 and strong.psi_at_zero <= -4.0 + 1e-3 and strong.psi_at_zero < strong.m_f)
    ok = ok_weak and ok_strong
    record(6, ok, f"tau=-0.5: psi(0)={weak.psi_at_zero:.5f} < m_f={weak.m_f:g}, period={weak.minimizer_period:.4f}; "
                  f"tau=-2: psi(0)={strong.psi_at_zero:.5f} < m_f={strong.m_f:g}")
    assert ok


def test_c07_convexity(record):
    t0 = time.perf_counter()
    table = lb.sweep_mean(WEAK, np.linspace(-1.5, 1.5, 31))
    report = lb.check_convexity(table, rel_tol=1e-4)
    elapsed = time.perf_counter() - t0
    remaining = lb.landscape.convexity_violations(report.table.a_grid, report.table.psi, 1e-4)
    ok = report.ok and not remaining and elapsed < 60.0
    record(7, ok, f"31-point sweep: {len(report.initial_violations)} initial violations, "
                  f"{len(remaining)} after re-solve, {elapsed:.1f} s (< 60 s)")
    assert ok


def test_c08_duality(record):
    # the a-grid has to resolve the optimal means (about +-0.14 at lam = +-0.2);
    # spacing 0.025 keeps the grid-restriction error well below the tolerance
    table = lb.sweep_mean(WEAK, np.linspace(-0.5, 0.5, 41))
    dual = lb.sweep_lambda(WEAK, np.array([-0.2, -0.1, 0.0, 0.1, 0.2]))
    rep = lb.check_duality(table, dual)
    ok = rep.max_abs_deviation <= 1e-3
    record(8, ok, f"max |psi_lam - min_a(psi(a) - lam a)| = {rep.max_abs_deviation:.2e} (<= 1e-3)")
    assert ok


def test_c09_envelope(record):
    rng = np.random.default_rng(9)
    ok_random = True
    for _ in range(100):
        n = int(rng.integers(3, 40))
        xs = np.sort(rng.uniform(-5, 5, n))
        xs = np.unique(xs)
        ys = rng.normal(size=xs.size)
        env = lb.convex_envelope(xs, ys)
        again = lb.convex_envelope(xs, env)
        second = np.diff(env) / np.diff(xs)
        ok_random &= bool(np.all(env <= ys + 1e-12) and np.allclose(again, env, atol=1e-12)
                          and np.all(np.diff(second) >= -1e-9))
    xs = np.linspace(-3.0, 3.0, 6001)
    env0 = float(np.interp(0.0, xs, lb.convex_envelope(xs, lb.potential_hstar(STRONG, xs))))
    ok = ok_random and abs(env0 + 1.5) <= 1e-6
    record(9, ok, f"100 random samples ok={ok_random}; tau=-2 envelope(0)={env0:.9f} (-1.5 +- 1e-6)")
    assert ok


def test_c10_monotone_structure(record):
    r = lb.minimize_constrained(WEAK, 0.0)
    res = check_monotone_structure(r.profile)
    ok = r.converged and not r.is_trivial and res.value == 2
    record(10, ok, f"derivative sign changes per period: {res.value} (exactly 2)")
    assert ok


def test_c11_determinism(record, tmp_path, monkeypatch):
    monkeypatch.setenv("LB_CACHE_DIR", str(tmp_path / "cache"))
    paths = [tmp_path / "run1.json", tmp_path / "run2.json"]
    for path in paths:
        code = cli_main(["minimize", "--xi", "1", "--tau", "-0.5", "--gamma", "0", "--mean", "0",
                         "--seed", "7", "--no-cache", "-o", str(path)])
        assert code == 0
    a, b = (p.read_bytes() for p in paths)
    ok = a == b
    record(11, ok, f"two seeded runs of criterion 4 -> result files byte-identical={ok} ({len(a)} bytes)")
    assert ok
