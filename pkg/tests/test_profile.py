import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lbperiodic import (
    PeriodicProfile,
    QuadratureError,
    evaluate,
    minimal_period,
    min_points,
    phase_align,
    phase_point,
    sample,
    sup_norms,
)
from lbperiodic.diagnostics import random_profile
from lbperiodic.profile import project, shifted, synthesize


def direct(profile, t, order=0):
    """Reference: explicit sum of derivatives of cos and sin terms."""
    total = profile.mean if order == 0 else 0.0
    for k in range(1, profile.harmonics + 1):
        kw = k * profile.omega
        a, b = profile.cos_coeffs[k - 1], profile.sin_coeffs[k - 1]
        # d^m/dt^m cos(kwt) = kw^m cos(kwt + m pi/2)
        total += kw**order * (a * math.cos(kw * t + order * math.pi / 2) + b * math.sin(kw * t + order * math.pi / 2))
    return total


profiles = st.builds(
    lambda seed, k: random_profile(np.random.default_rng(seed), k),
    st.integers(0, 10_000),
    st.integers(1, 6),
)


def test_validation():
    with pytest.raises(ValueError):
        PeriodicProfile(0, [1, 2], [1], 1)
    with pytest.raises(ValueError):
        PeriodicProfile(0, [], [], 1)
    for w in (0, -1, math.inf, math.nan):
        with pytest.raises(ValueError):
            PeriodicProfile(0, [1], [0], w)
    with pytest.raises(ValueError):
        PeriodicProfile(math.nan, [1], [0], 1)
    with pytest.raises(ValueError):
        PeriodicProfile(0, [math.inf], [0], 1)


def test_immutable_arrays():
    p = PeriodicProfile(0, [1.0], [0.0], 1)
    with pytest.raises(ValueError):
        p.cos_coeffs[0] = 2.0


@given(profiles, st.floats(-10, 10), st.integers(0, 4))
def test_evaluate_matches_direct_sum(p, t, order):
    assert evaluate(p, t, order) == pytest.approx(direct(p, t, order), abs=1e-9 * (1 + 10**order))


def test_evaluate_bad_order():
    with pytest.raises(ValueError):
        evaluate(PeriodicProfile.constant(0.0), 0.0, 5)


@settings(max_examples=30)
@given(profiles, st.integers(0, 4))
def test_sample_matches_evaluate(p, order):
    n = min_points(p.harmonics) + 3
    t = np.arange(n) * p.period / n
    np.testing.assert_allclose(sample(p, n).derivative(order), evaluate(p, t, order), atol=1e-10 * 10**order)


def test_quadrature_floor():
    p = PeriodicProfile.constant(0.0, 4)
    sample(p, 18)
    with pytest.raises(QuadratureError):
        sample(p, 17)


@given(st.integers(1, 10), st.integers(0, 20), st.integers(0, 1000))
def test_synthesize_project_roundtrip(k, extra, seed):
    n = 2 * k + 2 + extra
    rng = np.random.default_rng(seed)
    c = rng.normal(size=k) + 1j * rng.normal(size=k)
    values = synthesize(c, n)
    ca, cb = project(values, k)
    # grid sums of cos and sin against the samples are N/2 times the coefficients
    np.testing.assert_allclose(ca, 0.5 * n * c.real, atol=1e-10 * n)
    np.testing.assert_allclose(cb, -0.5 * n * c.imag, atol=1e-10 * n)


def test_serialization_roundtrip():
    p = random_profile(np.random.default_rng(5), 7)
    data = json.loads(json.dumps(p.to_dict()))
    assert set(data) == {"mean", "omega", "cos_coeffs", "sin_coeffs"}
    assert PeriodicProfile.from_dict(data) == p


@given(profiles, st.floats(-5, 5), st.floats(-5, 5))
def test_shift(p, shift, t):
    assert evaluate(shifted(p, shift), t) == pytest.approx(evaluate(p, t + shift), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(profiles)
def test_phase_align_puts_minimum_at_zero(p):
    q = phase_align(p, 256)
    dense = evaluate(q, np.linspace(0, q.period, 4001))
    assert evaluate(q, 0.0) <= dense.min() + 1e-9
    # a pure time shift: same range of values
    assert dense.max() == pytest.approx(evaluate(p, np.linspace(0, p.period, 4001)).max(), abs=1e-3)
    assert q.mean == p.mean and q.omega == p.omega


def test_phase_point():
    p = PeriodicProfile(0.5, [1.0], [0.0], 2.0)
    pp = phase_point(p, math.pi / 4)
    assert pp.value == pytest.approx(0.5, abs=1e-15)
    assert pp.slope == pytest.approx(-2.0)


def test_minimal_period():
    p = PeriodicProfile(0.1, [0, 1.0, 0, 0.2], [0, 0.3, 0, 0], 0.5)
    q = minimal_period(p)
    assert q.omega == 1.0
    np.testing.assert_array_equal(q.cos_coeffs, [1.0, 0.2, 0, 0])
    t = np.linspace(0, 20, 77)
    np.testing.assert_allclose(evaluate(q, t), evaluate(p, t), atol=1e-13)
    coprime = PeriodicProfile(0, [1.0, 0.5], [0, 0], 1)
    assert minimal_period(coprime) is coprime


def test_sup_norms():
    p = PeriodicProfile(0, [2.0], [0.0], 3.0)
    v, d = sup_norms(p, 4 * 12)
    assert v == pytest.approx(2.0)
    assert d == pytest.approx(6.0, rel=1e-2)
