import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from ellirat import geometry as geo
from ellirat import john
from ellirat import logconcave as lc
from ellirat.corpus import random_piecewise_linear, triangle
from ellirat.mvie import mvie


def vrat(K):
    return (K.volume / mvie(K).ellipsoid.volume) ** (1 / K.dim)


# phi

def test_phi_indicator_is_linear():
    K = geo.random_polygon(np.random.default_rng(0))
    f = lc.indicator(K, 2.0)
    E = mvie(K).ellipsoid.volume
    for t in (0.1, 0.5, 1.0):
        assert john.phi(f, t) == pytest.approx(t * 2 * E, rel=1e-9)


def test_phi_truncated_gauge_profile():
    t0 = 0.4
    f = lc.truncated_gauge(triangle(), t0)
    base = john.phi(f, t0)
    for t in (0.02, 0.1, 0.3, 0.8):
        expected = (t / t0) * (1 - math.log(t / t0) / 2) ** 2
        assert john.phi(f, t) / base == pytest.approx(expected, rel=1e-7)


@pytest.mark.parametrize("alpha", [1.0, 2.0])
def test_phi_gauge_power(alpha):
    K = triangle()
    f = lc.gauge_power(K, alpha)
    E = math.pi  # the triangle's incircle is the unit disk
    for t in (0.05, 0.3, 0.7):
        assert john.phi(f, t) == pytest.approx(t * (-math.log(t)) ** (2 / alpha) * E, rel=1e-7)


def test_phi_degenerate_level_is_zero():
    f = lc.gauge_power(geo.cube(2))
    assert john.phi(f, 1.0) == 0.0


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10**6))
def test_log_phi_concave(seed):
    rng = np.random.default_rng(seed)
    f = random_piecewise_linear(rng)
    scale = john.find_t0(f).phi_at_t0
    for _ in range(10):
        t0, t1 = rng.uniform(1e-3, 1, 2)
        lam = rng.uniform()
        lhs = john.phi(f, t0 ** (1 - lam) * t1 ** lam)
        rhs = john.phi(f, t0) ** (1 - lam) * john.phi(f, t1) ** lam
        assert lhs >= rhs - 1e-7 * scale


# optimal level

def test_t0_examples():
    assert john.find_t0(lc.indicator(triangle())).t0 == 1.0
    for alpha in (1.0, 2.0):
        res = john.find_t0(lc.gauge_power(geo.cube(2), alpha))
        assert res.t0 == pytest.approx(math.exp(-2 / alpha), abs=1e-4)
    assert john.find_t0(lc.truncated_gauge(geo.cube(2), 0.5)).t0 == pytest.approx(0.5, abs=1e-4)


def test_t0_in_range_and_ellipsoid_inside():
    rng = np.random.default_rng(11)
    for _ in range(5):
        f = random_piecewise_linear(rng)
        res = john.find_t0(f)
        assert math.exp(-2) - 1e-9 <= res.t0 <= 1
        assert geo.ellipsoid_in_polytope(res.ellipsoid, lc.level_set(f, res.t0), tol=1e-7)
        assert res.integral_ratio >= 1
        # the golden search visited the returned neighbourhood
        assert min(abs(s - res.s0) for s, _ in res.search_trace) < 1e-4


def test_t0_affine_invariant():
    rng = np.random.default_rng(4)
    f = random_piecewise_linear(rng)
    T = geo.random_affine(rng, 2)
    a, b = john.find_t0(f), john.find_t0(lc.push_forward(f, T))
    assert b.t0 == pytest.approx(a.t0, abs=1e-4)
    assert b.integral_ratio == pytest.approx(a.integral_ratio, rel=1e-3)


def test_degenerate_top_level_is_skipped():
    f = lc.gauge_power(geo.cube(2))
    assert john.phi(f, 1.0) == 0.0
    assert john.find_t0(f).t0 < 1


# integral ratio

def test_integral_ratio_indicator_is_volume_ratio():
    K = geo.random_polygon(np.random.default_rng(8))
    assert john.integral_ratio(lc.indicator(K)) == pytest.approx(vrat(K), rel=1e-9)
    assert john.integral_ratio(lc.indicator(geo.cube(2))) == pytest.approx(math.sqrt(4 / math.pi))


def test_integral_ratio_64gon_gauge():
    K = geo.regular_polygon(64)
    f = lc.gauge_power(K, 1.0)
    assert john.integral_ratio(f) == pytest.approx(math.e * math.sqrt(2) / 2 * vrat(K), rel=1e-4)
    assert math.e * math.sqrt(2) / 2 == pytest.approx(1.9221, abs=1e-4)


def test_integral_ratio_closed_form_against_direct_quadrature():
    """I.rat for GaugePower(square, 2) from an independent 1-D integral."""
    f = lc.gauge_power(geo.cube(2), 2.0)
    Z, _ = integrate.dblquad(lambda y, x: math.exp(-max(abs(x), abs(y)) ** 2), -8, 8, -8, 8,
                             epsabs=1e-11)
    t0 = math.exp(-1)
    phi0 = t0 * 1.0 * math.pi  # K_{t0} = square, E = unit disk
    assert john.integral_ratio(f) == pytest.approx(math.sqrt(Z / phi0), rel=1e-6)


# normalization

def test_normalize_already_normalized():
    f = lc.indicator(geo.cube(2))
    T, g = john.john_position_normalize(f)
    assert np.allclose(T.matrix, np.eye(2), atol=1e-7) and np.allclose(T.offset, 0, atol=1e-7)


def test_normalize_recovers_unit_ball():
    rng = np.random.default_rng(9)
    f = lc.push_forward(random_piecewise_linear(rng), geo.random_affine(rng, 2))
    T, g = john.john_position_normalize(f)
    res = john.find_t0(g)
    assert np.linalg.norm(res.ellipsoid.center) <= 1e-6
    assert np.abs(res.ellipsoid.shape - np.eye(2)).max() <= 1e-6
    assert res.t0 == pytest.approx(john.find_t0(f).t0, abs=1e-4)


def test_normalize_truncated_cube_is_a_scaling():
    t0 = 0.5
    f = lc.truncated_gauge(geo.cube(2), t0)
    T, _ = john.john_position_normalize(f)
    # K_{t0} = (plateau - log t0) * cube = n * cube, incircle radius n
    assert np.allclose(T.matrix, np.eye(2) / 2, atol=1e-6)


# growth

def test_growth_truncated_equality():
    _, g = john.john_position_normalize(lc.truncated_gauge(triangle(), 0.3))
    rep = john.corollary_growth_check(g)
    assert rep.max_deviation <= 1e-5 and rep.passed


def test_growth_indicator_and_random():
    rep = john.corollary_growth_check(lc.indicator(geo.cube(2)))
    assert rep.passed and np.allclose(rep.ratio, 1)
    rng = np.random.default_rng(12)
    for _ in range(3):
        _, g = john.john_position_normalize(random_piecewise_linear(rng))
        assert john.corollary_growth_check(g, samples=20).max_violation <= 1e-5


# extremal comparison

def test_maximizer_five_halves():
    # int_0^inf (1 + s/2)^2 e^-s ds = 1 + 1 + 1/2
    assert john.truncated_level_integral(2, 1.0) == pytest.approx(2.5, rel=1e-12)
    assert john.maximizer_irat(2, 1.0, True) == pytest.approx(
        math.sqrt(4 / math.pi) * math.sqrt(2.5), rel=1e-9)


def test_truncated_level_integral_by_parts():
    # int_a^inf (1 + s/n)^n e^-s ds = sum_k n!/(n-k)! n^-k (1 + a/n)^(n-k) e^-a
    n, a = 3, -1.2
    exact = sum(math.factorial(n) / math.factorial(n - k) * n ** -k * (1 + a / n) ** (n - k)
                for k in range(n + 1)) * math.exp(-a)
    assert john.truncated_level_integral(n, math.exp(a)) == pytest.approx(exact, rel=1e-10)


def test_maximizer_decreasing():
    ts = np.linspace(math.exp(-2), 1, 20)
    vals = [john.maximizer_irat(2, t) for t in ts]
    assert np.all(np.diff(vals) < 0)
    with pytest.raises(ValueError):
        john.maximizer_irat(2, 0.1)


def test_maximality_examples():
    rep = john.maximality_check(lc.truncated_gauge(geo.regular_simplex(2), 0.3))
    assert abs(rep.slack) <= 1e-3
    rep = john.maximality_check(lc.indicator(geo.random_polygon(np.random.default_rng(1))))
    assert rep.t0 == 1.0 and rep.slack >= 0
    rep = john.maximality_check(lc.gauge_power(geo.cube(2)))
    assert rep.symmetric and rep.slack >= 0


# inradius derivative

def test_inradius_interval_indicator():
    lo, hi = john.inradius_derivative_interval(lc.indicator(geo.cube(2)), 1.0)
    assert lo == -math.inf and hi == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("make", [
    lambda: lc.truncated_gauge(triangle(), 0.5),
    lambda: lc.gauge_power(geo.cube(2), 1.0),
    lambda: lc.gauge_power(geo.cube(2), 2.0),
])
def test_inradius_interval_dilating_families(make):
    """Dilate families in John position have t r'(t) = -1/n at t0."""
    f = make()
    t0 = john.find_t0(f).t0
    _, g = john.john_position_normalize(f)
    lo, hi = john.inradius_derivative_interval(g, t0)
    assert lo <= -0.5 + 1e-4 and hi >= -0.5 - 1e-4
    assert hi - lo <= 1e-3


def test_certify_truncated():
    rep, g = john.certify(lc.truncated_gauge(triangle(), 0.5))
    assert rep.passed and rep.weight_sum == pytest.approx(2, abs=1e-6)
    assert rep.extra["center_norm"] <= 1e-6
