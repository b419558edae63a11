import math

import numpy as np
import pytest

from ellirat import asplund
from ellirat import geometry as geo
from ellirat import logconcave as lc
from ellirat.corpus import random_piecewise_linear, triangle
from ellirat.errors import KinkPoint


def sup_convolution_grid(f, eps, z, lo, hi, step):
    """max over a grid of x of f(x) * f((z - x) / eps)^eps."""
    axes = [np.arange(a, b + step / 2, step) for a, b in zip(lo, hi)]
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(z))
    vals = lc.evaluate(f, X) * lc.evaluate(f, (np.asarray(z) - X) / eps) ** eps
    return float(vals.max())


# closed form of the self-product

def test_gauge_alpha_one_integral_is_invariant():
    f = lc.gauge_power(triangle(), 1.0, height=1.0)
    for eps in (0.5, 0.1, 0.01):
        assert lc.integral(asplund.self_product(f, eps)) == pytest.approx(lc.integral(f), rel=1e-12)


def test_indicator_dilates():
    K = geo.cube(2)
    g = asplund.self_product(lc.indicator(K), 0.25)
    assert g.kind == "indicator"
    assert g.exponent.body.volume == pytest.approx(1.25 ** 2 * K.volume)


def test_small_eps_recovers_f():
    rng = np.random.default_rng(0)
    for f in (lc.gauge_power(triangle(), 2.0, height=1.4), random_piecewise_linear(rng),
              lc.truncated_gauge(geo.cube(2), 0.5, shift=[0.2, 0.0])):
        pts = rng.uniform(-1, 1, size=(20, 2))
        assert np.allclose(lc.evaluate(asplund.self_product(f, 1e-9), pts), lc.evaluate(f, pts),
                           rtol=1e-7)


@pytest.mark.parametrize("eps", [0.5, 0.2])
def test_closed_form_matches_grid_search_1d(eps):
    f = lc.gauge_power(geo.cube(1), 1.0, height=1.3, shift=[0.2])
    g = asplund.self_product(f, eps)
    for z in (-1.0, 0.1, 0.9, 2.5):
        brute = sup_convolution_grid(f, eps, [z], [-6], [6], 1e-4)
        assert brute == pytest.approx(lc.evaluate(g, [z]), rel=1e-3)
        assert brute <= lc.evaluate(g, [z]) * (1 + 1e-12)


@pytest.mark.parametrize("make", [
    lambda: lc.truncated_gauge(triangle(), 0.5),
    lambda: lc.gauge_power(geo.cube(2), 2.0, shift=[0.1, -0.2]),
    lambda: random_piecewise_linear(np.random.default_rng(5)),
])
def test_closed_form_matches_grid_search_2d(make):
    f = make()
    eps = 0.5
    g = asplund.self_product(f, eps)
    rng = np.random.default_rng(1)
    for z in rng.uniform(-1.5, 1.5, size=(3, 2)):
        brute = sup_convolution_grid(f, eps, z, [-4, -4], [4, 4], 0.01)
        exact = lc.evaluate(g, z)
        assert brute <= exact * (1 + 1e-9)
        assert brute == pytest.approx(exact, rel=2e-2)


def test_self_product_requires_positive_eps():
    with pytest.raises(ValueError):
        asplund.self_product(lc.indicator(geo.cube(2)), 0.0)


# derivative of the self-product integral

def test_self_derivative_laplace():
    lad = asplund.self_product_derivative_check(lc.gauge_power(geo.cube(1), 1.0))
    assert lad.target == pytest.approx(0.0, abs=1e-12)
    assert abs(lad.extrapolated) <= 1e-9 and lad.converged


def test_self_derivative_indicator():
    K = triangle()
    lad = asplund.self_product_derivative_check(lc.indicator(K))
    assert lad.target == pytest.approx(2 * K.volume)
    expected = [((1 + e) ** 2 - 1) * K.volume / e for e in lad.eps_values]
    assert np.allclose(lad.quotients, expected, rtol=1e-10)
    assert lad.relative_error <= 1e-3 and lad.monotone


def test_self_derivative_indicator_with_height():
    K, h = geo.cube(2), 2.5
    lad = asplund.self_product_derivative_check(lc.indicator(K, h))
    assert lad.target == pytest.approx(2 * h * 4 + h * math.log(h) * 4)
    assert lad.relative_error <= 1e-3


@pytest.mark.parametrize("make", [
    lambda: lc.gauge_power(triangle(), 2.0, height=0.7),
    lambda: lc.truncated_gauge(geo.cube(2), 0.4),
    lambda: random_piecewise_linear(np.random.default_rng(3)),
])
def test_self_derivative_families(make):
    lad = asplund.self_product_derivative_check(make())
    assert lad.relative_error <= 1e-3 and lad.monotone


def test_ladder_validation():
    with pytest.raises(ValueError):
        asplund.self_product_derivative_check(lc.indicator(geo.cube(2)), (0.1, 0.2, 0.3))
    with pytest.raises(ValueError):
        asplund.self_product_derivative_check(lc.indicator(geo.cube(2)), (0.1, 0.01))


# pointwise derivative against a scaled ball

def test_ball_derivative_laplace():
    f = lc.gauge_power(geo.cube(1), 1.0)
    lad = asplund.ball_product_derivative(f, [1.0], 1.0)
    assert lad.target == pytest.approx(math.exp(-1))
    assert lad.relative_error <= 1e-3


def test_ball_derivative_flat_top():
    f = lc.truncated_gauge(geo.cube(2), 0.5, height=1.7)
    lad = asplund.ball_product_derivative(f, [0.2, 0.1], 1.0)
    assert lad.target == 0.0 and all(q == 0 for q in lad.quotients)
    lad = asplund.ball_product_derivative(f, [0.2, 0.1], math.e)
    assert lad.target == pytest.approx(1.7)
    assert lad.extrapolated == pytest.approx(1.7, rel=1e-3)


def test_ball_derivative_random_smooth_points():
    rng = np.random.default_rng(8)
    f = lc.gauge_power(triangle(), 2.0)
    for _ in range(5):
        z = rng.uniform(-0.5, 0.5, 2)
        a = rng.uniform(0.5, 2)
        lad = asplund.ball_product_derivative(f, z, a)
        assert abs(lad.extrapolated - lad.target) <= 1e-3 * max(abs(lad.target), lc.evaluate(f, z))


def test_ball_product_is_grid_sup():
    f = lc.gauge_power(triangle(), 1.0)
    z, eps = np.array([0.4, 0.3]), 0.05
    ang = np.linspace(0, 2 * np.pi, 20000, endpoint=False)
    r = np.linspace(0, 1, 50)
    Y = (r[:, None, None] * np.stack([np.cos(ang), np.sin(ang)], -1)[None]).reshape(-1, 2)
    brute = float(lc.evaluate(f, z - eps * Y).max())
    assert asplund.ball_product(f, z, 1.0, eps) == pytest.approx(brute, rel=1e-6)


def test_kink_points_raise():
    f = lc.gauge_power(geo.cube(2), 1.0)
    with pytest.raises(KinkPoint):
        asplund.ball_product_derivative(f, [0.5, 0.5], 1.0)
    with pytest.raises(KinkPoint):
        asplund.ball_product_derivative(f, [0.0, 0.0], 1.0)
    with pytest.raises(KinkPoint):
        asplund.gradient_norm(lc.indicator(geo.cube(2)), [1.0, 0.0])
    c = 2 + math.log(0.5)
    with pytest.raises(KinkPoint):
        asplund.ball_product_derivative(lc.truncated_gauge(geo.cube(2), 0.5), [c, 0.0], 1.0)
