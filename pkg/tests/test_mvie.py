import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from ellirat import geometry as geo
from ellirat.errors import EmptyInterior, NoConvergence, NotSymmetric, TooFewContacts
from ellirat.mvie import decomposition_of_identity, john_certificate, mvie


def feasible_weights_lp(U, symmetric):
    """Oracle: is there w >= 0 with sum w u u^T = I (and sum w u = 0)? via linprog."""
    n = U.shape[1]
    iu = np.triu_indices(n)
    rows = [np.array([np.outer(u, u)[iu] for u in U]).T]
    rhs = [np.eye(n)[iu]]
    if not symmetric:
        rows.append(U.T)
        rhs.append(np.zeros(n))
    res = linprog(np.zeros(len(U)), A_eq=np.vstack(rows), b_eq=np.concatenate(rhs),
                  bounds=[(0, None)] * len(U), method="highs")
    return res.status == 0


@pytest.mark.parametrize("n", [2, 3, 4])
def test_cube_gives_unit_ball(n):
    t = time.perf_counter()
    sol = mvie(geo.cube(n))
    assert time.perf_counter() - t < 1.0
    assert np.linalg.norm(sol.ellipsoid.center) <= 1e-7
    assert np.abs(sol.ellipsoid.shape - np.eye(n)).max() <= 1e-6


def test_box_is_separable():
    sol = mvie(geo.box([1, 2]))
    assert np.abs(sol.ellipsoid.shape - np.diag([1.0, 2.0])).max() <= 1e-6
    assert np.linalg.norm(sol.ellipsoid.center) <= 1e-7


def test_triangle_incircle(triangle):
    sol = mvie(triangle)
    assert np.linalg.norm(sol.ellipsoid.center) <= 1e-7
    assert np.abs(sol.ellipsoid.shape - np.eye(2)).max() <= 1e-6


def test_triangle_grid_search_finds_nothing_larger(triangle):
    """Coarse search over inscribed ellipses: none beats the incircle."""
    best = -np.inf
    for cx in np.linspace(-0.3, 0.3, 7):
        for cy in np.linspace(-0.3, 0.3, 7):
            for a in np.linspace(0.6, 1.4, 9):
                for b in np.linspace(0.6, 1.4, 9):
                    for th in np.linspace(0, np.pi, 6, endpoint=False):
                        R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
                        E = geo.Ellipsoid([cx, cy], R @ np.diag([a, b]) @ R.T)
                        if geo.ellipsoid_in_polytope(E, triangle, tol=0):
                            best = max(best, a * b)
    assert best <= 1.0 + 1e-12
    assert mvie(triangle).ellipsoid.volume == pytest.approx(math.pi, rel=1e-8)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_solution_invariants(seed):
    K = geo.random_polygon(np.random.default_rng(seed), m=8)
    sol = mvie(K)
    assert geo.ellipsoid_in_polytope(sol.ellipsoid, K, tol=1e-7)
    U = sol.contact_points
    assert np.allclose(np.linalg.norm(U, axis=1), 1)
    # contact points lie on the boundary of the normalized body
    frame = sol.ellipsoid.normalizing_map()
    Kn = K.image(frame)
    slack = np.min(Kn.b[:, None] - Kn.A @ U.T, axis=0)
    assert np.all(np.abs(slack) <= 1e-6)


def test_uniqueness_from_different_starts(rng):
    K = geo.random_polygon(rng, m=9)
    a = mvie(K)
    c, r = K.chebyshev
    b = mvie(K, start=geo.Ellipsoid(c, 0.3 * r * np.eye(2)))
    assert np.allclose(a.ellipsoid.center, b.ellipsoid.center, atol=1e-7)
    assert np.allclose(a.ellipsoid.shape, b.ellipsoid.shape, atol=1e-7)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6))
def test_affine_equivariance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 4))
    K = geo.cube(n) if n == 3 else geo.random_polygon(rng)
    T = geo.random_affine(rng, n)
    a, b = mvie(K), mvie(K.image(T))
    assert b.objective == pytest.approx(a.objective + math.log(abs(T.det)), abs=1e-8)
    mapped = a.ellipsoid.image(T)
    assert np.allclose(mapped.center, b.ellipsoid.center, atol=1e-6)
    assert np.allclose(mapped.shape, b.ellipsoid.shape, atol=1e-6)


def test_monotone_under_inclusion(rng):
    K = geo.random_polygon(rng, m=8)
    bigger = geo.HPolytope(K.A, K.b * rng.uniform(1.0, 1.5, K.n_rows))
    assert mvie(K).objective <= mvie(bigger).objective + 1e-9


def test_symmetric_mode():
    sol = mvie(geo.box([1, 3]), symmetric=True)
    assert np.allclose(sol.ellipsoid.shape, np.diag([1.0, 3.0]), atol=1e-7)
    with pytest.raises(NotSymmetric):
        mvie(geo.standard_simplex(2), symmetric=True)


def test_empty_interior():
    with pytest.raises(EmptyInterior):
        mvie(geo.cube(2).dilate(0.0))
    flat = geo.HPolytope(np.array([[1.0, 0], [-1.0, 0], [0, 1.0], [0, -1.0]]), [1, 1, 0, 0])
    with pytest.raises(EmptyInterior):
        mvie(flat)


def test_iteration_cap_reports_best():
    with pytest.raises(NoConvergence) as info:
        mvie(geo.random_polygon(np.random.default_rng(0)), max_iter=3)
    assert info.value.best is not None


# certificates

def test_cube_certificate_symmetric_and_not():
    sol = mvie(geo.cube(2))
    rep = john_certificate(geo.cube(2), sol, symmetric=True)
    assert rep.passed and np.allclose(rep.weights, [1, 1]) and rep.identity_residual < 1e-12
    rep = john_certificate(geo.cube(2), sol)
    assert rep.passed and np.allclose(rep.weights, 0.5) and rep.weight_sum == pytest.approx(2)


def test_triangle_certificate(triangle):
    rep = john_certificate(triangle, mvie(triangle))
    assert len(rep.contact_points) == 3
    assert np.allclose(rep.weights, 2 / 3, atol=1e-8)
    # contacts at 120 degree spacing
    U = rep.contact_points
    G = U @ U.T
    assert np.allclose(G[~np.eye(3, dtype=bool)], -0.5, atol=1e-7)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_random_polygon_certificate(seed):
    K = geo.random_polygon(np.random.default_rng(seed), m=8)
    sol = mvie(K)
    rep = john_certificate(K, sol)
    assert rep.passed and rep.identity_residual <= 1e-5 and rep.barycenter_residual <= 1e-5
    assert rep.weight_sum == pytest.approx(2, abs=1e-6)
    assert feasible_weights_lp(sol.contact_points, False)


@pytest.mark.parametrize("n", [3, 4])
def test_simplex_certificate(n):
    K = geo.regular_simplex(n)
    rep = john_certificate(K, mvie(K))
    assert rep.passed and rep.weight_sum == pytest.approx(n, abs=1e-6)
    assert np.allclose(rep.weights, n / (n + 1), atol=1e-6)


def test_too_few_contacts():
    with pytest.raises(TooFewContacts):
        decomposition_of_identity(np.array([[1.0, 0.0], [-1.0, 0.0]]), symmetric=False)


def test_bad_contacts_fail_certificate():
    U = np.array([[1.0, 0], [0, 1.0], [np.sqrt(0.5), np.sqrt(0.5)]])
    rep = decomposition_of_identity(U, symmetric=False)
    assert not rep.passed
    assert not feasible_weights_lp(U, False)
