"""Maximum-volume inscribed ellipsoid of an H-polytope, and John certificates.

The solver maximizes ``log det T`` subject to ``|T a_i| + <a_i, c> <= b_i`` with
a path-following barrier method. Each row contributes the second-order-cone
barrier ``-log((b_i - <a_i, c>)^2 - |T a_i|^2)``, which is self-concordant, so
damped Newton steps stay feasible without function-value line searches.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import nnls

from .errors import EmptyInterior, NoConvergence, NotSymmetric, TooFewContacts
from .geometry import AffineMap, Ellipsoid, HPolytope, ellipsoid_in_polytope

CONTACT_TOL = 1e-6


@lru_cache(maxsize=None)
def _sym_basis(n):
    """Frobenius-orthonormal basis of symmetric n x n matrices."""
    basis = []
    for i in range(n):
        for j in range(i, n):
            E = np.zeros((n, n))
            if i == j:
                E[i, i] = 1.0
            else:
                E[i, j] = E[j, i] = 1 / np.sqrt(2)
            basis.append(E)
    return np.array(basis)


@dataclass(frozen=True, eq=False)
class MvieSolution:
    ellipsoid: Ellipsoid
    contact_points: np.ndarray  # unit vectors in the frame T^{-1}(K - c)
    active_rows: np.ndarray
    objective: float  # log det T
    iterations: int
    gap: float  # duality-gap bound on the objective at exit
    symmetric: bool = False


@dataclass(frozen=True, eq=False)
class CertificateReport:
    contact_points: np.ndarray
    weights: np.ndarray
    identity_residual: float
    barycenter_residual: float
    weight_sum: float
    passed: bool
    symmetric: bool = False
    inradius_derivative_interval: tuple | None = None
    extra: dict = field(default_factory=dict)


class _Barrier:
    """Barrier objective in the normalized frame where the Chebyshev ball is B_2^n."""

    def __init__(self, A, beta, symmetric):
        self.A = A
        self.beta = beta
        self.m, self.n = A.shape
        self.symmetric = symmetric
        self.E = _sym_basis(self.n)
        self.N = len(self.E)
        self.M = np.einsum("kpq,iq->ipk", self.E, A)  # M[i] @ delta = S a_i
        self.MtM = np.einsum("ipk,ipl->ikl", self.M, self.M)
        self.nc = 0 if symmetric else self.n

    def split(self, z):
        if self.symmetric:
            return np.zeros(self.n), z
        return z[: self.n], z[self.n:]

    def shape(self, delta):
        return np.einsum("k,kpq->pq", delta, self.E)

    def pack(self, d, S):
        delta = np.einsum("kpq,pq->k", self.E, S)
        return delta if self.symmetric else np.concatenate([d, delta])

    def feasible(self, z):
        d, delta = self.split(z)
        S = self.shape(delta)
        try:
            np.linalg.cholesky(S)
        except np.linalg.LinAlgError:
            return False
        u = self.beta - self.A @ d
        rad = np.linalg.norm(self.A @ S, axis=1)
        return bool(np.all(u - rad > 0))

    def derivatives(self, z, t):
        d, delta = self.split(z)
        S = self.shape(delta)
        Sinv = np.linalg.inv(S)
        u = self.beta - self.A @ d
        g = self.A @ S
        rad = np.linalg.norm(g, axis=1)
        q = (u - rad) * (u + rad)
        w = 1.0 / q
        Jd = -2 * u[:, None] * self.A
        Jt = -2 * np.einsum("ipk,ip->ik", self.M, g)
        J = Jt if self.symmetric else np.hstack([Jd, Jt])
        Jw = J * w[:, None]
        grad = -Jw.sum(axis=0)
        hess = Jw.T @ Jw
        nc = self.nc
        hess[nc:, nc:] += 2 * np.tensordot(w, self.MtM, axes=1)
        if nc:
            hess[:nc, :nc] -= 2 * (self.A * w[:, None]).T @ self.A
        X = np.einsum("pq,kqr->kpr", Sinv, self.E)
        grad[nc:] += -t * np.einsum("kpp->k", X)
        hess[nc:, nc:] += t * np.einsum("kpq,lqp->kl", X, X)
        return grad, hess


def _check_symmetric(K):
    if not K.is_symmetric(1e-9):
        raise NotSymmetric("symmetric=True but the rows of K do not pair up")


def _frame_barrier(K, center, M, symmetric):
    """Barrier for K expressed in coordinates y with x = center + M y."""
    A = K.A @ M
    norms = np.linalg.norm(A, axis=1)
    return _Barrier(A / norms[:, None], (K.b - K.A @ center) / norms, symmetric)


def mvie(K: HPolytope, symmetric=False, tol=1e-10, start: Ellipsoid | None = None,
         max_iter=2000):
    """John ellipsoid (maximum-volume inscribed ellipsoid) of K.

    ``tol`` bounds the duality gap of ``log det T`` at exit. ``start`` is an
    optional warm start (any ellipsoid strictly inside K).

    After each barrier stage the coordinates are re-centered so the current
    iterate is the unit ball. The barrier changes only by a constant under
    affine maps, so the central path is unchanged while the Newton systems
    stay well conditioned even for needle-like bodies.
    """
    n = K.dim
    if symmetric:
        _check_symmetric(K)
        c0 = np.zeros(n)
        r = float(K.b.min())
    else:
        c0, r = K.chebyshev
    scale = 1.0 + float(np.abs(K.b).max())
    if K.degenerate or r <= 1e-12 * scale:
        raise EmptyInterior("polytope has empty interior")
    center, M = c0, r * np.eye(n)
    bar = _frame_barrier(K, center, M, symmetric)
    z = bar.pack(np.zeros(n), 0.5 * np.eye(n))
    if start is not None and ellipsoid_in_polytope(start, K, -1e-9 * scale):
        sc = start.center if not symmetric else np.zeros(n)
        cand = _frame_barrier(K, sc, 0.95 * start.shape, symmetric)
        zc = cand.pack(np.zeros(n), np.eye(n))
        if cand.feasible(zc):
            center, M, bar, z = sc, 0.95 * start.shape, cand, zc

    nu = 2.0 * bar.m
    t = 1.0
    iters = 0
    lam2 = np.inf
    while True:
        stage = stalled = 0
        best_lam2 = np.inf
        while True:
            grad, hess = bar.derivatives(z, t)
            try:
                dz = -np.linalg.solve(hess, grad)
            except np.linalg.LinAlgError:
                dz = -np.linalg.lstsq(hess, grad, rcond=None)[0]
            lam2 = float(-grad @ dz)
            stalled = stalled + 1 if lam2 > 0.5 * best_lam2 else 0
            best_lam2 = min(best_lam2, lam2)
            if lam2 <= 1e-10 or (lam2 <= 1e-6 and (stalled >= 3 or stage >= 40)):
                # the second test catches the rounding floor at very large t
                break
            stage += 1
            lam = np.sqrt(max(lam2, 0.0))
            step = 1.0 if lam < 0.25 else 1.0 / (1.0 + lam)
            while step > 1e-12 and not bar.feasible(z + step * dz):
                step *= 0.5
            iters += 1
            if step <= 1e-12 or np.all(z + step * dz == z):
                # rounding floor: no representable progress left
                break
            z = z + step * dz
            if iters >= max_iter:
                best = _solution(K, bar, z, center, M, iters, nu / t, symmetric)
                raise NoConvergence(f"mvie stopped after {iters} Newton steps", best)
        if nu / t <= tol:
            break
        t *= 10.0
        d, delta = bar.split(z)
        center, M = center + M @ d, M @ bar.shape(delta)
        bar = _frame_barrier(K, center, M, symmetric)
        z = bar.pack(np.zeros(n), np.eye(n))
    return _solution(K, bar, z, center, M, iters, nu / t + lam2, symmetric)


def _solution(K, bar, z, center, M, iters, gap, symmetric):
    d, delta = bar.split(z)
    E = Ellipsoid(d, bar.shape(delta)).image(AffineMap(M, center))
    reach = np.linalg.norm(K.A @ E.shape, axis=1)
    slack = K.b - K.A @ E.center - reach
    active = np.flatnonzero(slack <= CONTACT_TOL * (1 + np.abs(K.b)))
    U = K.A[active] @ E.shape
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    return MvieSolution(E, U, active, E.log_det, iters, float(gap), symmetric)


def _vech_weighted(u):
    """Upper triangle of u u^T with off-diagonals scaled so the 2-norm is Frobenius."""
    n = len(u)
    iu = np.triu_indices(n)
    w = np.where(iu[0] == iu[1], 1.0, np.sqrt(2.0))
    return np.outer(u, u)[iu] * w


def decomposition_of_identity(U, symmetric, tol=1e-5):
    """Nonnegative weights w with sum w u u^T = I (and sum w u = 0 unless symmetric).

    Returns a CertificateReport; antipodal contacts are merged in the
    symmetric case since u u^T does not see the sign.
    """
    U = np.atleast_2d(np.asarray(U, float))
    n = U.shape[1]
    if symmetric:
        kept = []
        for u in U:
            if not any(np.linalg.norm(u + v) < 1e-6 or np.linalg.norm(u - v) < 1e-6 for v in kept):
                kept.append(u)
        U = np.array(kept).reshape(-1, n)
    if len(U) < n or np.linalg.matrix_rank(U, tol=1e-8) < n:
        raise TooFewContacts(f"{len(U)} contact points do not span R^{n}")
    cols = [_vech_weighted(u) for u in U]
    target = np.eye(n)[np.triu_indices(n)]
    if not symmetric:
        cols = [np.concatenate([c, u]) for c, u in zip(cols, U)]
        target = np.concatenate([target, np.zeros(n)])
    D = np.array(cols).T
    w, _ = nnls(D, target)
    ident = float(np.linalg.norm(np.einsum("j,jp,jq->pq", w, U, U) - np.eye(n)))
    bary = 0.0 if symmetric else float(np.linalg.norm(w @ U))
    passed = ident <= tol and (symmetric or bary <= tol)
    return CertificateReport(U, w, ident, bary, float(w.sum()), passed, symmetric)


def john_certificate(K: HPolytope, sol: MvieSolution, tol=1e-5, symmetric=None):
    """Check John's decomposition of the identity at the contact points of ``sol``."""
    sym = sol.symmetric if symmetric is None else symmetric
    return decomposition_of_identity(sol.contact_points, sym, tol)
