"""Convex polytopes and ellipsoids in low dimension.

Polytopes come in two flavours: ``HPolytope`` (rows ``<a_i, x> <= b_i`` with
unit normals) and ``VPolytope`` (extreme points). Everything here is exact up
to floating point; nothing samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError

from .errors import (
    DegenerateBody,
    DimensionTooLarge,
    Infeasible,
    OriginNotInterior,
    Unbounded,
    ZeroDirection,
)

MAX_DIM = 6
VERTEX_TOL = 1e-9


def unit_ball_volume(n):
    """Volume of the Euclidean unit ball in R^n."""
    if n == 0:
        return 1.0
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def _dedupe_points(points, tol):
    keep = []
    for p in points:
        if not any(np.max(np.abs(p - q)) <= tol for q in keep):
            keep.append(p)
    return np.array(keep).reshape(-1, points.shape[1])


def _dedupe_rows(A, b, tol=1e-12):
    rows = np.hstack([A, b[:, None]])
    keep = []
    for r in rows:
        if not any(np.max(np.abs(r - q)) <= tol * (1 + abs(r[-1])) for q in keep):
            keep.append(r)
    keep = np.array(keep)
    return keep[:, :-1], keep[:, -1]


@dataclass(frozen=True, eq=False)
class AffineMap:
    """x -> matrix @ x + offset."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.atleast_2d(np.asarray(self.matrix, float)))
        object.__setattr__(self, "offset", np.asarray(self.offset, float).reshape(-1))

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n), np.zeros(n))

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def det(self):
        return float(np.linalg.det(self.matrix))

    def __call__(self, x):
        return np.asarray(x, float) @ self.matrix.T + self.offset

    def inverse(self):
        inv = np.linalg.inv(self.matrix)
        return AffineMap(inv, -inv @ self.offset)

    def compose(self, other):
        """self after other."""
        return AffineMap(self.matrix @ other.matrix, self.matrix @ other.offset + self.offset)


@dataclass(frozen=True, eq=False)
class HPolytope:
    """Intersection of halfspaces ``A x <= b``; rows are normalized on construction.

    ``degenerate`` marks bodies known to have empty interior (volume 0).
    ``interior`` is an optional hint: a point strictly inside the body.
    """

    A: np.ndarray
    b: np.ndarray
    degenerate: bool = False
    interior: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, float))
        b = np.asarray(self.b, float).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise ValueError("A and b row counts differ")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("non-finite polytope data")
        norms = np.linalg.norm(A, axis=1)
        zero = norms == 0
        if np.any(zero & (b < 0)):
            raise Infeasible("row 0 <= b with b < 0")
        A, b, norms = A[~zero], b[~zero], norms[~zero]
        object.__setattr__(self, "A", A / norms[:, None])
        object.__setattr__(self, "b", b / norms)
        if self.interior is not None:
            object.__setattr__(self, "interior", np.asarray(self.interior, float))

    @classmethod
    def from_rows(cls, rows):
        """Parse the literal format ``[[a_1, ..., a_n, b], ...]``."""
        rows = np.asarray(rows, float)
        if rows.ndim != 2 or rows.shape[1] < 2:
            raise ValueError("polytope rows must be a list of [a_1, ..., a_n, b]")
        return cls(rows[:, :-1], rows[:, -1])

    def to_rows(self):
        return np.hstack([self.A, self.b[:, None]]).tolist()

    @classmethod
    def from_points(cls, points):
        """H-representation of the convex hull of ``points``."""
        points = np.asarray(points, float)
        n = points.shape[1]
        if n == 1:
            return cls(np.array([[1.0], [-1.0]]), np.array([points.max(), -points.min()]))
        hull = ConvexHull(points)
        A, b = _dedupe_rows(hull.equations[:, :n], -hull.equations[:, n], tol=1e-10)
        return cls(A, b, interior=points[hull.vertices].mean(axis=0))

    @property
    def dim(self):
        return self.A.shape[1]

    @property
    def n_rows(self):
        return self.A.shape[0]

    def slack(self, x):
        return self.b - np.asarray(x, float) @ self.A.T

    def contains(self, x, tol=1e-9):
        return bool(np.all(self.slack(x) >= -tol))

    def dilate(self, rho, shift=None):
        """``rho * K + shift``; rho = 0 yields a flagged single point."""
        shift = np.zeros(self.dim) if shift is None else np.asarray(shift, float)
        b = rho * self.b + self.A @ shift
        hint = None
        if rho > 0:
            hint = rho * self.chebyshev[0] + shift
        return HPolytope(self.A, b, degenerate=(rho <= 0 or self.degenerate), interior=hint)

    def image(self, amap):
        """Image of the body under an invertible affine map."""
        inv_t = np.linalg.inv(amap.matrix).T
        A = self.A @ inv_t.T
        b = self.b + A @ amap.offset
        hint = None if self.interior is None else amap(self.interior)
        return HPolytope(A, b, degenerate=self.degenerate, interior=hint)

    def intersect(self, other):
        return HPolytope(np.vstack([self.A, other.A]), np.concatenate([self.b, other.b]),
                         degenerate=self.degenerate or other.degenerate)

    def is_symmetric(self, tol=1e-9):
        """Origin symmetry: every row (a, b) has a partner (-a, b)."""
        for a, b in zip(self.A, self.b):
            d = np.abs(self.A + a).max(axis=1) + np.abs(self.b - b)
            if d.min() > tol:
                return False
        return True

    @cached_property
    def chebyshev(self):
        return chebyshev_inradius(self)

    @cached_property
    def vertices(self):
        return enumerate_vertices(self)

    @cached_property
    def volume(self):
        if self.degenerate:
            return 0.0
        return volume(self.vertices)

    def facets(self):
        return facets(self)

    @cached_property
    def perimeter(self):
        """Surface area (n-1 dimensional measure of the boundary)."""
        if self.degenerate:
            return 0.0
        return float(np.sum(facets(self)[1]))


@dataclass(frozen=True, eq=False)
class VPolytope:
    vertices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.atleast_2d(np.asarray(self.vertices, float)))

    @property
    def dim(self):
        return self.vertices.shape[1]

    @classmethod
    def hull_of(cls, points):
        """Keep only the extreme points of ``points``."""
        points = np.atleast_2d(np.asarray(points, float))
        n = points.shape[1]
        if n == 1:
            return cls(np.array([[points.min()], [points.max()]]))
        if _affine_rank(points) < n:
            return cls(_dedupe_points(points, VERTEX_TOL))
        return cls(points[ConvexHull(points).vertices])


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """``center + shape @ B_2^n`` with ``shape`` symmetric positive definite."""

    center: np.ndarray
    shape: np.ndarray

    def __post_init__(self):
        T = np.atleast_2d(np.asarray(self.shape, float))
        T = 0.5 * (T + T.T)
        object.__setattr__(self, "shape", T)
        object.__setattr__(self, "center", np.asarray(self.center, float).reshape(-1))
        if np.linalg.eigvalsh(T).min() <= 0:
            raise ValueError("ellipsoid shape must be positive definite")

    @classmethod
    def ball(cls, n, radius=1.0, center=None):
        return cls(np.zeros(n) if center is None else center, radius * np.eye(n))

    @property
    def dim(self):
        return self.center.shape[0]

    @property
    def log_det(self):
        return float(np.linalg.slogdet(self.shape)[1])

    @property
    def volume(self):
        return float(np.exp(self.log_det) * unit_ball_volume(self.dim))

    def contains(self, x, tol=1e-9):
        y = np.linalg.solve(self.shape, np.asarray(x, float) - self.center)
        return bool(np.linalg.norm(y) <= 1 + tol)

    def image(self, amap):
        M = amap.matrix @ self.shape
        w, V = np.linalg.eigh(M @ M.T)
        return Ellipsoid(amap(self.center), (V * np.sqrt(w)) @ V.T)

    def normalizing_map(self):
        """Affine map sending this ellipsoid onto the unit ball."""
        inv = np.linalg.inv(self.shape)
        return AffineMap(inv, -inv @ self.center)


def _affine_rank(points, tol=1e-10):
    if len(points) < 2:
        return 0
    centered = points - points.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


def gauge_norm(K, x):
    """Minkowski functional of K at x (vectorized over leading axes of x)."""
    if np.any(K.b <= 0):
        raise OriginNotInterior("gauge needs the origin strictly inside K")
    x = np.asarray(x, float)
    vals = (x @ K.A.T) / K.b
    return np.maximum(vals.max(axis=-1), 0.0)


def is_bounded(K):
    """True iff the normals positively span R^n, i.e. no recession direction."""
    n = K.dim
    if K.n_rows <= n:
        return False
    if n == 1:
        return bool(K.A.max() > 0 and K.A.min() < 0)
    try:
        hull = ConvexHull(K.A)
    except QhullError:
        return False
    return bool(np.all(hull.equations[:, -1] < -1e-12))


def chebyshev_inradius(K, centered=False):
    """Largest ball inside K: returns (center, radius).

    With ``centered=True`` the ball is centered at the origin (the inner radius
    used for level sets in John position).
    """
    n = K.dim
    if centered:
        r = float(K.b.min())
        return np.zeros(n), max(r, 0.0)
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_ub = np.hstack([K.A, np.ones((K.n_rows, 1))])
    bounds = [(None, None)] * n + [(0, None)]
    res = linprog(c, A_ub=A_ub, b_ub=K.b, bounds=bounds, method="highs")
    if res.status == 2:
        raise Infeasible("polytope is empty")
    if res.status == 3:
        raise Unbounded("polytope contains arbitrarily large balls")
    if res.status != 0:
        raise Infeasible(f"linear program failed: {res.message}")
    center, r = res.x[:n], float(res.x[n])
    if r > 0:
        center = _central_optimum(K, center, r)
    return center, r


def _central_optimum(K, center, r):
    """Among all centers of radius-r balls in K, the analytic center of that set.

    Optimal centers may form a segment (thin boxes). One LP finds rows that can
    be loose; Newton then centers within the face cut out by the others.
    """
    m, n = K.n_rows, K.dim
    bb = K.b - r
    cost = np.concatenate([np.zeros(n), -np.ones(m)])
    A_ub = np.hstack([K.A, np.eye(m)])
    res = linprog(cost, A_ub=A_ub, b_ub=bb, bounds=[(None, None)] * n + [(0, 1)] * m,
                  method="highs")
    if res.status != 0:
        return center
    loose = res.x[n:] > 1e-9
    if not loose.any():
        return center
    x0 = res.x[:n]
    N = null_space(K.A[~loose]) if (~loose).any() else np.eye(n)
    if N.shape[1] == 0:
        return center
    A, b = K.A[loose] @ N, bb[loose] - K.A[loose] @ x0
    z = np.zeros(N.shape[1])
    for _ in range(60):
        s = b - A @ z
        if np.any(s <= 0):
            return center
        g = A.T @ (1 / s)
        H = (A / s[:, None] ** 2).T @ A
        try:
            dz = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            break
        lam2 = float(-g @ dz)
        if lam2 < 1e-20:
            break
        step = 1.0 if lam2 < 0.0625 else 1 / (1 + np.sqrt(lam2))
        z = z + step * dz
    x = x0 + N @ z
    return x if np.all(K.A @ x <= bb + 1e-12 * (1 + np.abs(K.b))) else center


def enumerate_vertices(K):
    """Vertex set of a bounded, full-dimensional H-polytope."""
    n = K.dim
    if n > MAX_DIM:
        raise DimensionTooLarge(f"dimension {n} exceeds {MAX_DIM}")
    if K.degenerate:
        raise DegenerateBody("vertex enumeration skipped for a degenerate body")
    if not is_bounded(K):
        raise Unbounded("polytope has a recession direction")
    scale = 1.0 + float(np.abs(K.b).max())
    if n == 1:
        hi = K.b[K.A[:, 0] > 0] / K.A[K.A[:, 0] > 0, 0]
        lo = K.b[K.A[:, 0] < 0] / K.A[K.A[:, 0] < 0, 0]
        if hi.min() - lo.max() <= VERTEX_TOL * scale:
            raise DegenerateBody("empty or single-point interval")
        return VPolytope(np.array([[lo.max()], [hi.min()]]))
    x0 = K.interior
    if x0 is None or K.slack(x0).min() <= 1e-12 * scale:
        x0, r = K.chebyshev
        if r <= 1e-12 * scale:
            raise DegenerateBody("polytope has empty interior")
    try:
        hs = HalfspaceIntersection(np.hstack([K.A, -K.b[:, None]]), x0)
    except QhullError as exc:
        raise DegenerateBody(f"qhull failed: {exc}") from exc
    pts = _dedupe_points(hs.intersections, VERTEX_TOL * scale)
    return VPolytope(pts)


def volume(P):
    """Exact volume of a V-polytope by fan triangulation from the vertex centroid."""
    V = P.vertices
    n = P.dim
    if n > MAX_DIM:
        raise DimensionTooLarge(f"dimension {n} exceeds {MAX_DIM}")
    if n == 1:
        return float(V.max() - V.min())
    if len(V) <= n or _affine_rank(V) < n:
        return 0.0
    hull = ConvexHull(V)
    c = V.mean(axis=0)
    simplices = V[hull.simplices] - c
    return float(np.abs(np.linalg.det(simplices)).sum() / math.factorial(n))


def hyperplane_basis(direction):
    """Orthonormal basis (columns) of the hyperplane orthogonal to ``direction``."""
    d = np.asarray(direction, float)
    nrm = np.linalg.norm(d)
    if nrm == 0:
        raise ZeroDirection("projection direction is zero")
    return null_space((d / nrm)[None, :])


def project_polytope(P, direction):
    """Orthogonal projection onto direction-perp, in an orthonormal basis of it."""
    B = hyperplane_basis(direction)
    return VPolytope.hull_of(P.vertices @ B)


def ellipsoid_in_polytope(E, K, tol=1e-9):
    reach = np.linalg.norm(K.A @ E.shape, axis=1) + K.A @ E.center
    return bool(np.all(reach <= K.b + tol))


def facets(K):
    """Unit outer normals and (n-1)-volumes of the facets of K.

    Rows that only touch K in a lower-dimensional face get area 0. In
    dimension 1 each endpoint counts with measure 1.
    """
    n = K.dim
    V = K.vertices.vertices
    scale = 1.0 + float(np.abs(K.b).max())
    on = np.abs(V @ K.A.T - K.b) <= 1e-8 * scale
    areas = np.zeros(K.n_rows)
    for i in range(K.n_rows):
        pts = V[on[:, i]]
        if n == 1:
            areas[i] = 1.0 if len(pts) else 0.0
        elif len(pts) >= n:
            areas[i] = volume(VPolytope(pts @ hyperplane_basis(K.A[i])))
    # duplicate rows describe the same facet once
    for i, j in combinations(range(K.n_rows), 2):
        if areas[i] > 0 and areas[j] > 0 and np.abs(K.A[i] - K.A[j]).max() < 1e-12 \
                and abs(K.b[i] - K.b[j]) < 1e-12 * scale:
            areas[j] = 0.0
    return K.A.copy(), areas


def cauchy_projection_volume(normals, areas, theta):
    """|P_{theta-perp} K| from facet data (Cauchy's projection formula).

    ``theta`` may be a single unit vector or an array of them.
    """
    theta = np.asarray(theta, float)
    return 0.5 * np.abs(theta @ normals.T) @ areas


# canonical bodies

def cube(n, half_width=1.0):
    A = np.vstack([np.eye(n), -np.eye(n)])
    return HPolytope(A, np.full(2 * n, half_width), interior=np.zeros(n))


def box(half_widths):
    h = np.asarray(half_widths, float)
    n = len(h)
    return HPolytope(np.vstack([np.eye(n), -np.eye(n)]), np.concatenate([h, h]),
                     interior=np.zeros(n))


def standard_simplex(n):
    """{x >= 0, sum x <= 1}."""
    A = np.vstack([-np.eye(n), np.ones((1, n))])
    b = np.concatenate([np.zeros(n), [1.0]])
    return HPolytope(A, b, interior=np.full(n, 1.0 / (n + 1)))


def regular_simplex(n, inradius=1.0):
    """Regular simplex centered at the origin with the given inradius."""
    E = np.eye(n + 1) - 1.0 / (n + 1)
    B = null_space(np.ones((1, n + 1)))
    U = E @ B
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    return HPolytope(U, np.full(n + 1, inradius), interior=np.zeros(n))


def regular_polygon(k, inradius=1.0, phase=0.0):
    """Regular k-gon circumscribed about the disk of the given radius."""
    ang = phase + 2 * np.pi * np.arange(k) / k
    A = np.column_stack([np.cos(ang), np.sin(ang)])
    return HPolytope(A, np.full(k, inradius), interior=np.zeros(2))


def random_polygon(rng, m=8, radius_range=(0.5, 2.0)):
    """Random bounded polygon containing the origin, from ``m`` halfplanes."""
    while True:
        ang = np.sort(rng.uniform(0, 2 * np.pi, m))
        gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
        if gaps.max() < 0.9 * np.pi:
            break
    A = np.column_stack([np.cos(ang), np.sin(ang)])
    return HPolytope(A, rng.uniform(*radius_range, m), interior=np.zeros(2))


def random_rotation(rng, n):
    Q, R = np.linalg.qr(rng.normal(size=(n, n)))
    return Q * np.sign(np.diag(R))


def random_affine(rng, n, log_spread=0.7, offset_scale=1.0):
    """Random well-conditioned affine map."""
    U = random_rotation(rng, n)
    W = random_rotation(rng, n)
    s = np.exp(rng.uniform(-log_spread, log_spread, n))
    return AffineMap(U @ np.diag(s) @ W, rng.normal(scale=offset_scale, size=n))
