"""John ellipsoid of a log-concave function.

For a level t in (0, 1] let E_t be the John ellipsoid of K_t(f) and
phi(t) = t ||f||_inf |E_t|. In the variable s = -log t, log phi is concave, so
the optimal level t0 is found by a one-dimensional search on s in [0, n].
The John ellipsoidal function is ``t0 ||f||_inf * chi_{E_t0}``.
"""
from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import logconcave as lc
from .errors import AllLevelsDegenerate, LevelEmpty
from .geometry import Ellipsoid, cube, regular_simplex, unit_ball_volume
from .mvie import CertificateReport, MvieSolution, john_certificate, mvie

INV_PHI = (math.sqrt(5) - 1) / 2
FD_STEP = 1e-4


@dataclass(frozen=True, eq=False)
class JohnResult:
    t0: float
    ellipsoid: Ellipsoid
    phi_at_t0: float
    integral_ratio: float
    search_trace: list = field(repr=False)
    solution: MvieSolution = field(repr=False, default=None)

    @property
    def s0(self):
        return max(-math.log(self.t0), 0.0)  # avoids -0.0 at t0 = 1


def solve_level(K):
    """John ellipsoid of a level set, cached on the polytope object."""
    if K.degenerate:
        return None
    cache = K.__dict__
    if "_john" not in cache:
        cache["_john"] = mvie(K)
    return cache["_john"]


def _log_phi_s(f, s):
    sol = solve_level(lc.level_at(f, s))
    if sol is None:
        return -math.inf, None
    return -s + math.log(f.height) + sol.objective + math.log(unit_ball_volume(f.dim)), sol


def phi(f, t):
    """t ||f||_inf |E_t(f)|; zero on degenerate levels."""
    if not 0 < t <= 1:
        raise ValueError("t must lie in (0, 1]")
    val, _ = _log_phi_s(f, -math.log(t))
    return math.exp(val) if val > -math.inf else 0.0


_CACHE: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def find_t0(f, tol_s=1e-5):
    """Maximize log phi(e^-s) over s in [0, n]. Results are cached per function object."""
    key = float(tol_s)
    per_f = _CACHE.setdefault(f, {})
    if key in per_f:
        return per_f[key]
    n = f.dim
    trace = []
    memo = {}

    def g(s):
        s = float(s)
        if s not in memo:
            memo[s] = _log_phi_s(f, s)
            trace.append((s, memo[s][0]))
        return memo[s][0]

    if g(0.0) >= g(tol_s) and g(0.0) > -math.inf:
        best = 0.0
    else:
        a, b = 0.0, float(n)
        x1 = b - INV_PHI * (b - a)
        x2 = a + INV_PHI * (b - a)
        while b - a > tol_s:
            if g(x1) < g(x2):
                a, x1 = x1, x2
                x2 = a + INV_PHI * (b - a)
            else:
                b, x2 = x2, x1
                x1 = b - INV_PHI * (b - a)
        best = max([a, b, 0.5 * (a + b), float(n)], key=g)
        if g(best) == -math.inf:
            raise AllLevelsDegenerate("every sampled level set has empty interior")
        best = _newton_polish(g, best, n, tol_s)

    val, sol = memo[best]
    total = lc.integral(f)
    t0 = math.exp(-best)
    res = JohnResult(t0, sol.ellipsoid, math.exp(val), (total / math.exp(val)) ** (1.0 / n),
                     sorted(trace), sol)
    per_f[key] = res
    return res


def _newton_polish(g, s, n, tol_s):
    """One Newton step on central differences; kept only if it stays local and improves."""
    h = FD_STEP
    if s - h <= 0 or s + h >= n:
        return s
    g0, gp, gm = g(s), g(s + h), g(s - h)
    if not all(math.isfinite(v) for v in (g0, gp, gm)):
        return s
    d1 = (gp - gm) / (2 * h)
    d2 = (gp - 2 * g0 + gm) / h ** 2
    if d2 >= 0:
        return s
    cand = s - d1 / d2
    if abs(cand - s) > 2 * tol_s or not 0 < cand < n:
        return s
    return cand if g(cand) >= g0 else s


def integral_ratio(f, tol_s=1e-5):
    """(int f / int E(f))^(1/n); at least 1."""
    return find_t0(f, tol_s).integral_ratio


def john_position_normalize(f):
    """Affine map T sending E(f) to the unit ball, and f o T^-1."""
    res = find_t0(f)
    T = res.ellipsoid.normalizing_map()
    return T, lc.push_forward(f, T)


def phi_curve(f, samples=50, s_max=None):
    """Rows (s, t, log_phi, volume) on an even grid in s."""
    n = f.dim
    s_max = float(n) if s_max is None else s_max
    rows = []
    for s in np.linspace(0.0, s_max, samples):
        val, sol = _log_phi_s(f, float(s))
        vol = sol.ellipsoid.volume if sol is not None else 0.0
        rows.append((float(s), math.exp(-s), val, vol))
    return rows


@dataclass(frozen=True)
class GrowthReport:
    t: np.ndarray
    ratio: np.ndarray  # |E_t| / |E_t0|
    bound: np.ndarray  # (1 - log(t/t0)/n)^n
    max_violation: float  # in John-position volume units
    max_deviation: float

    @property
    def passed(self):
        return self.max_violation <= 1e-5


def corollary_growth_check(f, samples=50):
    """Compare |E_t| with (1 - log(t/t0)/n)^n |E_t0| on log-spaced levels.

    Volumes are reported in John-position units, where |E_t0| = |B_2^n|.
    """
    res = find_t0(f)
    n = f.dim
    ts = np.geomspace(1e-4, 1.0, samples)
    ratio = np.array([phi(f, t) / (t * f.height) for t in ts]) / res.ellipsoid.volume
    bound = (1 - np.log(ts / res.t0) / n) ** n
    unit = unit_ball_volume(n)
    diff = unit * (ratio - bound)
    return GrowthReport(ts, ratio, bound, float(diff.max()), float(np.abs(diff).max()))


_VRAT: dict = {}


def canonical_vrat(n, symmetric):
    """Volume ratio of the cube (symmetric) or the regular simplex."""
    key = (n, bool(symmetric))
    if key not in _VRAT:
        K = cube(n) if symmetric else regular_simplex(n)
        sol = mvie(K)
        _VRAT[key] = (K.volume / sol.ellipsoid.volume) ** (1.0 / n)
    return _VRAT[key]


def truncated_level_integral(n, t0):
    """int_{log t0}^inf (1 + s/n)^n e^-s ds."""
    val, _ = integrate.quad(lambda s: (1 + s / n) ** n * math.exp(-s), math.log(t0), np.inf,
                            epsabs=1e-13, epsrel=1e-12)
    return val


def maximizer_irat(n, t0, symmetric=False):
    """Integral ratio of the extremal truncated gauge over the simplex (or cube if symmetric)."""
    if not math.exp(-n) * (1 - 1e-9) <= t0 <= 1 + 1e-12:
        raise ValueError(f"t0 must lie in [e^-{n}, 1]")
    return canonical_vrat(n, symmetric) * truncated_level_integral(n, t0) ** (1.0 / n)


@dataclass(frozen=True)
class MaximalityReport:
    irat: float
    bound: float
    t0: float
    symmetric: bool

    @property
    def slack(self):
        return self.bound - self.irat


def maximality_check(f):
    res = find_t0(f)
    sym = lc.is_even(f)
    return MaximalityReport(res.integral_ratio, maximizer_irat(f.dim, res.t0, sym), res.t0, sym)


def centered_inradius(K):
    """Radius of the largest origin-centered ball in K (0 if the origin is outside)."""
    if K.degenerate:
        raise LevelEmpty("level set has empty interior")
    return max(float(K.b.min()), 0.0)


def inradius_derivative_interval(f, t0, h=FD_STEP):
    """t0 times the one-sided t-derivatives of the centered inradius of K_t at t0.

    ``f`` should be in John position. Returns (lo, hi) with lo from the right
    derivative and hi from the left one; at t0 = 1 only the left side exists and
    lo is -inf. One-sided quotients at h and h/2 are combined by Richardson
    extrapolation; when they disagree by more than 10% the interval is widened
    to cover both.
    """
    r0 = centered_inradius(lc.level_set(f, t0))

    def quotient(side, step):
        t = t0 * (1 + side * step)
        r = centered_inradius(lc.level_set(f, t))
        return t0 * (r - r0) / (t - t0)

    out = []
    for side in (+1, -1):
        if side > 0 and t0 * (1 + h) > 1:
            out.append(-math.inf)
            continue
        q1, q2 = quotient(side, h), quotient(side, h / 2)
        rich = 2 * q2 - q1
        if abs(q1 - q2) > 0.1 * max(abs(q2), 1e-12):
            out.append((min(q1, q2, rich), max(q1, q2, rich)))
        else:
            out.append((rich, rich))
    right, left = out
    lo = right if right == -math.inf else right[0]
    hi = left[1]
    return lo, hi


def certify(f, tol=1e-5):
    """Decomposition-of-identity certificate at the optimal level, in John position.

    Returns ``(report, normalized_function)``.
    """
    res = find_t0(f)
    _, fn = john_position_normalize(f)
    K = lc.level_set(fn, res.t0)
    sol = solve_level(K)
    sym = lc.is_even(f)
    cert = john_certificate(K, sol, tol=tol, symmetric=sym)
    interval = inradius_derivative_interval(fn, res.t0)
    report = CertificateReport(cert.contact_points, cert.weights, cert.identity_residual,
                               cert.barycenter_residual, cert.weight_sum, cert.passed,
                               cert.symmetric, interval,
                               {"center_norm": float(np.linalg.norm(sol.ellipsoid.center)),
                                "shape_error": float(np.abs(sol.ellipsoid.shape - np.eye(f.dim)).max())})
    return report, fn
