"""Log-concave functions ``f = height * exp(-v)`` with polyhedral level sets.

Four exponent families are supported:

* ``Indicator(K)``: v = 0 on K, +inf outside.
* ``GaugePower(K, alpha, shift)``: v(x) = |x - shift|_K ** alpha.
* ``TruncatedGauge(K, t0, shift)``: v(x) = max(|x - shift|_K - (n + log t0), 0).
* ``PiecewiseLinear(slopes, offsets, domain)``: v(x) = max_i <a_i, x> + b_i on the
  domain, +inf outside, shifted so that min v = 0.

The level sets ``K_s = {v <= s}`` are H-polytopes. Integrals of f are written
in layer-cake form over s = -log t, where t is the level relative to the sup norm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate
from scipy.optimize import linprog

from .errors import KinkPoint, SpecParseError, TailNotConverged, Unbounded
from .geometry import AffineMap, HPolytope, enumerate_vertices, gauge_norm, is_bounded

KINK_TOL = 1e-8
PANEL_WIDTH = 0.5
GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


# exponent families

class _Dilating:
    """Families whose level sets are dilates ``rho(s) K + shift`` of one body."""

    body: HPolytope
    shift: np.ndarray

    @property
    def dim(self):
        return self.body.dim

    def rho(self, s):
        raise NotImplementedError

    def level(self, s):
        rho = self.rho(s)
        if rho == 1 and not np.any(self.shift):
            return self.body
        return self.body.dilate(rho, self.shift)

    def _gauge_piece(self, z):
        z = np.asarray(z, float) - self.shift
        vals = (self.body.A @ z) / self.body.b
        order = np.argsort(vals)[::-1]
        i = order[0]
        gap = vals[i] - vals[order[1]] if len(order) > 1 else np.inf
        return max(vals[i], 0.0), self.body.A[i] / self.body.b[i], gap

    def _check_body(self):
        if np.any(self.body.b <= 0):
            raise ValueError("the body must contain the origin in its interior")
        if not is_bounded(self.body):
            raise Unbounded("level sets are unbounded")


def _as_shift(shift, n):
    return np.zeros(n) if shift is None else np.asarray(shift, float).reshape(n)


@dataclass(frozen=True, eq=False)
class Indicator(_Dilating):
    body: HPolytope
    shift: np.ndarray = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "shift", _as_shift(self.shift, self.body.dim))
        if not is_bounded(self.body):
            raise Unbounded("body is unbounded")

    kind = "indicator"
    max_level = 0.0

    def rho(self, s):
        return 1.0

    def level(self, s):
        return self.body

    def value(self, x):
        x = np.atleast_2d(np.asarray(x, float))
        inside = np.all(x @ self.body.A.T <= self.body.b + 1e-12, axis=1)
        return np.where(inside, 0.0, np.inf)

    def pushforward(self, amap):
        return Indicator(self.body.image(amap))

    def self_product(self, eps):
        return Indicator(self.body.dilate(1 + eps))

    def is_even(self):
        return self.body.is_symmetric()

    def local_piece(self, z):
        slack = self.body.slack(z)
        if slack.min() < KINK_TOL:
            raise KinkPoint("point on or outside the boundary of the support")
        return 0.0, np.zeros(self.dim), 0.0


@dataclass(frozen=True, eq=False)
class GaugePower(_Dilating):
    body: HPolytope
    alpha: float = 1.0
    shift: np.ndarray = field(default=None)

    kind = "gauge_power"
    max_level = math.inf

    def __post_init__(self):
        if not self.alpha >= 1:
            raise ValueError("alpha must be >= 1")
        object.__setattr__(self, "shift", _as_shift(self.shift, self.body.dim))
        self._check_body()

    def rho(self, s):
        return s ** (1.0 / self.alpha)

    def value(self, x):
        return gauge_norm(self.body, np.atleast_2d(x) - self.shift) ** self.alpha

    def pushforward(self, amap):
        lin = AffineMap(amap.matrix, np.zeros(amap.dim))
        return GaugePower(self.body.image(lin), self.alpha, amap(self.shift))

    def self_product(self, eps):
        # (1+eps) v(z/(1+eps)) = (1+eps)^(1-alpha) |z - (1+eps) shift|^alpha
        c = (1 + eps) ** ((self.alpha - 1) / self.alpha)
        return GaugePower(self.body.dilate(c), self.alpha, (1 + eps) * self.shift)

    def is_even(self):
        return not np.any(self.shift) and self.body.is_symmetric()

    def local_piece(self, z):
        """(g, grad v, slope) where v = g^alpha near z and |grad g| = slope."""
        g, w, gap = self._gauge_piece(z)
        if gap < KINK_TOL or g < KINK_TOL:
            raise KinkPoint("gauge is not differentiable here")
        return g, self.alpha * g ** (self.alpha - 1) * w, float(np.linalg.norm(w))

    def ball_min(self, z, eps):
        g, _, slope = self.local_piece(z)
        return max(g - eps * slope, 0.0) ** self.alpha


@dataclass(frozen=True, eq=False)
class TruncatedGauge(_Dilating):
    """Extremal family: constant on the plateau (n + log t0) K, then linear in the gauge.

    ``t0`` may exceed 1 (plateau wider than n K); self-products produce such values.
    """

    body: HPolytope
    t0: float = 1.0
    shift: np.ndarray = field(default=None)

    kind = "truncated_gauge"
    max_level = math.inf

    def __post_init__(self):
        if not self.t0 >= math.exp(-self.body.dim) * (1 - 1e-12):
            raise ValueError("t0 must be at least e^-n")
        object.__setattr__(self, "shift", _as_shift(self.shift, self.body.dim))
        self._check_body()

    @property
    def plateau(self):
        return max(self.dim + math.log(self.t0), 0.0)

    def rho(self, s):
        return self.plateau + s

    def value(self, x):
        g = gauge_norm(self.body, np.atleast_2d(x) - self.shift)
        return np.maximum(g - self.plateau, 0.0)

    def pushforward(self, amap):
        lin = AffineMap(amap.matrix, np.zeros(amap.dim))
        return TruncatedGauge(self.body.image(lin), self.t0, amap(self.shift))

    def self_product(self, eps):
        plateau = (1 + eps) * self.plateau
        return TruncatedGauge(self.body, math.exp(plateau - self.dim), (1 + eps) * self.shift)

    def is_even(self):
        return not np.any(self.shift) and self.body.is_symmetric()

    def local_piece(self, z):
        g, w, gap = self._gauge_piece(z)
        if abs(g - self.plateau) < KINK_TOL:
            raise KinkPoint("point on the plateau boundary")
        if g < self.plateau:
            return g, np.zeros(self.dim), 0.0
        if gap < KINK_TOL:
            raise KinkPoint("gauge is not differentiable here")
        return g, w, float(np.linalg.norm(w))

    def ball_min(self, z, eps):
        g, _, slope = self.local_piece(z)
        if slope == 0:
            return 0.0
        return max(g - eps * slope - self.plateau, 0.0)


@dataclass(frozen=True, eq=False)
class PiecewiseLinear:
    """v = max_i <slopes_i, x> + offsets_i on ``domain``; renormalized so min v = 0."""

    slopes: np.ndarray
    offsets: np.ndarray
    domain: HPolytope
    normalize: bool = field(default=True, repr=False)

    kind = "piecewise_linear"

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.slopes, float))
        b = np.asarray(self.offsets, float).reshape(-1)
        if a.shape[0] != b.shape[0] or a.shape[1] != self.domain.dim:
            raise ValueError("pieces do not match the domain dimension")
        if not is_bounded(self.domain):
            raise Unbounded("domain must be bounded")
        object.__setattr__(self, "slopes", a)
        if self.normalize:
            vmin, _ = self._minimize(a, b)
            b = b - vmin
        object.__setattr__(self, "offsets", b)

    def _minimize(self, a, b):
        n = self.domain.dim
        c = np.zeros(n + 1)
        c[-1] = 1.0
        A_ub = np.vstack([np.hstack([a, -np.ones((len(b), 1))]),
                          np.hstack([self.domain.A, np.zeros((self.domain.n_rows, 1))])])
        b_ub = np.concatenate([-b, self.domain.b])
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * (n + 1), method="highs")
        if res.status != 0:
            raise ValueError(f"cannot minimize the exponent: {res.message}")
        return float(res.x[-1]), res.x[:n]

    @property
    def dim(self):
        return self.domain.dim

    @cached_property
    def minimizer(self):
        return self._minimize(self.slopes, self.offsets)[1]

    @cached_property
    def max_level(self):
        V = self.domain.vertices.vertices
        return float(self.value(V).max())

    @cached_property
    def _domain_center(self):
        c, _ = self.domain.chebyshev
        return c, float(self.value(c)[0])

    def value(self, x):
        x = np.atleast_2d(np.asarray(x, float))
        v = (x @ self.slopes.T + self.offsets).max(axis=1)
        inside = np.all(x @ self.domain.A.T <= self.domain.b + 1e-12, axis=1)
        return np.where(inside, v, np.inf)

    def level(self, s):
        body = HPolytope(np.vstack([self.slopes, self.domain.A]),
                         np.concatenate([s - self.offsets, self.domain.b]))
        if s <= 0:
            scale = 1 + float(np.abs(body.b).max())
            try:
                _, r = body.chebyshev
            except Exception:
                r = 0.0
            if r <= 1e-10 * scale:
                return HPolytope(body.A, body.b, degenerate=True)
            return body
        xc, vc = self._domain_center
        lam = 1.0 if vc <= 0 else min(1.0, 0.5 * s / vc)
        hint = (1 - lam) * self.minimizer + lam * xc
        return HPolytope(body.A, body.b, interior=hint)

    @cached_property
    def breakpoints(self):
        """Values of s where the combinatorial type of K_s changes.

        These are the heights of the vertices of the epigraph of v, capped above
        the largest value of v on the domain.
        """
        n = self.dim
        cap = self.max_level + 1.0
        A = np.vstack([np.hstack([self.slopes, -np.ones((len(self.offsets), 1))]),
                       np.hstack([self.domain.A, np.zeros((self.domain.n_rows, 1))]),
                       np.eye(n + 1)[-1:]])
        b = np.concatenate([-self.offsets, self.domain.b, [cap]])
        epi = HPolytope(A, b)
        z = enumerate_vertices(epi).vertices[:, -1]
        z = np.sort(z[z < cap - 0.5])
        pts = np.concatenate([[0.0], np.clip(z, 0, self.max_level), [self.max_level]])
        return np.unique(np.round(pts, 12))

    def pushforward(self, amap):
        inv = np.linalg.inv(amap.matrix)
        slopes = self.slopes @ inv
        offsets = self.offsets - slopes @ amap.offset
        return PiecewiseLinear(slopes, offsets, self.domain.image(amap))

    def self_product(self, eps):
        return PiecewiseLinear(self.slopes, (1 + eps) * self.offsets,
                               self.domain.dilate(1 + eps), normalize=False)

    def is_even(self):
        if not self.domain.is_symmetric():
            return False
        rows = np.hstack([self.slopes, self.offsets[:, None]])
        mirrored = np.hstack([-self.slopes, self.offsets[:, None]])
        return all(np.abs(rows - r).max(axis=1).min() < 1e-9 for r in mirrored)

    def local_piece(self, z):
        z = np.asarray(z, float)
        if self.domain.slack(z).min() < KINK_TOL:
            raise KinkPoint("point on the boundary of the domain")
        vals = self.slopes @ z + self.offsets
        order = np.argsort(vals)[::-1]
        if len(order) > 1 and vals[order[0]] - vals[order[1]] < KINK_TOL:
            raise KinkPoint("two pieces are active")
        a = self.slopes[order[0]]
        return vals[order[0]], a, float(np.linalg.norm(a))

    def ball_min(self, z, eps):
        v, _, slope = self.local_piece(z)
        return v - eps * slope


Indicator.local_piece.__doc__ = "Indicator is flat inside its support."


def _indicator_ball_min(self, z, eps):
    self.local_piece(z)
    return 0.0


Indicator.ball_min = _indicator_ball_min


@dataclass(frozen=True, eq=False)
class LogConcaveFn:
    height: float
    exponent: object

    def __post_init__(self):
        if not (self.height > 0 and math.isfinite(self.height)):
            raise ValueError("height must be a positive finite number")

    @property
    def dim(self):
        return self.exponent.dim

    @property
    def kind(self):
        return self.exponent.kind

    def __call__(self, x):
        return evaluate(self, x)


# constructors

def indicator(body, height=1.0):
    return LogConcaveFn(height, Indicator(body))


def gauge_power(body, alpha=1.0, height=1.0, shift=None):
    return LogConcaveFn(height, GaugePower(body, alpha, shift))


def truncated_gauge(body, t0, height=1.0, shift=None):
    return LogConcaveFn(height, TruncatedGauge(body, t0, shift))


def piecewise_linear(slopes, offsets, domain, height=1.0):
    return LogConcaveFn(height, PiecewiseLinear(slopes, offsets, domain))


# basic operations

def evaluate(f, x):
    """f(x); zero outside the support. Accepts one point or an array of points."""
    x = np.asarray(x, float)
    v = f.exponent.value(np.atleast_2d(x))
    out = f.height * np.exp(-v)
    return float(out[0]) if x.ndim == 1 else out


def level_set(f, t):
    """K_t(f) = {x : f(x) >= t ||f||_inf} as an H-polytope."""
    if not 0 < t <= 1:
        raise ValueError("level t must lie in (0, 1]")
    return f.exponent.level(-math.log(t))


def level_at(f, s):
    """Level set in the log variable: {v <= s}."""
    return f.exponent.level(s)


def push_forward(f, amap):
    """The function f o T^{-1}, whose level sets are T K_t(f)."""
    return LogConcaveFn(f.height, f.exponent.pushforward(amap))


def is_even(f):
    return f.exponent.is_even()


# layer-cake quadrature

@dataclass(frozen=True)
class Weight:
    """A weight w(s) on [0, inf) with its closed-form tail integral."""

    name: str
    p: float = 1.0

    def __call__(self, s):
        s = np.asarray(s, float)
        if self.name == "exp":
            return np.exp(-s)
        if self.name == "power":
            return self.p * np.exp(-self.p * s)
        if self.name == "entropy":
            return (s - 1) * np.exp(-s)
        raise ValueError(self.name)

    def tail(self, S):
        if self.name == "exp":
            return math.exp(-S)
        if self.name == "power":
            return math.exp(-self.p * S)
        return S * math.exp(-S)


EXP = Weight("exp")
ENTROPY = Weight("entropy")


def power_weight(p):
    return Weight("power", float(p))


def _pl_rule(exponent):
    """Gauss-Legendre nodes on panels between the breakpoints of a PiecewiseLinear exponent."""
    cache = exponent.__dict__.setdefault("_rule_cache", {})
    if "rule" not in cache:
        bp = exponent.breakpoints
        nodes, weights = [], []
        for lo, hi in zip(bp[:-1], bp[1:]):
            k = max(1, int(math.ceil((hi - lo) / PANEL_WIDTH)))
            edges = np.linspace(lo, hi, k + 1)
            for a, b in zip(edges[:-1], edges[1:]):
                nodes.append(0.5 * (b - a) * GL_NODES + 0.5 * (a + b))
                weights.append(0.5 * (b - a) * GL_WEIGHTS)
        s = np.concatenate(nodes) if nodes else np.zeros(0)
        w = np.concatenate(weights) if weights else np.zeros(0)
        cache["rule"] = (s, w)
        cache["levels"] = [None] * len(s)
    return cache


def _pl_levels(exponent):
    cache = _pl_rule(exponent)
    levels = cache["levels"]
    for i, s in enumerate(cache["rule"][0]):
        if levels[i] is None:
            levels[i] = exponent.level(float(s))
    return cache["rule"][0], cache["rule"][1], levels


def layer_integral(f, measure, degree, weight=EXP):
    """Compute ``int_0^inf measure(K_s) w(s) ds`` (height not included).

    ``measure`` maps an HPolytope to a number or an array, and must be
    translation invariant and homogeneous of the given degree under dilation.
    Returns ``(value, error_estimate)``.
    """
    ex = f.exponent
    if isinstance(ex, PiecewiseLinear):
        s, w, levels = _pl_levels(ex)
        vals = [np.asarray(measure(K), float) * wi * float(weight(si))
                for K, wi, si in zip(levels, w, s)]
        total = sum(vals) if vals else 0.0
        total = total + np.asarray(measure(ex.domain), float) * weight.tail(ex.max_level)
        # error proxy: the same rule applied to a smooth degree-matched integrand
        probe = float(np.sum(w * s ** degree * weight(s)))
        exact, _ = integrate.quad(lambda x: x ** degree * float(weight(x)), 0, ex.max_level,
                                  limit=200)
        err = abs(probe - exact) * float(np.max(np.abs(total))) / max(abs(exact), 1e-300)
        return total, err
    base = np.asarray(measure(ex.body), float)
    moment, err = weight_moment(ex, degree, weight)
    return base * moment, float(np.max(np.abs(base))) * err


def weight_moment(ex, degree, weight):
    """``int_0^inf rho(s)^degree w(s) ds`` for a dilating family."""
    if isinstance(ex, Indicator) or degree == 0:
        tail = weight.tail(0.0)
        return tail, 0.0
    val, err = integrate.quad(lambda s: ex.rho(s) ** degree * float(weight(s)), 0, np.inf,
                              epsabs=1e-14, epsrel=1e-12, limit=200)
    if err > 1e-8 * max(abs(val), 1e-12):
        raise TailNotConverged(f"layer integral error estimate {err:.3g} too large")
    return val, err


def _volume(K):
    return K.volume


def integral(f):
    """int f, using closed forms where the family has one."""
    ex, h, n = f.exponent, f.height, f.dim
    if isinstance(ex, Indicator):
        return h * ex.body.volume
    if isinstance(ex, GaugePower):
        return h * ex.body.volume * math.gamma(1 + n / ex.alpha)
    if isinstance(ex, TruncatedGauge):
        c = ex.plateau
        poly = sum(math.comb(n, k) * c ** (n - k) * math.factorial(k) for k in range(n + 1))
        return h * ex.body.volume * poly
    return h * float(layer_integral(f, _volume, n, EXP)[0])


def p_norm_integral(f, p):
    """int f^p for p >= 1."""
    if p < 1:
        raise ValueError("p must be >= 1")
    ex, h, n = f.exponent, f.height, f.dim
    if isinstance(ex, Indicator):
        return h ** p * ex.body.volume
    if isinstance(ex, GaugePower):
        return h ** p * ex.body.volume * math.gamma(1 + n / ex.alpha) * p ** (-n / ex.alpha)
    return h ** p * float(layer_integral(f, _volume, n, power_weight(p))[0])


def entropy_integral(f):
    """int f log(f / ||f||_inf), which is always <= 0."""
    ex, h, n = f.exponent, f.height, f.dim
    if isinstance(ex, Indicator):
        return 0.0
    if isinstance(ex, GaugePower):
        a = ex.alpha
        return -h * ex.body.volume * (n / a) * math.gamma(1 + n / a)
    return -h * float(layer_integral(f, _volume, n, ENTROPY)[0])


def layer_cake_integral(f, weight=EXP):
    """Generic quadrature path for int f (no closed forms); used as a cross-check."""
    ex = f.exponent
    n = f.dim
    if isinstance(ex, PiecewiseLinear) or isinstance(ex, Indicator):
        return f.height * float(layer_integral(f, _volume, n, weight)[0])
    val, _ = integrate.quad(lambda s: level_at(f, s).volume * float(weight(s)), 0, np.inf,
                            limit=200)
    return f.height * val


# spec documents

KINDS = ("indicator", "gauge_power", "truncated_gauge", "piecewise_linear")


def _rows(doc, key):
    if key not in doc:
        raise SpecParseError(key, "missing")
    try:
        return HPolytope.from_rows(doc[key])
    except Exception as exc:
        raise SpecParseError(key, f"bad polytope rows ({exc})") from exc


def _number(doc, key, default=None):
    if key not in doc:
        if default is None:
            raise SpecParseError(key, "missing")
        return default
    val = doc[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise SpecParseError(key, f"expected a finite number, got {val!r}")
    return float(val)


def function_from_spec(doc):
    """Build a LogConcaveFn from a spec document (a dict)."""
    if not isinstance(doc, dict):
        raise SpecParseError("<root>", "spec must be a JSON object")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise SpecParseError("kind", f"expected one of {KINDS}, got {kind!r}")
    height = _number(doc, "height", 1.0)
    if height <= 0:
        raise SpecParseError("height", "must be positive")
    shift = doc.get("shift")
    try:
        if kind == "indicator":
            ex = Indicator(_rows(doc, "body"))
        elif kind == "gauge_power":
            ex = GaugePower(_rows(doc, "body"), _number(doc, "alpha", 1.0), shift)
        elif kind == "truncated_gauge":
            ex = TruncatedGauge(_rows(doc, "body"), _number(doc, "t0"), shift)
        else:
            if "pieces" not in doc:
                raise SpecParseError("pieces", "missing")
            try:
                pieces = np.asarray(doc["pieces"], float)
                assert pieces.ndim == 2
            except Exception as exc:
                raise SpecParseError("pieces", "expected a list of [a_1, ..., a_n, b]") from exc
            ex = PiecewiseLinear(pieces[:, :-1], pieces[:, -1], _rows(doc, "domain"))
    except SpecParseError:
        raise
    except Exception as exc:
        field_name = {"indicator": "body", "gauge_power": "alpha",
                      "truncated_gauge": "t0", "piecewise_linear": "pieces"}[kind]
        if isinstance(exc, Unbounded) or "body" in str(exc) or "origin" in str(exc):
            field_name = "domain" if kind == "piecewise_linear" else "body"
        raise SpecParseError(field_name, str(exc)) from exc
    return LogConcaveFn(height, ex)


def function_to_spec(f):
    ex = f.exponent
    doc = {"height": f.height, "kind": ex.kind}
    if isinstance(ex, PiecewiseLinear):
        doc["pieces"] = np.hstack([ex.slopes, ex.offsets[:, None]]).tolist()
        doc["domain"] = ex.domain.to_rows()
        return doc
    doc["body"] = ex.body.to_rows()
    if isinstance(ex, GaugePower):
        doc["alpha"] = ex.alpha
    if isinstance(ex, TruncatedGauge):
        doc["t0"] = ex.t0
    if np.any(ex.shift):
        doc["shift"] = ex.shift.tolist()
    return doc
