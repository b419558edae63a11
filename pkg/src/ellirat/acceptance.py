"""The twelve acceptance checks, runnable on the built-in corpus.

Each check returns a ``CriterionResult``; ``verify_all`` runs a selection of
them with optional tolerance overrides (used to confirm that a failing
tolerance is reported under the right name).
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import asplund
from . import corpus as C
from . import geometry as geo
from . import john as J
from . import logconcave as lc
from . import projection as P
from .errors import KinkPoint
from .mvie import mvie


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number:2d} [{status}] {self.name}: {self.detail} ({self.seconds:.1f}s)"


@dataclass
class Context:
    """Corpus and seed shared by the checks; functions cache their John results."""

    seed: int = 0
    named: list = field(default=None)
    random_pl: list = field(default=None)

    def __post_init__(self):
        if self.named is None:
            self.named = C.default_corpus(self.seed)
        if self.random_pl is None:
            self.random_pl = C.random_pl_corpus(25, self.seed)

    @property
    def everything(self):
        return self.named + self.random_pl

    def get(self, name):
        for e in self.everything:
            if e.name == name:
                return e.f
        raise KeyError(name)


def _vrat(K):
    return (K.volume / mvie(K).ellipsoid.volume) ** (1.0 / K.dim)


def c01_mvie_exactness(ctx, tol=1e-6):
    worst_c = worst_T = worst_t = 0.0
    cases = [(geo.cube(n), np.eye(n)) for n in (2, 3, 4)] + [(geo.box([1, 2]), np.diag([1.0, 2.0]))]
    for K, T in cases:
        t = time.perf_counter()
        sol = mvie(K)
        worst_t = max(worst_t, time.perf_counter() - t)
        worst_c = max(worst_c, float(np.linalg.norm(sol.ellipsoid.center)))
        worst_T = max(worst_T, float(np.abs(sol.ellipsoid.shape - T).max()))
    ok = worst_c <= 1e-7 and worst_T <= tol and worst_t < 1.0
    return ok, f"max |c|={worst_c:.1e}, max |T-T*|={worst_T:.1e}, slowest {worst_t:.2f}s"


def closed_form_irat(K, alpha):
    n = K.dim
    return (math.e * alpha * math.gamma(1 + n / alpha) ** (alpha / n) / n) ** (1 / alpha) * _vrat(K)


def c02_closed_form_irat(ctx, tol=1e-3):
    worst = worst_t = 0.0
    for K in (geo.cube(2), C.triangle()):
        for alpha in (1.0, 2.0):
            t = time.perf_counter()
            got = J.integral_ratio(lc.gauge_power(K, alpha))
            worst_t = max(worst_t, time.perf_counter() - t)
            worst = max(worst, abs(got / closed_form_irat(K, alpha) - 1))
    return worst <= tol and worst_t < 30, f"max rel err {worst:.1e}, slowest {worst_t:.2f}s"


def c03_optimal_level(ctx, tol=1e-4):
    err_gauge = err_trunc = 0.0
    indicator_ok = True
    low = math.inf
    for e in ctx.everything:
        f, n = e.f, e.dim
        t0 = J.find_t0(f).t0
        low = min(low, t0 - math.exp(-n))
        ex = f.exponent
        if isinstance(ex, lc.GaugePower):
            err_gauge = max(err_gauge, abs(t0 - math.exp(-n / ex.alpha)))
        elif isinstance(ex, lc.TruncatedGauge):
            err_trunc = max(err_trunc, abs(t0 - ex.t0))
        elif isinstance(ex, lc.Indicator):
            indicator_ok &= t0 == 1.0
    ok = err_gauge <= tol and err_trunc <= tol and indicator_ok and low >= -1e-9
    return ok, (f"gauge |dt|={err_gauge:.1e}, truncated |dt|={err_trunc:.1e}, "
                f"indicator exact={indicator_ok}, min t0-e^-n={low:.2e}")


PHI_FUNCTIONS = ("indicator_random_polygon", "gauge_triangle_a2", "truncated_square_0.5",
                 "pl_tent", "pl_flat_top", "pl_random_00")


def c04_phi_log_concavity(ctx, tol=1e-7, triples=200):
    rng = np.random.default_rng(ctx.seed)
    worst = -math.inf
    for name in PHI_FUNCTIONS:
        f = ctx.get(name)
        scale = J.find_t0(f).phi_at_t0
        s = rng.uniform(0, 1.5 * f.dim, size=(triples, 2))
        lam = rng.uniform(0, 1, triples)
        for (s0, s1), l in zip(s, lam):
            p0, p1 = J.phi(f, math.exp(-s0)), J.phi(f, math.exp(-s1))
            pm = J.phi(f, math.exp(-((1 - l) * s0 + l * s1)))
            worst = max(worst, (p0 ** (1 - l) * p1 ** l - pm) / scale)
    return worst <= tol, f"max violation {worst:.1e} x phi(t0) over {len(PHI_FUNCTIONS)} functions"


AFFINE_FUNCTIONS = ("indicator_random_polygon", "truncated_triangle_e-1", "pl_tent")


def c05_affine_invariance(ctx, tol=1e-3, maps=20):
    rng = np.random.default_rng(ctx.seed + 5)
    worst = 0.0
    for name in AFFINE_FUNCTIONS:
        f = ctx.get(name)
        base = J.integral_ratio(f)
        for _ in range(maps):
            g = lc.push_forward(f, geo.random_affine(rng, f.dim))
            worst = max(worst, abs(J.integral_ratio(g) - base) / base)
    return worst <= tol, f"max rel change {worst:.1e} over {maps} maps x {len(AFFINE_FUNCTIONS)}"


def c06_maximizer_bound(ctx, tol=1e-3):
    excess = -math.inf
    for e in ctx.random_pl:
        m = J.maximality_check(e.f)
        excess = max(excess, -m.slack)
    eq = max(abs(J.maximality_check(ctx.get(name)).slack)
             for name in ("truncated_simplex_0.3", "truncated_square_0.5"))
    grid = np.geomspace(math.exp(-2), 1.0, 20)
    mono = all(np.all(np.diff([J.maximizer_irat(2, t, sym) for t in grid]) < 0)
               for sym in (False, True))
    ok = excess <= tol and eq <= tol and mono
    return ok, f"max I.rat-bound {excess:+.2e}, equality gap {eq:.1e}, decreasing={mono}"


def c07_growth(ctx, tol=1e-5, samples=50):
    worst = -math.inf
    worst_eq = 0.0
    for e in ctx.everything:
        _, fn = J.john_position_normalize(e.f)
        rep = J.corollary_growth_check(fn, samples)
        worst = max(worst, rep.max_violation)
        if e.family == "truncated_gauge":
            worst_eq = max(worst_eq, rep.max_deviation)
    ok = worst <= tol and worst_eq <= tol
    return ok, f"max violation {worst:.1e}, truncated-gauge max deviation {worst_eq:.1e}"


def c08_reverse_petty(ctx, tol=1e-6):
    sandwich = True
    lows, highs = [], []
    disk_err = vrat_err = 0.0
    slowest = 0.0
    for e in C.planar(ctx.everything):
        t = time.perf_counter()
        rep = P.petty_report(e.f)
        slowest = max(slowest, time.perf_counter() - t)
        lows.append(rep.lhs - rep.rhs_lower)
        highs.append(rep.lhs - 1)
        sandwich &= rep.rhs_lower <= rep.lhs + rep.mc_error and rep.lhs <= 1 + rep.mc_error + 1e-12
        if e.name == "indicator_64gon":
            disk_err = abs(rep.lhs - 1)
        if e.family == "indicator":
            vrat_err = max(vrat_err, abs(rep.rhs_lower - 1 / _vrat(e.f.exponent.body)))
    ok = sandwich and disk_err <= 0.01 and vrat_err <= tol and slowest < 60
    return ok, (f"min lhs-rhs {min(lows):+.2e}, max lhs-1 {max(highs):+.2e}, "
                f"disk |lhs-1|={disk_err:.1e}, |rhs-1/v.rat|={vrat_err:.1e}, slowest {slowest:.2f}s")


def c09_entropy(ctx, tol=1e-3):
    worst = -math.inf
    for e in ctx.everything:
        H, bound = P.entropy_power_bound(e.f)
        worst = max(worst, H - bound)
    return worst <= tol, f"max H - bound {worst:+.2e}"


SELF_PRODUCT_FUNCTIONS = ("gauge_triangle_a2", "truncated_square_e-2", "pl_tent", "indicator_triangle")
BALL_PRODUCT_FUNCTIONS = ("gauge_polygon_a1_shifted", "truncated_triangle_e-1", "pl_tent", "pl_flat_top",
                          "gauge_triangle_a2")


def smooth_point(f, rng, margin=0.05, tries=1000):
    """Random z in the support at distance > margin from every kink."""
    ex = f.exponent
    if isinstance(ex, lc.PiecewiseLinear):
        V = ex.domain.vertices.vertices
    else:
        V = ex.level(3.0 * f.dim).vertices.vertices
    lo, hi = V.min(axis=0), V.max(axis=0)
    for _ in range(tries):
        z = rng.uniform(lo, hi)
        try:
            ex.local_piece(z)
            pieces = {_piece_id(ex, z + margin * d) for d in np.vstack([np.eye(f.dim), -np.eye(f.dim)])}
        except KinkPoint:
            continue
        if len(pieces) == 1 and None not in pieces:
            return z
    raise RuntimeError("no smooth point found")


def _piece_id(ex, z):
    try:
        v, grad, _ = ex.local_piece(z)
    except KinkPoint:
        return None
    if isinstance(ex, lc.GaugePower):
        grad = grad / np.linalg.norm(grad)
    return tuple(np.round(grad, 9))


def c10_asplund(ctx, tol=1e-3, points=10):
    worst_self = 0.0
    for name in SELF_PRODUCT_FUNCTIONS:
        worst_self = max(worst_self, asplund.self_product_derivative_check(ctx.get(name)).relative_error)
    rng = np.random.default_rng(ctx.seed + 10)
    worst_ball = 0.0
    for i in range(points):
        f = ctx.get(BALL_PRODUCT_FUNCTIONS[i % len(BALL_PRODUCT_FUNCTIONS)])
        z = smooth_point(f, rng)
        a = float(rng.uniform(0.5, 3.0))
        lad = asplund.ball_product_derivative(f, z, a)
        scale = max(abs(lad.target), lc.evaluate(f, z))
        worst_ball = max(worst_ball, abs(lad.extrapolated - lad.target) / scale)
    ok = worst_self <= tol and worst_ball <= tol
    return ok, f"self-product max rel err {worst_self:.1e}, ball limit max rel err {worst_ball:.1e}"


def c11_certificate(ctx, tol=1e-5):
    worst_id = worst_bary = worst_sum = 0.0
    for e in ctx.everything:
        rep, _ = J.certify(e.f, tol)
        worst_id = max(worst_id, rep.identity_residual)
        worst_bary = max(worst_bary, rep.barycenter_residual)
        worst_sum = max(worst_sum, abs(rep.weight_sum - e.dim))
    ok = worst_id <= tol and worst_bary <= tol and worst_sum <= 1e-6
    return ok, f"identity {worst_id:.1e}, barycenter {worst_bary:.1e}, |sum w - n| {worst_sum:.1e}"


def c12_sobolev(ctx, tol=0.0):
    worst = math.inf
    for e in ctx.everything:
        if not e.smooth or e.dim < 2:
            continue
        n = e.dim
        rhs = P.sobolev_constant(n) * lc.p_norm_integral(e.f, n / (n - 1)) ** ((n - 1) / n)
        worst = min(worst, P.grad_l1(e.f) / rhs - 1)
    return worst >= -tol, f"min grad_l1 / (n|B|^(1/n) ||f||_p) - 1 = {worst:+.3e}"


CRITERIA = {
    1: ("MVIE exactness", c01_mvie_exactness),
    2: ("closed-form integral ratio", c02_closed_form_irat),
    3: ("optimal level", c03_optimal_level),
    4: ("phi log-concavity", c04_phi_log_concavity),
    5: ("affine invariance", c05_affine_invariance),
    6: ("maximizer bound", c06_maximizer_bound),
    7: ("growth corollary", c07_growth),
    8: ("reverse Petty sandwich", c08_reverse_petty),
    9: ("entropy bound", c09_entropy),
    10: ("Asplund derivatives", c10_asplund),
    11: ("John certificate", c11_certificate),
    12: ("classical Sobolev", c12_sobolev),
}


def run_criterion(k, ctx=None, tol=None):
    ctx = ctx or Context()
    name, fn = CRITERIA[k]
    t = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", P.RegularityWarning)
        try:
            passed, detail = fn(ctx) if tol is None else fn(ctx, tol)
        except Exception as exc:  # a crash is a failure of the criterion, reported by name
            passed, detail = False, f"error: {type(exc).__name__}: {exc}"
    return CriterionResult(k, name, bool(passed), detail, time.perf_counter() - t)


def verify_all(seed=0, only=None, overrides=None, progress=None):
    ctx = Context(seed)
    overrides = overrides or {}
    out = []
    for k in sorted(CRITERIA):
        if only and k not in only:
            continue
        res = run_criterion(k, ctx, overrides.get(k))
        if progress:
            progress(res)
        out.append(res)
    return out
