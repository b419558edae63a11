"""Polar projection body of a log-concave function and the Petty-type reports.

The norm of the polar projection body is

    ||x|| = 2 |x| ||f||_inf int_0^1 |P_{x-perp} K_t| dt = int |<grad f, x>|,

computed here in layer-cake form over s = -log t. The first expression is the
projection route; the second, through the co-area formula, sums facet areas
weighted by |<normal, x>| over the level sets.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import logconcave as lc
from .errors import ZeroDirection
from .geometry import facets, project_polytope, unit_ball_volume, volume
from .john import find_t0


class RegularityWarning(UserWarning):
    """The function is not Sobolev-regular; a distributional value is returned."""


def _facets(K):
    cache = K.__dict__
    if "_facets" not in cache:
        cache["_facets"] = facets(K)
    return cache["_facets"]


def _threads():
    try:
        return max(1, int(os.environ.get("ELLIRAT_THREADS", "1")))
    except ValueError:
        return 1


def _check_direction(x):
    x = np.asarray(x, float)
    norm = float(np.linalg.norm(x))
    if norm == 0:
        raise ZeroDirection("direction must be nonzero")
    return x, norm


def _projection_measure(K, u):
    if K.degenerate:
        return 0.0
    if K.dim == 1:
        return 1.0
    return volume(project_polytope(K.vertices, u))


def pp_norm(f, x):
    """||x||_{Pi*(f)} through projections of the level sets."""
    x, norm = _check_direction(x)
    u = x / norm
    val, _ = lc.layer_integral(f, lambda K: _projection_measure(K, u), f.dim - 1)
    return 2 * norm * f.height * float(val)


def _gradient_measure(K, X):
    """sum over facets of |F| |<nu_F, x>| for each row x of X."""
    if K.degenerate:
        return np.zeros(len(X))
    normals, areas = _facets(K)
    return np.abs(X @ normals.T) @ areas


def pp_norm_gradient(f, x):
    """int |<grad f, x>| via the co-area formula (Indicator gets a warning)."""
    x, _ = _check_direction(x)
    if isinstance(f.exponent, lc.Indicator):
        warnings.warn("indicator functions are not W^{1,1}; returning the distributional value",
                      RegularityWarning, stacklevel=2)
    val, _ = lc.layer_integral(f, lambda K: _gradient_measure(K, x[None, :])[0], f.dim - 1)
    return f.height * float(val)


def pp_norms(f, thetas):
    """Norms for many unit directions at once (Cauchy projection formula)."""
    thetas = np.atleast_2d(np.asarray(thetas, float))
    if f.dim == 1:
        return 2 * f.height * np.abs(thetas[:, 0])
    threads = _threads()
    if threads == 1 or len(thetas) < 2 * threads:
        val, _ = lc.layer_integral(f, lambda K: _gradient_measure(K, thetas), f.dim - 1)
        return f.height * np.asarray(val)
    # warm the level caches once, then shard directions; each shard sums in fixed order
    lc.layer_integral(f, lambda K: _facets(K)[1].sum() if not K.degenerate else 0.0, f.dim - 1)
    shards = np.array_split(thetas, threads)
    with ThreadPoolExecutor(threads) as pool:
        parts = list(pool.map(
            lambda T: lc.layer_integral(f, lambda K: _gradient_measure(K, T), f.dim - 1)[0],
            shards))
    return f.height * np.concatenate([np.atleast_1d(p) for p in parts])


def sphere_points(n, count, seed=0):
    """Direction set for spherical averages.

    n = 2: uniform angular grid. n = 3: Fibonacci lattice rotated by ``seed``.
    n >= 4: seeded Gaussian directions.
    """
    rng = np.random.default_rng(seed)
    if n == 2:
        ang = 2 * np.pi * (np.arange(count) + 0.5) / count
        return np.column_stack([np.cos(ang), np.sin(ang)])
    if n == 3:
        k = np.arange(count) + 0.5
        z = 1 - 2 * k / count
        phi = np.pi * (1 + math.sqrt(5)) * k
        r = np.sqrt(1 - z ** 2)
        pts = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
        if seed:
            Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
            pts = pts @ Q.T
        return pts
    g = rng.normal(size=(count, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def pp_volume(f, n_dirs=4096, seed=0):
    """|Pi*(f)| = |B_2^n| * mean over the sphere of ||theta||^-n, with an error estimate.

    On the grid paths the error compares half-size direction sets; on the Monte
    Carlo path it is the standard error.
    """
    n = f.dim
    if n < 2:
        raise ValueError("the polar projection body needs n >= 2")
    thetas = sphere_points(n, n_dirs, seed)
    vals = pp_norms(f, thetas) ** (-n)
    vol = unit_ball_volume(n) * float(np.mean(vals))
    if n == 2:
        # two interleaved half grids; their disagreement bounds the full-grid error
        err = unit_ball_volume(n) * abs(float(np.mean(vals[::2]) - np.mean(vals[1::2])))
    elif n == 3:
        half = pp_norms(f, sphere_points(n, n_dirs // 2, seed)) ** (-n)
        err = abs(vol - unit_ball_volume(n) * float(np.mean(half)))
    else:
        err = unit_ball_volume(n) * float(np.std(vals)) / math.sqrt(n_dirs)
    return vol, err


def grad_l1(f):
    """int |grad f| via the co-area formula: ||f||_inf int Per(K_s) e^-s ds."""
    if isinstance(f.exponent, lc.Indicator):
        warnings.warn("indicator functions are not W^{1,1}; returning height * perimeter",
                      RegularityWarning, stacklevel=2)
        return f.height * f.exponent.body.perimeter
    val, _ = lc.layer_integral(f, lambda K: 0.0 if K.degenerate else float(_facets(K)[1].sum()),
                               f.dim - 1)
    return f.height * float(val)


def sobolev_constant(n):
    return n * unit_ball_volume(n) ** (1.0 / n)


def petty_constant(n):
    return unit_ball_volume(n) / (2 * unit_ball_volume(n - 1))


@dataclass(frozen=True)
class PettyReport:
    lhs: float
    rhs_lower: float
    entropy_power: float
    entropy_bound: float
    mc_error: float
    pp_volume: float
    p_norm: float
    integral_ratio: float

    @property
    def sandwich_ok(self):
        tol = max(self.mc_error, 1e-3)
        return self.rhs_lower - tol <= self.lhs <= 1 + tol

    @property
    def entropy_ok(self):
        return self.entropy_power <= self.entropy_bound + max(self.mc_error, 1e-3)


def entropy_power_bound(f):
    """H(f/int f) and the bound (I.rat(f) / ||f/int f||_{n/(n-1)})^2."""
    n = f.dim
    if n < 2:
        raise ValueError("the entropy bound needs n >= 2")
    p = n / (n - 1)
    Z = lc.integral(f)
    # int g log g for the density g = f / Z
    ent_density = lc.entropy_integral(f) / Z + math.log(f.height / Z)
    norm_p = lc.p_norm_integral(f, p) ** (1 / p) / Z
    return math.exp(-2.0 / n * ent_density), (find_t0(f).integral_ratio / norm_p) ** 2


def petty_report(f, n_dirs=4096, seed=0):
    """Both sides of the reverse Petty bound and the entropy-power bound."""
    n = f.dim
    if n < 2:
        raise ValueError("petty_report needs n >= 2")
    p = n / (n - 1)
    h = f.height
    Z = lc.integral(f)
    Fp = lc.p_norm_integral(f, p)
    ent = lc.entropy_integral(f)
    irat = find_t0(f).integral_ratio
    norm_p = Fp ** (1 / p)
    vol, err = pp_volume(f, n_dirs, seed)
    const = petty_constant(n)
    lhs = norm_p * vol ** (1 / n) / const
    rhs = 1.0 / (math.exp(ent / (n * Z)) * h ** (1 / n) * (Z / Fp) ** ((n - 1) / n) * irat)
    # relative error of vol^(1/n) carried to lhs
    lhs_err = lhs * err / (n * vol)
    entropy_power, entropy_bound = entropy_power_bound(f)
    return PettyReport(lhs, rhs, entropy_power, entropy_bound, lhs_err, vol, norm_p, irat)
