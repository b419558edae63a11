"""Asplund (sup-convolution) products used by the Petty-type bound.

For f = e^{-u} the scaled self-product is f * f_eps(z) = e^{-(1+eps) u(z/(1+eps))},
which stays inside each exponent family. The two derivative identities in eps
are checked by difference quotients on a decreasing ladder of eps values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import logconcave as lc

DEFAULT_LADDER = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)


@dataclass(frozen=True)
class EpsilonLadder:
    eps_values: tuple
    quotients: tuple
    extrapolated: float
    error: float  # change of the extrapolation between the last two pairs
    target: float
    converged: bool

    @property
    def relative_error(self):
        return abs(self.extrapolated - self.target) / max(abs(self.target), 1e-300)

    @property
    def monotone(self):
        d = np.diff(self.quotients)
        return bool(np.all(d >= -1e-12) or np.all(d <= 1e-12))


def _ladder(eps, quotients, target, rtol=1e-3):
    eps = tuple(float(e) for e in eps)
    if len(eps) < 3 or any(b >= a for a, b in zip(eps, eps[1:])) or eps[-1] <= 0:
        raise ValueError("ladder needs at least three strictly decreasing positive values")
    q = tuple(float(v) for v in quotients)

    def rich(i):
        # linear-in-eps extrapolation through entries i-1 and i
        e0, e1 = eps[i - 1], eps[i]
        return (e0 * q[i] - e1 * q[i - 1]) / (e0 - e1)

    last, prev = rich(len(q) - 1), rich(len(q) - 2)
    err = abs(last - prev)
    converged = math.isfinite(last) and err <= rtol * max(1.0, abs(last))
    return EpsilonLadder(eps, q, last, err, float(target), converged)


def self_product(f, eps):
    """Closed form of f * f_eps; height becomes height^(1+eps)."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    return lc.LogConcaveFn(f.height ** (1 + eps), f.exponent.self_product(eps))


def self_product_target(f):
    """n int f + int f log f."""
    Z = lc.integral(f)
    return f.dim * Z + lc.entropy_integral(f) + math.log(f.height) * Z


def self_product_derivative_check(f, ladder=DEFAULT_LADDER):
    """Quotients (int f*f_eps - int f)/eps against n int f + int f log f."""
    Z = lc.integral(f)
    q = [(lc.integral(self_product(f, e)) - Z) / e for e in ladder]
    return _ladder(ladder, q, self_product_target(f))


def ball_product(f, z, a, eps):
    """(f * g_eps)(z) for g = a chi_B: a^eps times the sup of f over z + eps B.

    The inner minimum of the exponent uses the affine piece active at z, so it
    is exact only for eps below the distance from z to the nearest kink.
    """
    return a ** eps * f.height * math.exp(-f.exponent.ball_min(np.asarray(z, float), eps))


def gradient_norm(f, z):
    """|grad f(z)| off the kink set."""
    _, grad_v, _ = f.exponent.local_piece(np.asarray(z, float))
    return lc.evaluate(f, z) * float(np.linalg.norm(grad_v))


def ball_product_derivative(f, z, a, ladder=DEFAULT_LADDER):
    """Quotients (f*g_eps(z) - f(z))/eps against |grad f(z)| + f(z) log a.

    Raises KinkPoint when z is on the kink set of the exponent.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    z = np.asarray(z, float)
    fz = lc.evaluate(f, z)
    target = gradient_norm(f, z) + fz * math.log(a)
    q = [(ball_product(f, z, a, e) - fz) / e for e in ladder]
    return _ladder(ladder, q, target)
