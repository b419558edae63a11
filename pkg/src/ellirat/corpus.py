"""Built-in test functions used by the acceptance checks and the CLI."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from . import logconcave as lc


@dataclass(frozen=True, eq=False)
class Entry:
    name: str
    f: lc.LogConcaveFn

    @property
    def family(self):
        return self.f.kind

    @property
    def dim(self):
        return self.f.dim

    @property
    def smooth(self):
        """Sobolev-regular (every family but the indicator)."""
        return self.family != "indicator"


def triangle():
    """Regular triangle with inradius 1 centered at the origin."""
    s = math.sqrt(3)
    return geo.HPolytope.from_points([(2, 0), (-1, s), (-1, -s)])


def random_piecewise_linear(rng, n=2, pieces=(3, 7), radius=(2.0, 4.0)):
    """Random PL exponent on a random polygon (n = 2) or box (n > 2)."""
    k = int(rng.integers(pieces[0], pieces[1] + 1))
    slopes = rng.normal(size=(k, n))
    offsets = rng.uniform(-0.5, 0.5, k)
    if n == 2:
        dom = geo.random_polygon(rng, m=int(rng.integers(4, 9)), radius_range=radius)
    else:
        dom = geo.box(rng.uniform(*radius, n))
    return lc.piecewise_linear(slopes, offsets, dom, height=float(rng.uniform(0.5, 2.0)))


def random_pl_corpus(count=25, seed=0):
    rng = np.random.default_rng(seed)
    return [Entry(f"pl_random_{i:02d}", random_piecewise_linear(rng)) for i in range(count)]


def default_corpus(seed=0):
    """The named n = 2 functions plus two in n = 3."""
    rng = np.random.default_rng(seed)
    sq, tri = geo.cube(2), triangle()
    poly = geo.random_polygon(rng, m=7)
    simplex2 = geo.regular_simplex(2)
    hexagon = geo.regular_polygon(6)
    pl_even = lc.piecewise_linear(
        np.vstack([np.eye(2), -np.eye(2), [[1, 1], [-1, -1]]]),
        [0, 0, 0, 0, -0.5, -0.5], hexagon.dilate(3.0))
    pl_tent = lc.piecewise_linear([[1.0, 0.3], [-1.0, 0.2], [0.1, 1.0], [0.2, -1.0]],
                                  [0.0, 0.5, 0.0, 0.2], geo.cube(2, 4.0), height=1.5)
    pl_flat = lc.piecewise_linear([[1.5, 0], [-1, 0.5], [0, -1], [0, 0]], [-0.5, -0.5, -0.5, 0.0],
                                  geo.box([3.0, 2.5]))
    entries = [
        Entry("indicator_square", lc.indicator(sq)),
        Entry("indicator_triangle", lc.indicator(tri, height=2.0)),
        Entry("indicator_64gon", lc.indicator(geo.regular_polygon(64))),
        Entry("indicator_random_polygon", lc.indicator(poly, height=0.8)),
        Entry("gauge_square_a1", lc.gauge_power(sq, 1.0)),
        Entry("gauge_triangle_a2", lc.gauge_power(tri, 2.0)),
        Entry("gauge_polygon_a1_shifted", lc.gauge_power(poly, 1.0, height=1.7, shift=[0.3, -0.2])),
        Entry("truncated_square_0.5", lc.truncated_gauge(sq, 0.5)),
        Entry("truncated_triangle_e-1", lc.truncated_gauge(tri, math.exp(-1))),
        Entry("truncated_simplex_0.3", lc.truncated_gauge(simplex2, 0.3)),
        Entry("truncated_square_e-2", lc.truncated_gauge(sq, math.exp(-2), height=0.6)),
        Entry("pl_even_hexagon", pl_even),
        Entry("pl_tent", pl_tent),
        Entry("pl_flat_top", pl_flat),
        Entry("gauge_cube3_a1", lc.gauge_power(geo.cube(3), 1.0)),
        Entry("truncated_simplex3_0.2", lc.truncated_gauge(geo.regular_simplex(3), 0.2)),
    ]
    return entries


def planar(entries):
    return [e for e in entries if e.dim == 2]
