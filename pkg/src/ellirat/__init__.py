"""John ellipsoids, optimal levels and integral ratios of log-concave functions."""
from .geometry import AffineMap, Ellipsoid, HPolytope, VPolytope
from .john import JohnResult, find_t0, integral_ratio, phi
from .logconcave import LogConcaveFn, function_from_spec, function_to_spec
from .mvie import john_certificate, mvie

__all__ = ["AffineMap", "Ellipsoid", "HPolytope", "VPolytope", "JohnResult", "LogConcaveFn",
           "find_t0", "function_from_spec", "function_to_spec", "integral_ratio",
           "john_certificate", "mvie", "phi"]
__version__ = "0.1.0"
