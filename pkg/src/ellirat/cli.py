"""Command line front end.

    ellirat john --spec f.json
    ellirat phi-curve --spec f.json --samples 100 --out curve.csv
    ellirat verify-all

Reports are flat ``key: value`` lines under a header naming the command and
seed. Exit codes: 0 success, 1 failed acceptance check, 2 bad input, 3 solver
failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from . import acceptance, asplund, john
from . import logconcave as lc
from . import projection as proj
from .errors import EllipratError, SpecParseError
from .geometry import HPolytope
from .mvie import john_certificate, mvie

COMMANDS = ("mvie", "john", "irat", "phi-curve", "petty", "certify", "asplund-check", "verify-all")
EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    command: str
    spec_path: str | None = None
    tol: float | None = None
    seed: int = 0
    samples: int = 50
    out_path: str | None = None
    only: tuple = ()
    overrides: tuple = ()

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.tol is not None and not 1e-12 <= self.tol <= 1e-2:
            raise ValueError("--tol must lie in [1e-12, 1e-2]")
        if self.samples < 2:
            raise ValueError("--samples must be at least 2")
        if self.command != "verify-all" and not self.spec_path:
            raise ValueError(f"{self.command} needs --spec")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, np.ndarray):
        return json.dumps(np.asarray(v, float).tolist())
    if isinstance(v, (list, tuple)):
        return json.dumps([float(x) if isinstance(x, (float, np.floating)) else x for x in v])
    return str(v)


def format_report(command, seed, items):
    lines = [f"# ellirat {command}", f"seed: {seed}"]
    lines += [f"{k}: {_fmt(v)}" for k, v in items]
    return "\n".join(lines) + "\n"


def load_spec(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise SpecParseError("--spec", f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise SpecParseError("--spec", f"invalid JSON: {exc.msg} at line {exc.lineno}") from exc


def _polytope_from(doc):
    """A polytope document: a bare row list, {"body": rows}, or a function spec."""
    if isinstance(doc, list):
        try:
            return HPolytope.from_rows(doc), False
        except Exception as exc:
            raise SpecParseError("<root>", f"bad polytope rows ({exc})") from exc
    if isinstance(doc, dict) and "kind" not in doc:
        if "body" not in doc:
            raise SpecParseError("body", "missing")
        try:
            return HPolytope.from_rows(doc["body"]), bool(doc.get("symmetric", False))
        except Exception as exc:
            raise SpecParseError("body", f"bad polytope rows ({exc})") from exc
    ex = lc.function_from_spec(doc).exponent
    return (ex.domain if isinstance(ex, lc.PiecewiseLinear) else ex.body), False


def _ellipsoid_items(E, prefix="ellipsoid"):
    return [(f"{prefix}_center", E.center), (f"{prefix}_shape", E.shape),
            (f"{prefix}_volume", E.volume)]


def cmd_mvie(cfg, doc):
    K, sym = _polytope_from(doc)
    sol = mvie(K, symmetric=sym, tol=cfg.tol or 1e-10)
    return [("dim", K.dim), ("symmetric", sym), *_ellipsoid_items(sol.ellipsoid),
            ("log_det", sol.objective), ("iterations", sol.iterations), ("gap", sol.gap),
            ("active_rows", [int(i) for i in sol.active_rows]),
            ("contact_points", sol.contact_points),
            ("volume_ratio", (K.volume / sol.ellipsoid.volume) ** (1 / K.dim))]


def cmd_john(cfg, doc):
    f = lc.function_from_spec(doc)
    res = john.find_t0(f, cfg.tol or 1e-5)
    return [("dim", f.dim), ("kind", f.kind), ("t0", res.t0), ("s0", res.s0),
            *_ellipsoid_items(res.ellipsoid), ("phi_at_t0", res.phi_at_t0),
            ("integral_ratio", res.integral_ratio), ("phi_evaluations", len(res.search_trace))]


def cmd_irat(cfg, doc):
    f = lc.function_from_spec(doc)
    res = john.find_t0(f, cfg.tol or 1e-5)
    sym = lc.is_even(f)
    bound = john.maximizer_irat(f.dim, res.t0, sym)
    items = [("dim", f.dim), ("kind", f.kind), ("integral", lc.integral(f)), ("t0", res.t0),
             ("phi_at_t0", res.phi_at_t0), ("integral_ratio", res.integral_ratio),
             ("even", sym), ("maximizer_bound", bound), ("slack", bound - res.integral_ratio)]
    return items


def phi_curve_csv(f, samples):
    rows = john.phi_curve(f, samples)
    out = ["s,t,log_phi,volume"]
    out += [",".join(_fmt(float(v)) for v in row) for row in rows]
    return "\n".join(out) + "\n"


def cmd_petty(cfg, doc):
    f = lc.function_from_spec(doc)
    n_dirs = max(cfg.samples, 4096) if f.dim == 2 else max(cfg.samples, 2000)
    rep = proj.petty_report(f, n_dirs=n_dirs, seed=cfg.seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", proj.RegularityWarning)
        gl1 = proj.grad_l1(f)
    n = f.dim
    sob = proj.sobolev_constant(n) * rep.p_norm
    return [("dim", n), ("kind", f.kind), ("directions", n_dirs), ("lhs", rep.lhs),
            ("rhs_lower", rep.rhs_lower), ("mc_error", rep.mc_error),
            ("entropy_power", rep.entropy_power), ("entropy_bound", rep.entropy_bound),
            ("pp_volume", rep.pp_volume), ("integral_ratio", rep.integral_ratio),
            ("grad_l1", gl1), ("sobolev_rhs", sob), ("sandwich_ok", rep.sandwich_ok),
            ("entropy_ok", rep.entropy_ok), ("regular", f.kind != "indicator")]


def cmd_certify(cfg, doc):
    if isinstance(doc, dict) and "kind" in doc:
        f = lc.function_from_spec(doc)
        rep, _ = john.certify(f, cfg.tol or 1e-5)
        head = [("dim", f.dim), ("kind", f.kind), ("t0", john.find_t0(f).t0)]
    else:
        K, sym = _polytope_from(doc)
        rep = john_certificate(K, mvie(K, symmetric=sym), cfg.tol or 1e-5, sym)
        head = [("dim", K.dim)]
    interval = rep.inradius_derivative_interval
    items = head + [("symmetric", rep.symmetric), ("contacts", len(rep.contact_points)),
                    ("contact_points", rep.contact_points), ("weights", rep.weights),
                    ("weight_sum", rep.weight_sum), ("identity_residual", rep.identity_residual),
                    ("barycenter_residual", rep.barycenter_residual), ("passed", rep.passed)]
    if interval is not None:
        items += [("inradius_derivative_lo", interval[0]), ("inradius_derivative_hi", interval[1])]
    return items


def cmd_asplund(cfg, doc):
    f = lc.function_from_spec(doc)
    lad = asplund.self_product_derivative_check(f)
    items = [("dim", f.dim), ("kind", f.kind), ("eps", list(lad.eps_values)),
             ("self_quotients", list(lad.quotients)), ("self_extrapolated", lad.extrapolated),
             ("self_target", lad.target), ("self_error", lad.error),
             ("self_converged", lad.converged)]
    if "point" in doc:
        a = float(doc.get("a", 1.0))
        ball = asplund.ball_product_derivative(f, np.asarray(doc["point"], float), a)
        items += [("ball_point", list(map(float, doc["point"]))), ("ball_a", a),
                  ("ball_quotients", list(ball.quotients)),
                  ("ball_extrapolated", ball.extrapolated), ("ball_target", ball.target),
                  ("ball_converged", ball.converged)]
    return items


HANDLERS = {"mvie": cmd_mvie, "john": cmd_john, "irat": cmd_irat, "petty": cmd_petty,
            "certify": cmd_certify, "asplund-check": cmd_asplund}


def _emit(text, out_path, stdout):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def run(cfg: RunConfig, stdout=None, stderr=None):
    """Execute one command; returns the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    if cfg.command == "verify-all":
        results = acceptance.verify_all(cfg.seed, set(cfg.only) or None, dict(cfg.overrides),
                                        progress=lambda r: stderr.write(r.line() + "\n"))
        # details carry timings, so they go to the progress stream, not the report
        lines = [f"criterion_{r.number:02d}: {'pass' if r.passed else 'fail'}  # {r.name}"
                 for r in results]
        failed = [r for r in results if not r.passed]
        lines.append(f"failed: {len(failed)}")
        _emit(f"# ellirat verify-all\nseed: {cfg.seed}\n" + "\n".join(lines) + "\n", cfg.out_path,
              stdout)
        return EXIT_CHECK if failed else EXIT_OK
    try:
        doc = load_spec(cfg.spec_path)
        if cfg.command == "phi-curve":
            text = phi_curve_csv(lc.function_from_spec(doc), cfg.samples)
        else:
            text = format_report(cfg.command, cfg.seed, HANDLERS[cfg.command](cfg, doc))
    except SpecParseError as exc:
        stderr.write(f"error: invalid spec: {exc}\n")
        return EXIT_INPUT
    except EllipratError as exc:
        stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_SOLVER
    except ValueError as exc:
        stderr.write(f"error: invalid input: {exc}\n")
        return EXIT_INPUT
    _emit(text, cfg.out_path, stdout)
    return EXIT_OK


def _override(text):
    try:
        k, v = text.split("=")
        return int(k), float(v)
    except ValueError as exc:
        raise argparse.ArgumentTypeError("expected CRITERION=TOL, e.g. 3=1e-12") from exc


def build_parser():
    p = argparse.ArgumentParser(prog="ellirat", description=__doc__.split("\n\n")[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--spec", help="JSON function or polytope spec")
    p.add_argument("--tol", type=float, help="solver tolerance in [1e-12, 1e-2]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=50,
                   help="phi-curve rows, or minimum direction count for petty")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--only", type=int, nargs="*", default=[], help="verify-all: criteria to run")
    p.add_argument("--override", type=_override, action="append", default=[],
                   help="verify-all: replace a criterion tolerance, CRITERION=TOL")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(args.command, args.spec, args.tol, args.seed, args.samples, args.out,
                        tuple(args.only), tuple(args.override))
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
