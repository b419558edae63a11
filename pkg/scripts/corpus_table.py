"""Table of t0, integral ratio and the extremal bound over the corpus.

Also reports the worst growth-corollary deviation for each function in John
position. Random piecewise-linear functions are included with --random.
"""
import argparse
import math
import time

from ellirat import john
from ellirat.corpus import default_corpus, random_pl_corpus


def row(e):
    t = time.perf_counter()
    res = john.find_t0(e.f)
    rep = john.maximality_check(e.f)
    _, g = john.john_position_normalize(e.f)
    growth = john.corollary_growth_check(g, samples=25)
    return (e.name, e.dim, res.t0, res.integral_ratio, rep.bound, rep.slack,
            growth.max_violation, time.perf_counter() - t)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--random", type=int, default=0, help="number of random PL functions")
    args = ap.parse_args(argv)

    entries = default_corpus(args.seed)
    if args.random:
        entries += random_pl_corpus(args.random, args.seed)
    head = f"{'name':28s} n {'t0':>9s} {'s0':>7s} {'I.rat':>8s} {'bound':>8s} {'slack':>9s} {'growth':>9s}  sec"
    print(head)
    print("-" * len(head))
    for e in entries:
        name, n, t0, irat, bound, slack, viol, sec = row(e)
        print(f"{name:28s} {n} {t0:9.6f} {-math.log(t0):7.4f} {irat:8.5f} {bound:8.5f} "
              f"{slack:9.2e} {viol:9.1e} {sec:5.1f}")


if __name__ == "__main__":
    main()
