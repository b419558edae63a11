"""Dump log phi(e^-s) for every corpus function as one long CSV.

    python scripts/phi_curve.py --samples 60 --out phi.csv
"""
import argparse
import csv
import sys

from ellirat import john
from ellirat.corpus import default_corpus


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=40)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    args = ap.parse_args(argv)

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh)
    w.writerow(["name", "s", "t", "log_phi", "volume", "s0"])
    for e in default_corpus(args.seed):
        s0 = john.find_t0(e.f).s0
        for s, t, lp, vol in john.phi_curve(e.f, args.samples):
            w.writerow([e.name, f"{s:.6f}", f"{t:.6e}", f"{lp:.10e}", f"{vol:.10e}", f"{s0:.8f}"])
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
