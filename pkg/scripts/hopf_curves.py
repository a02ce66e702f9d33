#!/usr/bin/env python3
"""Trace the Hopf curves in the (kappa1, kappa2) plane and list their crossings."""
import argparse
import csv
import sys

from twodelay import Parameters, trace_hopf_curve
from twodelay.spectral import detect_hopf_hopf


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--branches", default="H1,H2,H3,Hu")
    ap.add_argument("--step", type=float, default=0.02)
    ap.add_argument("--out", help="CSV path (default stdout)")
    args = ap.parse_args()
    p = Parameters()
    curves = {b: trace_hopf_curve(p, b, step=args.step) for b in args.branches.split(",")}
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["branch", "kappa1", "kappa2", "omega"])
    for b, pts in curves.items():
        for h in pts:
            w.writerow([b, repr(h.kappa1), repr(h.kappa2), repr(h.omega)])
    if args.out:
        fh.close()
    for a, b, hh in detect_hopf_hopf(p, curves):
        print(f"{a} x {b}: kappa1={hh.kappa1:.12f} kappa2={hh.kappa2:.12f} "
              f"omega=({hh.omega1:.10f}, {hh.omega2:.10f})", file=sys.stderr)


if __name__ == "__main__":
    main()
