#!/usr/bin/env python3
"""Warm-started kappa1 sweep at fixed kappa2 reporting the locking ratio per point.

Example: the 1:3 window near kappa1 = 5.79 at kappa2 = 3,
    python scripts/sweep_resonance.py --lo 5.70 --hi 5.85 --n 31
"""
import argparse
import time

import numpy as np

from twodelay import Parameters, sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--kappa2", type=float, default=3.0)
    ap.add_argument("--lo", type=float, default=5.70)
    ap.add_argument("--hi", type=float, default=5.85)
    ap.add_argument("--n", type=int, default=31)
    ap.add_argument("--t-end", type=float, default=1500.0)
    ap.add_argument("--skip", type=float, default=300.0)
    args = ap.parse_args()
    ks = np.linspace(args.lo, args.hi, args.n)
    t0 = time.perf_counter()
    recs = sweep(Parameters().with_kappa(kappa2=args.kappa2), ks, t_end=args.t_end, skip=args.skip)
    print("kappa1     label       amplitude")
    for r in recs:
        print(f"{r.kappa1:.5f}  {r.locked_label:10s}  {r.amplitude:.5f}" + (f"  {r.error}" if r.error else ""))
    print(f"# {len(recs)} points in {time.perf_counter() - t0:.0f}s")


if __name__ == "__main__":
    main()
