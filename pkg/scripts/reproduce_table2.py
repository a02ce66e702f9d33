#!/usr/bin/env python3
"""Recompute the three Hopf-Hopf points and their normal-form coefficients.

Prints one block per point with the relative error against the stored
reference values.
"""
import argparse
import time

from twodelay import Parameters, find_hopf_hopf, normal_form
from twodelay.checks import GOLDEN_KEYS_COMPLEX, GOLDEN_KEYS_REAL, LOCATION_KEYS, load_golden, rel_err


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--golden", help="reference JSON (default: bundled table)")
    args = ap.parse_args()
    golden = load_golden(args.golden)
    p = Parameters()
    for name, g in golden.items():
        t0 = time.perf_counter()
        hh = find_hopf_hopf(p, g["seed"])
        r = normal_form(p, hh)
        print(f"{name}  ({time.perf_counter() - t0:.2f}s, case {r.case_label})")
        for k in LOCATION_KEYS:
            v = getattr(hh, k)
            print(f"  {k:9s} {v: .15f}   rel err {rel_err(v, g[k]):.1e}")
        vals = {**r.gt, **r.G}
        for k in GOLDEN_KEYS_COMPLEX:
            v = vals[k]
            print(f"  {k:9s} {v.real: .12e} {v.imag:+.12e}i   rel err {rel_err(v, complex(*g[k])):.1e}")
        for k in GOLDEN_KEYS_REAL:
            v = getattr(r.amp, k)
            print(f"  {k:9s} {v: .15f}   rel err {rel_err(v, g[k]):.1e}")


if __name__ == "__main__":
    main()
