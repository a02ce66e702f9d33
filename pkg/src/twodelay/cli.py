"""Command-line front end: ``twodelay <subcommand> [options]``.

Exit codes: 0 success, 1 numerical failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from typing import List, Optional, Sequence

import numpy as np

from .checks import load_golden, run_all
from .dynamics import DEFAULT_SKIP, detect_locking, poincare_trace, sweep
from .errors import TwoDelayError
from .integrator import IntegrationOptions, integrate
from .model import PARAM_KEYS, Parameters, load_parameters
from .normalform import normal_form
from .spectral import BRANCHES, detect_hopf_hopf, find_hopf_hopf, trace_hopf_curve

log = logging.getLogger("twodelay")


def fmt(x: float) -> str:
    return format(float(x) + 0.0, ".17g")


def _floats(text: str, n: Optional[int] = None) -> List[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if n is not None and len(vals) != n:
        raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {len(vals)}")
    return vals


def _seed4(text: str) -> List[float]:
    return _floats(text, 4)


def _range3(text: str) -> List[float]:
    vals = _floats(text, 3)
    if vals[2] < 1 or vals[2] != int(vals[2]):
        raise argparse.ArgumentTypeError("third value must be a positive integer count")
    return vals


def params_from_args(args) -> Parameters:
    base = load_parameters(args.params) if args.params else Parameters()
    values = base.to_dict()
    for k in PARAM_KEYS:
        v = getattr(args, k, None)
        if v is not None:
            values[k] = v
    return Parameters.from_dict(values)


def _open_out(path: Optional[str]):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _write_csv(path: Optional[str], header: Sequence[str], rows) -> None:
    fh, close = _open_out(path)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    finally:
        if close:
            fh.close()


def _plain(obj):
    """numpy scalars and tuples to plain JSON types."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _float17(x: float) -> str:
    if x != x:
        return "NaN"
    if x in (math.inf, -math.inf):
        return "Infinity" if x > 0 else "-Infinity"
    return fmt(x)


def dumps17(obj, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits."""
    enc = json.JSONEncoder(indent=indent)
    it = json.encoder._make_iterencode(  # pure-python path accepts a float formatter
        {}, enc.default, json.encoder.encode_basestring_ascii, enc.indent, _float17,
        enc.key_separator, enc.item_separator, False, False, True)
    return "".join(it(_plain(obj), 0))


def _write_json(path: Optional[str], obj) -> None:
    text = dumps17(obj) + "\n"
    fh, close = _open_out(path)
    try:
        fh.write(text)
    finally:
        if close:
            fh.close()


# ---------------------------------------------------------------- commands

def cmd_hopf_curves(args) -> int:
    p = params_from_args(args)
    branches = args.branches.split(",") if args.branches else list(BRANCHES)
    curves = {b: trace_hopf_curve(p, b, step=args.step) for b in branches}
    rows = [(h.branch_label, h.kappa1, h.kappa2, h.omega) for b in branches for h in curves[b]]
    _write_csv(args.out, ("branch", "kappa1", "kappa2", "omega"), rows)
    if args.hh_out:
        found = detect_hopf_hopf(p, curves)
        _write_json(args.hh_out, [dict(branches=[a, b], **hh.to_dict()) for a, b, hh in found])
    return 0


def cmd_find_hh(args) -> int:
    p = params_from_args(args)
    hh = find_hopf_hopf(p, args.seed)
    _write_json(args.out, hh.to_dict())
    return 0


def _hh_from_args(args, p):
    if args.hh is not None:
        golden = load_golden()
        if args.hh not in golden:
            raise SystemExit(2)
        seed = golden[args.hh]["seed"]
    else:
        seed = args.hh_seed
    return find_hopf_hopf(p, seed)


def cmd_normal_form(args) -> int:
    p = params_from_args(args)
    hh = _hh_from_args(args, p)
    rep = normal_form(p, hh, swap=args.swap, route=args.route)
    _write_json(args.out, rep.to_dict())
    if args.rays_csv:
        _write_csv(args.rays_csv, ("ray", "s", "mu1", "mu2", "kappa1", "kappa2"),
                   _ray_rows(rep, args.rays_n, args.rays_length))
    return 0


def _ray_rows(rep, n: int, length: float):
    rows = []
    for ray in (rep.t1_ray, rep.t2_ray):
        if ray is None:
            continue
        for s in np.linspace(0.0, length, n):
            k = ray.kappa_at(float(s))
            rows.append((ray.name, float(s), s * ray.mu_direction[0], s * ray.mu_direction[1], k[0], k[1]))
    return rows


def cmd_local_rays(args) -> int:
    p = params_from_args(args)
    hh = _hh_from_args(args, p)
    rep = normal_form(p, hh)
    if rep.t1_ray is None:
        print(f"error: no torus rays for case {rep.case_label}", file=sys.stderr)
        return 1
    _write_csv(args.out, ("ray", "s", "mu1", "mu2", "kappa1", "kappa2"),
               _ray_rows(rep, args.n, args.length))
    return 0


def _opts(args) -> IntegrationOptions:
    return IntegrationOptions(atol=args.atol, rtol=args.rtol, max_step=args.max_step,
                              bound_check=not args.no_bound_check)


def cmd_simulate(args) -> int:
    p = params_from_args(args)
    sol = integrate(p, args.history_const, args.t_end, _opts(args))
    start = max(args.skip, p.a2 if args.delayed else 0.0)
    n = int(np.floor((args.t_end - start) / args.dt + 1e-9)) + 1
    ts = start + args.dt * np.arange(n)
    ts[-1] = min(ts[-1], sol.t_end)
    u = sol.sample(ts)
    if args.delayed:
        ua1 = sol.sample(ts - p.a1)
        ua2 = sol.sample(ts - p.a2)
        _write_csv(args.out, ("t", "u", "u_a1", "u_a2"), zip(ts, u, ua1, ua2))
    else:
        _write_csv(args.out, ("t", "u"), zip(ts, u))
    return 0


def cmd_poincare(args) -> int:
    p = params_from_args(args)
    sol = integrate(p, args.history_const, args.t_end, _opts(args))
    tr = poincare_trace(p, sol, args.skip)
    _write_csv(args.out, ("t_event", "u_a1", "u_a2"), zip(tr.times, tr.u_a1, tr.u_a2))
    res = detect_locking(tr)
    print(f"locking: {res.label()} ({len(tr)} events)", file=sys.stderr)
    return 0


def cmd_sweep(args) -> int:
    p = params_from_args(args)
    lo, hi, n = args.kappa1_range
    ks = np.linspace(lo, hi, int(n))
    recs = sweep(p, ks, t_end=args.t_end, skip=args.skip, warm_start=not args.no_warm_start,
                 history=args.history_const, opts=_opts(args), workers=args.workers)
    rows = []
    for r in recs:
        lk = r.locking
        rows.append((r.kappa1, "error" if lk is None else ("yes" if lk.locked else "no"),
                     lk.p if lk else 0, lk.q if lk else 0, r.amplitude))
    _write_csv(args.out, ("kappa1", "locked", "p", "q", "amplitude"), rows)
    if args.trace_out:
        _write_csv(args.trace_out, ("kappa1", "u_a1"),
                   ((r.kappa1, v) for r in recs for v in r.ordinates))
    for r in recs:
        if r.error:
            print(f"kappa1={fmt(r.kappa1)}: {r.error}", file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    p = params_from_args(args)
    results = run_all(p, args.golden, quick=args.quick)
    for r in results:
        print(r.line())
    failed = sum(not r.ok for r in results)
    print(f"{len(results) - failed}/{len(results)} checks without failure")
    return 1 if failed else 0


# ------------------------------------------------------------------ parser

def _add_params(sp):
    g = sp.add_argument_group("model parameters (override --params)")
    g.add_argument("--params", help="parameter file with 'key = value' lines")
    for k in PARAM_KEYS:
        g.add_argument(f"--{k}", type=float, default=None)


def _add_integration(sp, t_end: float):
    sp.add_argument("--t-end", type=float, default=t_end)
    sp.add_argument("--history-const", type=float, default=0.01)
    sp.add_argument("--skip", type=float, default=DEFAULT_SKIP)
    sp.add_argument("--atol", type=float, default=1e-9)
    sp.add_argument("--rtol", type=float, default=1e-7)
    sp.add_argument("--max-step", type=float, default=0.05)
    sp.add_argument("--no-bound-check", action="store_true")
    sp.add_argument("--out", default=None, help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twodelay", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", metavar="command")

    sp = sub.add_parser("hopf-curves", help="trace Hopf curves in the (kappa1, kappa2) plane")
    _add_params(sp)
    sp.add_argument("--branches", help="comma-separated subset of H1,H2,H3,Hu")
    sp.add_argument("--step", type=float, default=0.02)
    sp.add_argument("--out")
    sp.add_argument("--hh-out", help="also write detected Hopf-Hopf crossings as JSON")
    sp.set_defaults(func=cmd_hopf_curves)

    sp = sub.add_parser("find-hh", help="locate a Hopf-Hopf point")
    _add_params(sp)
    sp.add_argument("--seed", type=_seed4, required=True, help="k1,w1,k2,w2")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_find_hh)

    for name, fn, helptext in (("normal-form", cmd_normal_form, "normal form report as JSON"),
                               ("local-rays", cmd_local_rays, "torus-bifurcation rays as CSV")):
        sp = sub.add_parser(name, help=helptext)
        _add_params(sp)
        grp = sp.add_mutually_exclusive_group(required=True)
        grp.add_argument("--hh-seed", type=_seed4, help="k1,w1,k2,w2")
        grp.add_argument("--hh", choices=("HH1", "HH2", "HH3"))
        sp.add_argument("--out")
        if name == "normal-form":
            sp.add_argument("--swap", action="store_true", help="exchange the roles of omega1, omega2")
            sp.add_argument("--route", choices=("derivative", "difference"), default="derivative")
            sp.add_argument("--rays-csv")
            sp.add_argument("--rays-n", type=int, default=21)
            sp.add_argument("--rays-length", type=float, default=0.05)
        else:
            sp.add_argument("--n", type=int, default=21)
            sp.add_argument("--length", type=float, default=0.05)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("simulate", help="integrate the DDE and write samples")
    _add_params(sp)
    _add_integration(sp, 500.0)
    sp.add_argument("--dt", type=float, default=0.1)
    sp.add_argument("--delayed", action="store_true", help="add u_a1, u_a2 columns")
    sp.set_defaults(func=cmd_simulate, skip=0.0)

    sp = sub.add_parser("poincare", help="Poincaré trace of a simulation")
    _add_params(sp)
    _add_integration(sp, 1500.0)
    sp.set_defaults(func=cmd_poincare)

    sp = sub.add_parser("sweep", help="one-parameter sweep in kappa1")
    _add_params(sp)
    _add_integration(sp, 2000.0)
    sp.add_argument("--kappa1-range", type=_range3, required=True, help="lo,hi,n")
    sp.add_argument("--no-warm-start", action="store_true")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--trace-out")
    sp.set_defaults(func=cmd_sweep, history_const=0.1)

    sp = sub.add_parser("verify", help="run golden comparisons and invariant checks")
    _add_params(sp)
    sp.add_argument("--golden", help="alternative golden-value JSON file")
    sp.add_argument("--quick", action="store_true", help="skip the slower residual-scaling check")
    sp.set_defaults(func=cmd_verify)
    return ap


def run(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=os.environ.get("TWODELAY_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    ap = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        ap.print_usage(sys.stderr)
        return 2
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2
    if not getattr(args, "func", None):
        ap.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args)
    except TwoDelayError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
