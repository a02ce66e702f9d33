"""Independent numerical oracles and the golden-value comparisons behind ``verify``."""
from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Dict, List, Optional

import numpy as np

from .errors import TwoDelayError
from .expsum import ExpSum
from .integrator import History, IntegrationOptions, integrate
from .model import (
    HistoryLookup,
    Parameters,
    evaluate_rhs,
    rhs_cubic_truncation,
    solution_bound_interval,
)
from .normalform import (
    F2,
    F3,
    bilinear,
    build_basis,
    full_nonlinearity,
    normal_form,
    w_residuals,
)
from .spectral import find_hopf_hopf, solve_hopf, trace_hopf_curve

GOLDEN_KEYS_COMPLEX = ("gt2100_1", "gt1011_1", "gt1110_2", "gt0021_2",
                       "G2100_1", "G1011_1", "G1110_2", "G0021_2")
GOLDEN_KEYS_REAL = ("p11", "p12", "p21", "p22", "theta", "delta")
LOCATION_KEYS = ("kappa1", "kappa2", "omega1", "omega2")

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str  # pass | fail | skip
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status != "fail"

    def line(self) -> str:
        return f"[{self.status.upper()}] {self.name}: {self.detail}"


def load_golden(path=None) -> dict:
    if path is None:
        text = resources.files("twodelay").joinpath("data/table2.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return json.loads(text)


def rel_err(a, b) -> float:
    return abs(a - b) / abs(b)


# ---------------------------------------------------------------- oracles

def fd_second(p: Parameters, n1: ExpSum, n2: ExpSum, h: float = 1e-4) -> complex:
    """Mixed second directional derivative of 𝓕 at 0 by central differences."""
    tot = 0j
    for s1 in (1, -1):
        for s2 in (1, -1):
            tot += s1 * s2 * full_nonlinearity(p, lambda th: s1 * h * n1(th) + s2 * h * n2(th))
    return tot / (4 * h * h)


def fd_third(p: Parameters, n1: ExpSum, n2: ExpSum, n3: ExpSum, h: float = 1e-4) -> complex:
    tot = 0j
    for s1 in (1, -1):
        for s2 in (1, -1):
            for s3 in (1, -1):
                tot += s1 * s2 * s3 * full_nonlinearity(
                    p, lambda th: h * (s1 * n1(th) + s2 * n2(th) + s3 * n3(th)))
    return tot / (8 * h ** 3)


def smooth_history(rng: np.random.Generator, eps: float, span: float = 20.0) -> Callable[[float], History]:
    """Random trigonometric initial data; returns a factory in the amplitude."""
    A = rng.normal(size=3)
    W = rng.uniform(0.3, 2.5, 3)
    P = rng.uniform(0.0, 2 * np.pi, 3)

    def make(e: float) -> History:
        return History(lambda s: e * float(np.sum(A * np.sin(W * s + P))), span,
                       lambda s: e * float(np.sum(A * W * np.cos(W * s + P))))

    return make


QUARTIC_OPTS = IntegrationOptions(atol=1e-14, rtol=1e-11)


def truncation_residual(p: Parameters, history: History, window=(20.0, 40.0), dt: float = 0.25,
                        opts: IntegrationOptions = QUARTIC_OPTS) -> float:
    """max |full RHS - cubic truncation| over ``window`` along an actual solution.

    A single evaluation time can sit near a zero of the quartic remainder,
    which spoils the scaling; the maximum over a window does not.
    """
    ts = np.arange(window[0], window[1] + 0.5 * dt, dt)
    sol = integrate(p, history, float(ts[-1]), opts)
    h = HistoryLookup(sol.evaluate, *sol.interval)
    return max(abs(evaluate_rhs(p, h, t) - rhs_cubic_truncation(p, h, t)) for t in ts)


def quartic_ratio(p: Parameters, factory: Callable[[float], History], eps: float = 1e-2) -> float:
    return truncation_residual(p, factory(eps)) / truncation_residual(p, factory(eps / 2))


# ------------------------------------------------------------------ checks

def _fmt(x: float) -> str:
    return format(x, ".3e")


def check_locations(p: Parameters, golden: dict) -> List[CheckResult]:
    out = []
    for name, g in golden.items():
        t0 = time.perf_counter()
        hh = find_hopf_hopf(p, g["seed"])
        dt = time.perf_counter() - t0
        err = max(rel_err(getattr(hh, k), g[k]) for k in LOCATION_KEYS)
        ok = err < 1e-12 and hh.residual < 1e-13 and dt < 1.0
        out.append(CheckResult(f"location {name}", "pass" if ok else "fail",
                               f"max rel err {_fmt(err)}, residual {_fmt(hh.residual)}"))
        log.debug("location %s took %.3fs", name, dt)
    return out


def check_normal_forms(p: Parameters, golden: dict) -> List[CheckResult]:
    out = []
    for name, g in golden.items():
        hh = find_hopf_hopf(p, g["seed"])
        t0 = time.perf_counter()
        r = normal_form(p, hh)
        dt = time.perf_counter() - t0
        vals = dict(r.gt)
        vals.update(r.G)
        e_c = max(rel_err(vals[k], complex(*g[k])) for k in GOLDEN_KEYS_COMPLEX)
        amp = r.amp
        e_r = max(rel_err(getattr(amp, k), g[k]) for k in GOLDEN_KEYS_REAL)
        out.append(CheckResult(f"coefficients {name}", "pass" if e_c < 1e-9 and dt < 5 else "fail",
                               f"max rel err {_fmt(e_c)} (limit 1e-9)"))
        log.debug("normal form %s took %.3fs", name, dt)
        out.append(CheckResult(f"amplitude parameters {name}", "pass" if e_r < 1e-12 else "fail",
                               f"max rel err {_fmt(e_r)} (limit 1e-12)"))
        flags_ok = all(c.passed for c in r.nondegeneracy.values())
        signs = amp.p11 < 0 and amp.p22 < 0 and amp.theta > 0 > amp.delta
        out.append(CheckResult(f"classification {name}",
                               "pass" if flags_ok and signs and r.case_label == "III" else "fail",
                               f"case {r.case_label}, flags " + ",".join(
                                   k for k, c in r.nondegeneracy.items() if c.passed)))
        s = normal_form(p, hh, swap=True)
        e_s = max(rel_err(s.theta, r.delta), rel_err(s.delta, r.theta),
                  rel_err(s.G["G2100_1"], r.G["G0021_2"]), rel_err(s.G["G1011_1"], r.G["G1110_2"]))
        out.append(CheckResult(f"frequency swap {name}", "pass" if e_s < 1e-10 else "fail",
                               f"max rel err {_fmt(e_s)}"))
        q = hh.params(p)
        b = r.basis
        ortho = max(abs(bilinear(q, b.p1, b.q1) - 1), abs(bilinear(q, b.p2, b.q2) - 1),
                    abs(bilinear(q, b.p1, b.q2)), abs(bilinear(q, b.p2, b.q1)),
                    abs(bilinear(q, b.p1, b.q1.conj())), abs(bilinear(q, b.p2, b.q2.conj())))
        wres = max(max(w_residuals(q, r.w, m)) for m in r.w.w)
        out.append(CheckResult(f"orthonormality/w residuals {name}",
                               "pass" if ortho < 1e-12 and wres < 1e-10 else "fail",
                               f"basis {_fmt(ortho)}, w {_fmt(wres)}"))
        phi = b.phi
        e2 = max(rel_err(fd_second(q, phi[i], phi[j]), F2(q, phi[i], phi[j]))
                 for i in range(4) for j in range(i, 4))
        e3 = max(rel_err(fd_third(q, phi[0], phi[i], phi[j]), F3(q, phi[0], phi[i], phi[j]))
                 for i in range(4) for j in range(i, 4))
        out.append(CheckResult(f"F2/F3 finite differences {name}",
                               "pass" if e2 < 1e-6 and e3 < 1e-4 else "fail",
                               f"F2 {_fmt(e2)}, F3 {_fmt(e3)}"))
    return out


def check_hopf_anchors(p: Parameters) -> List[CheckResult]:
    h1 = solve_hopf(p.with_kappa(kappa2=3.0), (3.2, 2.5))
    hu = trace_hopf_curve(p, "Hu")
    kmin = min(h.kappa2 for h in hu)
    return [
        CheckResult("H1 at kappa2=3", "pass" if abs(h1.kappa1 - 3.2061) <= 1e-3 else "fail",
                    f"kappa1 = {h1.kappa1:.6f}"),
        CheckResult("Hu minimum kappa2", "pass" if abs(kmin - 2.627) <= 5e-3 else "fail",
                    f"min kappa2 = {kmin:.6f}"),
    ]


def check_quartic(p: Parameters, n: int = 3, seed: int = 0) -> List[CheckResult]:
    rng = np.random.default_rng(seed)
    q = p.with_kappa(3.0, 3.0)
    ratios = [quartic_ratio(q, smooth_history(rng, 1.0)) for _ in range(n)]
    ok = all(12.0 <= r <= 21.3 for r in ratios)
    return [CheckResult("quartic truncation residual", "pass" if ok else "fail",
                        "ratios " + ", ".join(f"{r:.2f}" for r in ratios))]


def check_bounds(p: Parameters, n: int = 3, seed: int = 0) -> List[CheckResult]:
    if not p.well_posed:
        return [CheckResult("bound preservation", "skip",
                            f"gamma={p.gamma} <= kappa2={p.kappa2}: well-posedness not guaranteed")]
    if p.c == 0:
        return [CheckResult("bound preservation", "skip", "c = 0: no finite bound")]
    lo, hi = solution_bound_interval(p)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        v = rng.uniform(lo * 0.9, hi * 0.9) if hi > lo else 0.0
        try:
            sol = integrate(p, v, 100.0)
        except TwoDelayError as exc:
            return [CheckResult("bound preservation", "fail", f"{type(exc).__name__}: {exc}")]
        worst = max(worst, float(np.max(sol.y)) - hi, lo - float(np.min(sol.y)))
    return [CheckResult("bound preservation", "pass", f"max excursion beyond bound {worst:.3e}")]


def run_all(p: Optional[Parameters] = None, golden_path=None, quick: bool = False) -> List[CheckResult]:
    p = p or Parameters()
    base = Parameters()
    results: List[CheckResult] = []
    golden = load_golden(golden_path)
    same = (p.gamma, p.a1, p.a2, p.c) == (base.gamma, base.a1, base.a2, base.c)
    if same:
        results += check_locations(p, golden)
        results += check_normal_forms(p, golden)
        results += check_hopf_anchors(p)
    else:
        results.append(CheckResult("golden comparisons", "skip",
                                   "reference values exist only for the default gamma, a1, a2, c"))
    if not quick:
        results += check_quartic(p)
    results += check_bounds(p)
    return results
