"""Poincaré traces, phase-locking detection and one-parameter sweeps.

The section is u(t) = 0 with u'(t) < 0; each crossing is projected onto
(u(t - a1), u(t - a2)). A p:q locked orbit leaves q clusters in that plane,
visited with a constant cluster stride.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from .errors import OutOfRange, TooFewEvents, TwoDelayError, WellPosednessViolated
from .integrator import DenseSolution, History, IntegrationOptions, find_events, integrate
from .model import Parameters, max_delay_bound

DEFAULT_SKIP = 300.0
Q_MAX = 13


@dataclass(frozen=True)
class PoincareTrace:
    times: np.ndarray
    u_a1: np.ndarray
    u_a2: np.ndarray
    params: Parameters

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.u_a1, self.u_a2])

    def __len__(self) -> int:
        return len(self.times)


def poincare_trace(p: Parameters, sol: DenseSolution, skip: float = DEFAULT_SKIP,
                   min_events: int = 20) -> PoincareTrace:
    ev = find_events(sol, skip)
    if len(ev) < min_events:
        raise TooFewEvents(f"{len(ev)} section crossings after skip={skip}, need {min_events}")
    return PoincareTrace(
        np.array([e.t for e in ev]),
        np.array([e.u_a1 for e in ev]),
        np.array([e.u_a2 for e in ev]),
        p,
    )


def project3(sol: DenseSolution, p: Parameters, dt: float,
             t_start: Optional[float] = None, t_end: Optional[float] = None) -> np.ndarray:
    """Rows (u(t), u(t - a1), u(t - a2)) on a uniform grid of step ``dt``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    t_start = sol.t0 + p.a2 if t_start is None else t_start
    t_end = sol.t_end if t_end is None else t_end
    if t_start - p.a2 < sol.t0 - 1e-12 or t_end > sol.t_end or t_end < t_start:
        raise OutOfRange(f"projection window [{t_start}, {t_end}] not covered")
    n = int(math.floor((t_end - t_start) / dt + 1e-9)) + 1
    ts = t_start + dt * np.arange(n)
    ts[-1] = min(ts[-1], sol.t_end)
    return np.column_stack([
        sol.sample(ts),
        sol.sample(np.maximum(ts - p.a1, sol.t0)),
        sol.sample(np.maximum(ts - p.a2, sol.t0)),
    ])


def amplitude_norm(sol: DenseSolution, t_start: float, dt: float = 0.01) -> float:
    """max u - min u over [t_start, t_end]."""
    ts = np.arange(t_start, sol.t_end, dt)
    if ts.size == 0:
        raise OutOfRange("empty amplitude window")
    u = sol.sample(ts)
    return float(u.max() - u.min())


def max_nearest_neighbor_gap(points: np.ndarray) -> float:
    """Largest distance from a point to its nearest neighbour."""
    if len(points) < 2:
        return math.inf
    d, _ = cKDTree(points).query(points, k=2)
    return float(d[:, 1].max())


def curve_gaps(points: np.ndarray) -> np.ndarray:
    """Distances between consecutive points of a closed curve, ordered by angle about the centroid.

    Suited to traces that fill a star-shaped loop; the largest gap shrinks as a
    quasi-periodic trace accumulates points.
    """
    if len(points) < 2:
        return np.full(1, math.inf)
    c = points.mean(axis=0)
    q = points[np.argsort(np.arctan2(points[:, 1] - c[1], points[:, 0] - c[0]), kind="stable")]
    return np.linalg.norm(np.diff(np.vstack([q, q[:1]]), axis=0), axis=1)


@dataclass(frozen=True)
class LockingResult:
    kind: str  # "locked" or "unresolved"
    p: int = 0
    q: int = 0
    stride: int = 0  # counter-clockwise cluster stride
    period: float = math.nan
    cluster_radii: Tuple[float, ...] = ()
    n_points: int = 0
    reason: str = ""

    @property
    def locked(self) -> bool:
        return self.kind == "locked"

    @property
    def rotation_number(self) -> float:
        return self.p / self.q if self.locked else math.nan

    def label(self) -> str:
        return f"{self.p}:{self.q}" if self.locked else "unresolved"


def _clusters(pts: np.ndarray, tol: float) -> np.ndarray:
    if len(pts) == 1:
        return np.ones(1, int)
    return fcluster(linkage(pts, "single"), tol, "distance")


def detect_locking(trace: PoincareTrace, tol: Optional[float] = None, rel_tol: float = 1e-3,
                   q_max: int = Q_MAX, tail_fraction: float = 0.5,
                   orientation: str = "unsigned", single_point_tol: float = 1e-4) -> LockingResult:
    """Classify a trace as p:q locked or unresolved.

    Only the last ``tail_fraction`` of the points is used; the cluster count
    there must agree with the count on the last half of that tail. ``tol``
    defaults to ``rel_tol`` times the trace diameter. ``orientation`` picks
    how p is read off the counter-clockwise stride s: "ccw" gives s, "cw"
    gives q - s, "unsigned" gives min(s, q - s).
    """
    if orientation not in ("ccw", "cw", "unsigned"):
        raise ValueError("orientation must be 'ccw', 'cw' or 'unsigned'")
    pts_all = trace.points
    n0 = len(pts_all)
    tail = pts_all[n0 - max(1, int(round(n0 * tail_fraction))):]
    times = trace.times[n0 - len(tail):]
    n = len(tail)
    if n == 0:
        return LockingResult("unresolved", reason="empty trace")

    spread = float(np.max(np.linalg.norm(tail - tail.mean(axis=0), axis=1)))
    if spread <= single_point_tol:
        period = float(np.mean(np.diff(times))) if n > 1 else math.nan
        return LockingResult("locked", 1, 1, 1, period, (spread,), n)

    diam = float(pdist(tail).max())
    tol = rel_tol * diam if tol is None else tol
    lab = _clusters(tail, tol)
    q = int(lab.max())
    if q > q_max:
        return LockingResult("unresolved", q=q, n_points=n, reason=f"{q} clusters exceed q_max")
    if n < 5 * q:
        return LockingResult("unresolved", q=q, n_points=n, reason="fewer than 5 points per cluster")
    late = tail[n // 2:]
    if int(_clusters(late, tol).max()) != q:
        return LockingResult("unresolved", q=q, n_points=n, reason="cluster count not stable")

    centres = np.array([tail[lab == i + 1].mean(axis=0) for i in range(q)])
    radii = tuple(float(np.max(np.linalg.norm(tail[lab == i + 1] - centres[i], axis=1))) for i in range(q))
    c0 = centres.mean(axis=0)
    ang = np.arctan2(centres[:, 1] - c0[1], centres[:, 0] - c0[0])
    pos = np.empty(q, int)
    pos[np.argsort(ang, kind="stable")] = np.arange(q)
    seq = pos[lab - 1]
    steps = np.unique(np.diff(seq) % q)
    if steps.size != 1:
        return LockingResult("unresolved", q=q, cluster_radii=radii, n_points=n,
                             reason="visiting order has no constant stride")
    s = int(steps[0])
    if q > 1 and (s == 0 or math.gcd(s, q) != 1):
        return LockingResult("unresolved", q=q, cluster_radii=radii, n_points=n,
                             reason=f"stride {s} not coprime to {q}")
    if orientation == "ccw":
        pp = s
    elif orientation == "cw":
        pp = (q - s) % q
    else:
        pp = min(s, q - s)
    if q == 1:
        pp, s = 1, 1
    period = float(np.mean(np.diff(times))) * q if n > 1 else math.nan
    return LockingResult("locked", pp, q, s, period, radii, n)


@dataclass(frozen=True)
class SweepRecord:
    kappa1: float
    ordinates: Tuple[float, ...] = ()
    locking: Optional[LockingResult] = None
    amplitude: float = math.nan
    error: Optional[str] = None

    @property
    def locked_label(self) -> str:
        if self.locking is None:
            return "error"
        return self.locking.label()


def history_span(p: Parameters) -> float:
    try:
        return max_delay_bound(p) + 1.0
    except WellPosednessViolated:
        return 3.0 * p.a2


def _sweep_point(p: Parameters, history, t_end: float, skip: float,
                 opts: Optional[IntegrationOptions], detect_kw: dict):
    try:
        sol = integrate(p, history, t_end, opts)
    except TwoDelayError as exc:
        return SweepRecord(p.kappa1, error=f"{type(exc).__name__}: {exc}"), None
    try:
        tr = poincare_trace(p, sol, skip)
        res = detect_locking(tr, **detect_kw)
        ords = tuple(float(v) for v in tr.u_a1)
    except TooFewEvents as exc:
        res, ords = None, ()
        rec = SweepRecord(p.kappa1, (), None, amplitude_norm(sol, sol.t0 + skip),
                          f"TooFewEvents: {exc}")
        return rec, sol
    return SweepRecord(p.kappa1, ords, res, amplitude_norm(sol, sol.t0 + skip)), sol


def _sweep_worker(args):
    rec, _ = _sweep_point(*args)
    return rec


def sweep(template: Parameters, kappa1_values: Sequence[float], t_end: float = 2000.0,
          skip: float = DEFAULT_SKIP, warm_start: bool = True, history=0.1,
          opts: Optional[IntegrationOptions] = None, workers: int = 1,
          detect_kw: Optional[dict] = None) -> List[SweepRecord]:
    """Integrate at each κ1 (κ2 etc. from ``template``) and classify the trace.

    With ``warm_start`` each point starts from the final segment of the
    previous solution. Failures are stored in the record.
    """
    ks = [float(k) for k in kappa1_values]
    d = np.diff(ks)
    if len(ks) > 1 and not (np.all(d > 0) or np.all(d < 0)):
        raise ValueError("kappa1 grid must be strictly monotone")
    if t_end - skip < 0:
        raise ValueError("t_end must exceed skip")
    detect_kw = detect_kw or {}
    if not warm_start and workers > 1:
        jobs = [(template.with_kappa(kappa1=k), history, t_end, skip, opts, detect_kw) for k in ks]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_sweep_worker, jobs))
    out = []
    h = history
    for k in ks:
        p = template.with_kappa(kappa1=k)
        rec, sol = _sweep_point(p, h, t_end, skip, opts, detect_kw)
        out.append(rec)
        if warm_start and sol is not None:
            h = sol.tail_history(history_span(p))
    return out
