"""Adaptive time stepping for the state-dependent DDE.

The scheme is Zonneveld's explicit 4(3) pair (fourth-order propagation,
third-order error estimate) with a cubic Hermite continuous extension. Delayed
values are read from the growing dense solution. When a delayed argument
falls inside the step being taken, the step is repeated with the
interpolant of the tentative step until the end value stops moving.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.optimize import brentq

from .errors import (
    BoundViolated,
    DegenerateStateDependence,
    DelayAdvanced,
    HistoryTooShort,
    OutOfRange,
    StepCollapse,
    WellPosednessViolated,
)
from .model import Parameters, solution_bound_interval

# Zonneveld 4(3): c = (0, 1/2, 1/2, 1, 3/4)
RK_C = (0.0, 0.5, 0.5, 1.0, 0.75)
RK_A = (
    (),
    (0.5,),
    (0.0, 0.5),
    (0.0, 0.0, 1.0),
    (5 / 32, 7 / 32, 13 / 32, -1 / 32),
)
RK_B = (1 / 6, 1 / 3, 1 / 3, 1 / 6, 0.0)
RK_BHAT = (-1 / 2, 7 / 3, 7 / 3, 13 / 6, -16 / 3)
ERR_EXPONENT = 4  # local error of the embedded solution is O(h^4)


@dataclass(frozen=True)
class IntegrationOptions:
    atol: float = 1e-9
    rtol: float = 1e-7
    max_step: float = 0.05
    first_step: float = 1e-3
    bound_check: bool = True
    max_steps: int = 50_000_000
    min_step: float = 1e-10

    def __post_init__(self):
        if self.atol <= 0 or self.rtol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_step <= 0 or self.first_step <= 0:
            raise ValueError("step sizes must be positive")


class History:
    """Initial function on ``[-span, 0]`` (times relative to ``t0``)."""

    def __init__(self, fn: Callable[[float], float], span: float = math.inf,
                 deriv: Optional[Callable[[float], float]] = None, label: str = "function"):
        self.fn = fn
        self.span = float(span)
        self.deriv = deriv
        self.label = label

    @classmethod
    def constant(cls, value: float) -> "History":
        v = float(value)
        return cls(lambda s: v, math.inf, lambda s: 0.0, label=f"constant {v!r}")

    @classmethod
    def from_function(cls, fn, span: float, deriv=None) -> "History":
        return cls(fn, span, deriv)

    @classmethod
    def from_table(cls, times: Sequence[float], values: Sequence[float]) -> "History":
        """Linear interpolation through samples on ``[-span, 0]``."""
        ts = np.asarray(times, float)
        us = np.asarray(values, float)
        if ts.ndim != 1 or ts.shape != us.shape or ts.size < 2:
            raise ValueError("need two equally long 1-d sample arrays")
        if np.any(np.diff(ts) <= 0):
            raise ValueError("sample times must increase")
        if abs(ts[-1]) > 1e-12:
            raise ValueError("table must end at time 0")
        slopes = np.diff(us) / np.diff(ts)

        def fn(s):
            return float(np.interp(s, ts, us))

        def deriv(s):
            i = min(max(int(np.searchsorted(ts, s, side="right")) - 1, 0), slopes.size - 1)
            return float(slopes[i])

        return cls(fn, float(-ts[0]), deriv, label="table")

    def check_lipschitz(self, n: int = 401, bound: float = 1e6):
        span = min(self.span, 50.0)
        s = np.linspace(-span, 0.0, n)
        u = np.array([self.fn(x) for x in s])
        if not np.all(np.isfinite(u)):
            raise ValueError("history is not finite on its interval")
        q = np.abs(np.diff(u)) / np.diff(s)
        if np.max(q, initial=0.0) > bound:
            raise ValueError("history difference quotients exceed Lipschitz bound")


HistoryLike = Union[History, float, int]


def _as_history(h: HistoryLike) -> History:
    if isinstance(h, History):
        return h
    return History.constant(float(h))


def _hermite(t0, t1, y0, y1, f0, f1, t):
    h = t1 - t0
    s = (t - t0) / h
    s2 = s * s
    s3 = s2 * s
    return ((2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * f0
            + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * f1)


def _hermite_deriv(t0, t1, y0, y1, f0, f1, t):
    h = t1 - t0
    s = (t - t0) / h
    s2 = s * s
    return ((6 * s2 - 6 * s) * (y0 - y1) / h + (3 * s2 - 4 * s + 1) * f0
            + (3 * s2 - 2 * s) * f1)


class DenseSolution:
    """Piecewise cubic Hermite trajectory plus the initial history.

    Callable: ``sol(t)`` returns u(t) for any t in ``[t0 - span, t_end]``.
    """

    def __init__(self, params: Parameters, history: History, t0: float,
                 ts: Sequence[float], ys: Sequence[float], fs: Sequence[float]):
        self.params = params
        self.history = history
        self.t0 = float(t0)
        self.t = np.asarray(ts, float)
        self.y = np.asarray(ys, float)
        self.f = np.asarray(fs, float)
        self._tl = list(self.t)

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @property
    def interval(self) -> tuple[float, float]:
        return self.t0 - self.history.span, self.t_end

    def _locate(self, t: float) -> int:
        i = bisect_right(self._tl, t) - 1
        return min(i, len(self._tl) - 2)

    def _check(self, t: float):
        lo, hi = self.interval
        if not (lo <= t <= hi) or math.isnan(t):
            raise OutOfRange(f"t={t!r} outside covered interval [{lo!r}, {hi!r}]")

    def __call__(self, t: float) -> float:
        return self.evaluate(t)

    def evaluate(self, t: float) -> float:
        self._check(t)
        if t < self.t0:
            return self.history.fn(t - self.t0)
        if len(self._tl) == 1:
            return float(self.y[0])
        i = self._locate(t)
        tl = self._tl
        return _hermite(tl[i], tl[i + 1], self.y[i], self.y[i + 1], self.f[i], self.f[i + 1], t)

    def derivative(self, t: float) -> float:
        self._check(t)
        if t < self.t0:
            if self.history.deriv is None:
                raise NotImplementedError("history derivative unavailable")
            return self.history.deriv(t - self.t0)
        if len(self._tl) == 1:
            return float(self.f[0])
        i = self._locate(t)
        tl = self._tl
        return _hermite_deriv(tl[i], tl[i + 1], self.y[i], self.y[i + 1], self.f[i], self.f[i + 1], t)

    def sample(self, times) -> np.ndarray:
        """Vectorised evaluation on ``t >= t0``."""
        times = np.asarray(times, float)
        if times.size and (times.min() < self.t0 or times.max() > self.t_end):
            raise OutOfRange("sample times must lie in [t0, t_end]")
        i = np.clip(np.searchsorted(self.t, times, side="right") - 1, 0, len(self.t) - 2)
        t0, t1 = self.t[i], self.t[i + 1]
        return _hermite(t0, t1, self.y[i], self.y[i + 1], self.f[i], self.f[i + 1], times)

    def tail_history(self, span: float) -> History:
        """Final ``span`` time units as a new initial function (warm starts)."""
        t_end = self.t_end
        lo = t_end - span
        if lo < self.t0:
            raise OutOfRange(f"solution shorter than requested tail span {span!r}")
        # copy the covering pieces so the new history does not pin this solution
        i0 = max(int(np.searchsorted(self.t, lo, side="right")) - 1, 0)
        piece = DenseSolution(self.params, History.constant(float(self.y[i0])), float(self.t[i0] - t_end),
                              self.t[i0:] - t_end, self.y[i0:].copy(), self.f[i0:].copy())

        return History(piece.evaluate, span, piece.derivative, label="tail")


@dataclass(frozen=True)
class EventRecord:
    t: float
    u_a1: float
    u_a2: float
    du: float


class _Stepper:
    """Mutable integration state; one instance per ``integrate`` call."""

    def __init__(self, p: Parameters, hist: History, t0: float):
        self.p = p
        self.hist = hist
        self.t0 = t0
        self.ts = [t0]
        self.ys = []
        self.fs = []
        self.lo = t0 - hist.span
        # tentative interval used for arguments beyond the last accepted point
        self.trial = None
        self.overlap = False

    def lookup(self, s: float) -> float:
        ts = self.ts
        if s <= self.t0:
            if s < self.lo:
                raise HistoryTooShort(
                    f"delayed argument {s!r} precedes history start {self.lo!r}")
            return self.hist.fn(s - self.t0)
        if s <= ts[-1]:
            i = bisect_right(ts, s) - 1
            if i >= len(ts) - 1:
                i = len(ts) - 2
            return _hermite(ts[i], ts[i + 1], self.ys[i], self.ys[i + 1],
                            self.fs[i], self.fs[i + 1], s)
        self.overlap = True
        if self.trial is not None:
            return _hermite(*self.trial, s)
        # extrapolate the last accepted piece (first sweep only)
        if len(ts) >= 2:
            return _hermite(ts[-2], ts[-1], self.ys[-2], self.ys[-1], self.fs[-2], self.fs[-1], s)
        return self.ys[-1] + self.fs[-1] * (s - ts[-1])

    def rhs(self, t: float, y: float) -> float:
        p = self.p
        d1 = p.a1 + p.c * y
        d2 = p.a2 + p.c * y
        if d1 < 0.0 or d2 < 0.0:
            raise DelayAdvanced(f"advanced delay at t={t!r}, u={y!r}")
        return -p.gamma * y - p.kappa1 * self.lookup(t - d1) - p.kappa2 * self.lookup(t - d2)


def _step(st: _Stepper, t: float, y: float, f0: float, h: float):
    k = [f0, 0.0, 0.0, 0.0, 0.0]
    for i in range(1, 5):
        acc = y
        row = RK_A[i]
        for j in range(i):
            if row[j]:
                acc += h * row[j] * k[j]
        k[i] = st.rhs(t + RK_C[i] * h, acc)
    y4 = y + h * (k[0] * RK_B[0] + k[1] * RK_B[1] + k[2] * RK_B[2] + k[3] * RK_B[3])
    y3 = y + h * (k[0] * RK_BHAT[0] + k[1] * RK_BHAT[1] + k[2] * RK_BHAT[2]
                  + k[3] * RK_BHAT[3] + k[4] * RK_BHAT[4])
    return y4, y4 - y3


def integrate(p: Parameters, history: HistoryLike, t_end: float,
              opts: Optional[IntegrationOptions] = None, t0: float = 0.0) -> DenseSolution:
    """Integrate from ``t0`` to ``t_end`` starting from ``history``."""
    opts = opts or IntegrationOptions()
    hist = _as_history(history)
    if t_end < t0:
        raise ValueError("t_end must not precede t0")
    if not math.isinf(hist.span):
        hist.check_lipschitz()

    bounds = None
    if opts.bound_check:
        try:
            bounds = solution_bound_interval(p)
        except (WellPosednessViolated, DegenerateStateDependence):
            bounds = None

    st = _Stepper(p, hist, t0)
    y = float(hist.fn(0.0))
    st.ys.append(y)
    f = st.rhs(t0, y)
    st.fs.append(f)

    t = t0
    h = min(opts.first_step, opts.max_step)
    err_prev = 1.0
    tol_fp = None
    alpha, beta = 0.7 / ERR_EXPONENT, 0.4 / ERR_EXPONENT
    nsteps = 0
    while t < t_end:
        if nsteps >= opts.max_steps:
            raise StepCollapse(f"exceeded {opts.max_steps} steps at t={t!r}")
        last = False
        if t + h >= t_end or t_end - (t + h) < 1e-12 * max(1.0, abs(t_end)):
            h = t_end - t
            last = True
        st.trial = None
        st.overlap = False
        y_new, est = _step(st, t, y, f, h)
        f_new = st.rhs(t + h, y_new)
        if st.overlap:
            # fixed point on the tentative interpolant
            tol_fp = 0.1 * (opts.atol + opts.rtol * abs(y_new))
            for _ in range(10):
                st.trial = (t, t + h, y, y_new, f, f_new)
                y_it, est = _step(st, t, y, f, h)
                f_it = st.rhs(t + h, y_it)
                moved = abs(y_it - y_new)
                y_new, f_new = y_it, f_it
                if moved <= tol_fp:
                    break
            st.trial = None
        scale = opts.atol + opts.rtol * max(abs(y), abs(y_new))
        err = abs(est) / scale
        if err <= 1.0 or h <= opts.min_step:
            if h <= opts.min_step and err > 1.0:
                raise StepCollapse(f"step size fell below {opts.min_step} at t={t!r}")
            t = t_end if last else t + h
            y, f = y_new, f_new
            st.ts.append(t)
            st.ys.append(y)
            st.fs.append(f)
            nsteps += 1
            if bounds is not None and not (bounds[0] - 1e-6 < y < bounds[1] + 1e-6):
                raise BoundViolated(f"u={y!r} left {bounds} at t={t!r}")
            err = max(err, 1e-10)
            fac = 0.9 * err ** (-alpha) * err_prev ** beta
            fac = min(5.0, max(0.2, fac))
            err_prev = err
            h = min(opts.max_step, h * fac)
        else:
            fac = max(0.2, 0.9 * err ** (-1.0 / ERR_EXPONENT))
            h *= fac
            if h < opts.min_step:
                h = opts.min_step
    return DenseSolution(p, hist, t0, st.ts, st.ys, st.fs)


def find_events(sol: DenseSolution, skip: float = 0.0) -> list[EventRecord]:
    """Downward zero crossings of u after ``t0 + skip``."""
    p = sol.params
    t, y, fv = sol.t, sol.y, sol.f
    t_start = sol.t0 + skip
    out = []
    idx = np.nonzero((y[:-1] > 0.0) & (y[1:] <= 0.0) & (t[1:] > t_start))[0]
    for i in idx:
        ta, tb, ya, yb, fa, fb = t[i], t[i + 1], y[i], y[i + 1], fv[i], fv[i + 1]
        if yb == 0.0:
            ts = tb
        else:
            ts = brentq(lambda s: _hermite(ta, tb, ya, yb, fa, fb, s), ta, tb,
                        xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        if ts <= t_start:
            continue
        du = _hermite_deriv(ta, tb, ya, yb, fa, fb, ts)
        if du >= 0.0:
            continue
        out.append(EventRecord(float(ts), sol.evaluate(ts - p.a1), sol.evaluate(ts - p.a2), float(du)))
    return out
