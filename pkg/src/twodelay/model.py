"""The scalar DDE with two linearly state-dependent delays.

    u'(t) = -gamma u(t) - kappa1 u(t - a1 - c u(t)) - kappa2 u(t - a2 - c u(t))

plus the constant-delay difference operator ``L``, its square, and the cubic
constant-delay truncation of the right-hand side that the normal-form
computation is based on.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Callable, Optional

from .errors import (
    DegenerateStateDependence,
    DelayAdvanced,
    HistoryOutOfRange,
    WellPosednessViolated,
)

PARAM_KEYS = ("gamma", "kappa1", "kappa2", "a1", "a2", "c")


@dataclass(frozen=True)
class Parameters:
    gamma: float = 4.75
    kappa1: float = 0.0
    kappa2: float = 0.0
    a1: float = 1.3
    a2: float = 6.0
    c: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v):
                raise ValueError(f"{f.name} must be finite, got {v!r}")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.kappa1 < 0 or self.kappa2 < 0:
            raise ValueError("feedback strengths must be non-negative")
        if self.a1 <= 0 or self.a2 <= self.a1:
            raise ValueError("need 0 < a1 < a2")
        if self.c < 0:
            raise ValueError("c must be non-negative")

    def with_kappa(self, kappa1: Optional[float] = None, kappa2: Optional[float] = None) -> "Parameters":
        return replace(
            self,
            kappa1=self.kappa1 if kappa1 is None else float(kappa1),
            kappa2=self.kappa2 if kappa2 is None else float(kappa2),
        )

    @property
    def well_posed(self) -> bool:
        return self.gamma > self.kappa2

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Parameters":
        unknown = set(d) - set(PARAM_KEYS)
        if unknown:
            raise ValueError(f"unknown parameter keys: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in d.items()})


def parse_parameter_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in PARAM_KEYS:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        out[key] = float(value)
    return out


def load_parameters(path, base: Optional[Parameters] = None) -> Parameters:
    values = (base or Parameters()).to_dict()
    values.update(parse_parameter_text(Path(path).read_text()))
    return Parameters.from_dict(values)


def dump_parameters(p: Parameters) -> str:
    lines = ["# twodelay parameter file"]
    lines += [f"{k} = {getattr(p, k)!r}" for k in PARAM_KEYS]
    return "\n".join(lines) + "\n"


class HistoryLookup:
    """Evaluate u on a closed interval, refusing to extrapolate.

    ``fn`` maps a time to u; ``deriv`` (optional) maps a time to u'.
    """

    def __init__(self, fn: Callable[[float], float], lo: float, hi: float,
                 deriv: Optional[Callable[[float], float]] = None):
        if not lo <= hi:
            raise ValueError("empty interval")
        self.fn = fn
        self.deriv = deriv
        self.lo = float(lo)
        self.hi = float(hi)

    @property
    def interval(self) -> tuple[float, float]:
        return self.lo, self.hi

    def _check(self, t: float):
        # one ulp-scale slack so that t - a_i computed in floating point
        # at the interval edge is not rejected
        slack = 4e-15 * max(1.0, abs(self.lo), abs(self.hi))
        if not (self.lo - slack <= t <= self.hi + slack):
            raise HistoryOutOfRange(f"t={t!r} outside [{self.lo!r}, {self.hi!r}]")

    def __call__(self, t: float) -> float:
        self._check(t)
        return self.fn(t)

    def derivative(self, t: float) -> float:
        if self.deriv is None:
            raise NotImplementedError("history has no derivative")
        self._check(t)
        return self.deriv(t)


def delay_arguments(p: Parameters, t: float, u_now: float) -> tuple[float, float]:
    return t - p.a1 - p.c * u_now, t - p.a2 - p.c * u_now


def evaluate_rhs(p: Parameters, h, t: float) -> float:
    """Right-hand side of the state-dependent DDE at time ``t``."""
    u = h(t)
    al1, al2 = delay_arguments(p, t, u)
    if al1 > t or al2 > t:
        raise DelayAdvanced(f"advanced delay at t={t!r}: u={u!r}")
    return -p.gamma * u - p.kappa1 * h(al1) - p.kappa2 * h(al2)


def difference_L(p: Parameters, h, t: float) -> float:
    return -p.gamma * h(t) - p.kappa1 * h(t - p.a1) - p.kappa2 * h(t - p.a2)


def difference_L2(p: Parameters, h, t: float) -> float:
    """L applied twice, expanded into constant-delay point evaluations."""
    g, k, a = p.gamma, (p.kappa1, p.kappa2), (p.a1, p.a2)
    total = g * g * h(t)
    for j in range(2):
        total += 2.0 * g * k[j] * h(t - a[j])
    for j in range(2):
        for m in range(2):
            total += k[j] * k[m] * h(t - a[j] - a[m])
    return total


def rhs_cubic_truncation(p: Parameters, h, t: float) -> float:
    """Third-order constant-delay expansion of the right-hand side.

    Only delays ``m*a1 + n*a2`` with ``1 <= m + n <= 3`` are queried.
    """
    g, c = p.gamma, p.c
    k, a = (p.kappa1, p.kappa2), (p.a1, p.a2)
    u0 = h(t)
    lin = -g * u0 - k[0] * h(t - a[0]) - k[1] * h(t - a[1])
    if c == 0.0:
        return lin

    quad = 0.0
    cub = 0.0
    for i in range(2):
        ui = h(t - a[i])
        inner = g * ui
        for j in range(2):
            inner += k[j] * h(t - a[i] - a[j])
        quad -= k[i] * c * u0 * inner
        for j in range(2):
            uij = h(t - a[i] - a[j])
            inner = g * uij
            for m in range(2):
                inner += k[m] * h(t - a[i] - a[j] - a[m])
            cub -= k[i] * k[j] * c * c * u0 * ui * inner
        l2 = g * g * ui
        for j in range(2):
            l2 += 2.0 * g * k[j] * h(t - a[i] - a[j])
            for m in range(2):
                l2 += k[j] * k[m] * h(t - a[i] - a[j] - a[m])
        cub -= 0.5 * (c * u0) ** 2 * k[i] * l2
    return lin + quad + cub


def max_delay_bound(p: Parameters) -> float:
    if not p.well_posed:
        raise WellPosednessViolated(f"need gamma > kappa2, got {p.gamma} <= {p.kappa2}")
    return p.a2 + p.a1 / p.gamma * (p.kappa1 + p.kappa2)


def solution_bound_interval(p: Parameters) -> tuple[float, float]:
    """Open interval that solutions with compliant initial data never leave."""
    if not p.well_posed:
        raise WellPosednessViolated(f"need gamma > kappa2, got {p.gamma} <= {p.kappa2}")
    if p.c == 0.0:
        raise DegenerateStateDependence("c = 0: the solution bound is unbounded")
    return -p.a1 / p.c, p.a1 / (p.gamma * p.c) * (p.kappa1 + p.kappa2)
