"""Finite sums of complex exponentials, θ ↦ Σ c_k e^{ρ_k θ}.

Every operation the centre-manifold computation needs (evaluation,
differentiation, conjugation, the action of the difference operator) is
exact on this class, so no symbolic engine is required.
"""
from __future__ import annotations

import cmath
from typing import Iterable, Iterator, Tuple

import numpy as np

from .model import Parameters

MERGE_TOL = 1e-13


class ExpSum:
    """Immutable exponential sum. Terms with rates closer than ``MERGE_TOL`` merge."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Iterable[Tuple[complex, complex]] = ()):
        merged: list[list[complex]] = []
        for rate, coeff in terms:
            rate, coeff = complex(rate), complex(coeff)
            for t in merged:
                if abs(t[0] - rate) < MERGE_TOL:
                    t[1] += coeff
                    break
            else:
                merged.append([rate, coeff])
        self._terms = tuple((r, c) for r, c in merged)

    @classmethod
    def exp(cls, rate: complex, coeff: complex = 1.0) -> "ExpSum":
        return cls([(rate, coeff)])

    @property
    def terms(self) -> tuple:
        """Pairs ``(rate, coeff)``."""
        return self._terms

    def __iter__(self) -> Iterator[Tuple[complex, complex]]:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def coeff(self, rate: complex) -> complex:
        for r, c in self._terms:
            if abs(r - rate) < MERGE_TOL:
                return c
        return 0j

    def __call__(self, theta):
        if np.ndim(theta) == 0:
            return sum((c * cmath.exp(r * theta) for r, c in self._terms), 0j)
        th = np.asarray(theta, float)
        out = np.zeros(th.shape, complex)
        for r, c in self._terms:
            out += c * np.exp(r * th)
        return out

    def derivative(self, n: int = 1) -> "ExpSum":
        return ExpSum((r, c * r ** n) for r, c in self._terms)

    def conj(self) -> "ExpSum":
        return ExpSum((r.conjugate(), c.conjugate()) for r, c in self._terms)

    def apply_L(self, p: Parameters) -> "ExpSum":
        """Difference operator acting in the shift variable: θ ↦ (Lφ)(θ)."""
        return ExpSum(
            (r, c * (-p.gamma - p.kappa1 * cmath.exp(-r * p.a1) - p.kappa2 * cmath.exp(-r * p.a2)))
            for r, c in self._terms)

    def __add__(self, other: "ExpSum") -> "ExpSum":
        return ExpSum(self._terms + other._terms)

    def __sub__(self, other: "ExpSum") -> "ExpSum":
        return self + other * -1.0

    def __mul__(self, other):
        if isinstance(other, ExpSum):
            return ExpSum((r1 + r2, c1 * c2) for r1, c1 in self._terms for r2, c2 in other._terms)
        k = complex(other)
        return ExpSum((r, c * k) for r, c in self._terms)

    __rmul__ = __mul__

    def __neg__(self) -> "ExpSum":
        return self * -1.0

    def max_abs_coeff(self) -> float:
        return max((abs(c) for _, c in self._terms), default=0.0)

    def __repr__(self) -> str:
        body = " + ".join(f"({c:.6g})e^({r:.6g}θ)" for r, c in self._terms)
        return f"ExpSum[{body or '0'}]"
