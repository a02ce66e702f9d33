"""Characteristic equation of the linearisation about u = 0.

    Δ(λ) = λ + γ + κ1 e^{-a1 λ} + κ2 e^{-a2 λ}

Hopf points (Δ(iω) = 0), continuation of Hopf curves in the (κ1, κ2)
plane, Hopf-Hopf points, eigenvalue sensitivities and the linear change of
parameters κ ↔ μ used by the unfolding.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import asdict, dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares

from .errors import (
    CharacteristicDegenerate,
    JacobianSingular,
    NoConvergence,
    RegularityViolated,
    SeedNotOnBranch,
    StepCollapse,
    StrongResonance,
)
from .model import Parameters

BRANCHES = ("H1", "H2", "H3", "Hu")

# (kappa1, kappa2, omega) at default parameters; H-branches start on
# kappa2 = 0, the upper curve Hu is seeded on kappa2 = 4.7 near its left end
BRANCH_SEEDS: Dict[str, Tuple[float, float, float]] = {
    "H1": (5.192225327690661, 0.0, 2.0968318610495156),
    "H2": (8.07125123195748, 0.0, 6.525534188813597),
    "H3": (12.150619716710972, 0.0, 11.183696146629051),
    "Hu": (0.4534176184779, 4.7, 1.5308157884394766),
}

DEFAULT_BOX = ((0.0, 14.0), (0.0, 4.75))


def char_fn(p: Parameters, lam: complex) -> complex:
    return lam + p.gamma + p.kappa1 * cmath.exp(-p.a1 * lam) + p.kappa2 * cmath.exp(-p.a2 * lam)


def char_fn_derivative(p: Parameters, lam: complex) -> complex:
    return 1.0 - p.a1 * p.kappa1 * cmath.exp(-p.a1 * lam) - p.a2 * p.kappa2 * cmath.exp(-p.a2 * lam)


def hopf_residual(p: Parameters, omega: float) -> complex:
    return char_fn(p, 1j * omega)


def char_root(p: Parameters, lam0: complex, tol: float = 1e-14, max_iter: int = 50) -> complex:
    """Newton iteration for a characteristic root near ``lam0``."""
    lam = complex(lam0)
    for _ in range(max_iter):
        d = char_fn_derivative(p, lam)
        if abs(d) < 1e-14:
            raise JacobianSingular(f"Δ'(λ) vanishes near λ={lam!r}")
        step = char_fn(p, lam) / d
        lam -= step
        if abs(step) <= tol * max(1.0, abs(lam)):
            return lam
    raise NoConvergence(f"characteristic root from {lam0!r} did not converge")


@dataclass(frozen=True)
class HopfPoint:
    kappa1: float
    kappa2: float
    omega: float
    branch_label: str = ""

    def residual(self, template: Parameters) -> float:
        return abs(hopf_residual(template.with_kappa(self.kappa1, self.kappa2), self.omega))


@dataclass(frozen=True)
class HopfHopfPoint:
    kappa1: float
    kappa2: float
    omega1: float
    omega2: float
    residual: float = 0.0

    def params(self, template: Parameters) -> Parameters:
        return template.with_kappa(self.kappa1, self.kappa2)

    def to_dict(self) -> dict:
        return asdict(self)


def hopf_kappa_of_omega(p: Parameters, omega: float) -> Tuple[float, float]:
    """The (κ1, κ2) for which iω is a root; the Hopf conditions are linear in κ."""
    c1, c2 = math.cos(p.a1 * omega), math.cos(p.a2 * omega)
    s1, s2 = math.sin(p.a1 * omega), math.sin(p.a2 * omega)
    det = c1 * s2 - c2 * s1
    if abs(det) < 1e-14:
        raise JacobianSingular(f"sin((a2-a1)ω) vanishes at ω={omega!r}")
    k1 = (-p.gamma * s2 - omega * c2) / det
    k2 = (c1 * omega + p.gamma * s1) / det
    return k1, k2


def solve_hopf(p: Parameters, seed: Tuple[float, float], free: str = "kappa1",
               max_iter: int = 50, tol: float = 1e-12, label: str = "") -> HopfPoint:
    """Newton on Re/Im of Δ(iω) for (κ_free, ω); the other κ stays as in ``p``."""
    if free not in ("kappa1", "kappa2"):
        raise ValueError("free must be 'kappa1' or 'kappa2'")
    k, w = float(seed[0]), float(seed[1])
    aj = p.a1 if free == "kappa1" else p.a2
    k_other = p.kappa2 if free == "kappa1" else p.kappa1

    def kappas(kf):
        return (kf, k_other) if free == "kappa1" else (k_other, kf)

    for it in range(max_iter):
        # iterates may leave κ ≥ 0, so no Parameters object inside the loop
        k1, k2 = kappas(k)
        lam = 1j * w
        e1, e2 = cmath.exp(-p.a1 * lam), cmath.exp(-p.a2 * lam)
        r = lam + p.gamma + k1 * e1 + k2 * e2
        dk = cmath.exp(-1j * aj * w)
        dw = 1j * (1.0 - p.a1 * k1 * e1 - p.a2 * k2 * e2)
        J = np.array([[dk.real, dw.real], [dk.imag, dw.imag]])
        if abs(np.linalg.det(J)) < 1e-14:
            raise JacobianSingular(f"singular Hopf Jacobian at κ={k!r}, ω={w!r}")
        dx = np.linalg.solve(J, [-r.real, -r.imag])
        k += dx[0]
        w += dx[1]
        if not (math.isfinite(k) and math.isfinite(w)):
            break
        if abs(dx[0]) + abs(dx[1]) < 1e-15 * max(1.0, abs(k), abs(w)):
            break
    if not (math.isfinite(k) and math.isfinite(w)) or w <= 0 or k < 0:
        raise NoConvergence(f"Hopf Newton from {seed!r} did not reach a point with ω > 0, κ ≥ 0")
    q = p.with_kappa(*kappas(k))
    if abs(hopf_residual(q, w)) > tol:
        raise NoConvergence(f"Hopf Newton from {seed!r} did not converge")
    return HopfPoint(q.kappa1, q.kappa2, float(w), label)


def _hopf_system(p: Parameters, x: np.ndarray):
    # raw floats rather than Parameters: κ may dip below 0 during correction
    k1, k2, w = x
    lam = 1j * w
    e1, e2 = cmath.exp(-p.a1 * lam), cmath.exp(-p.a2 * lam)
    r = lam + p.gamma + k1 * e1 + k2 * e2
    dw = 1j * (1 - p.a1 * k1 * e1 - p.a2 * k2 * e2)
    J = np.array([[e1.real, e2.real, dw.real], [e1.imag, e2.imag, dw.imag]])
    return np.array([r.real, r.imag]), J


def _tangent(J: np.ndarray, prev: Optional[np.ndarray]) -> np.ndarray:
    t = np.cross(J[0], J[1])
    n = np.linalg.norm(t)
    if n < 1e-14:
        raise JacobianSingular("Hopf curve tangent undefined")
    t /= n
    if prev is not None and np.dot(t, prev) < 0:
        t = -t
    return t


def _corrector(p, x_pred, t, max_iter=8, tol=1e-13):
    x = x_pred.copy()
    for it in range(1, max_iter + 1):
        r, J = _hopf_system(p, x)
        A = np.vstack([J, t])
        b = np.concatenate([-r, [-np.dot(t, x - x_pred)]])
        try:
            dx = np.linalg.solve(A, b)
        except np.linalg.LinAlgError:
            return None, it
        x = x + dx
        if np.linalg.norm(dx) < tol * max(1.0, np.linalg.norm(x)):
            r, _ = _hopf_system(p, x)
            if np.hypot(*r) < 1e-11:
                return x, it
    return None, max_iter


def _inside(x, box) -> bool:
    (l1, h1), (l2, h2) = box
    return l1 <= x[0] <= h1 and l2 <= x[1] <= h2 and x[2] > 0


def trace_hopf_curve(p: Parameters, branch: str, box=DEFAULT_BOX, step: float = 0.02,
                     seed: Optional[Tuple[float, float, float]] = None,
                     hmin: float = 1e-4, hmax: float = 0.1, max_points: int = 20000) -> List[HopfPoint]:
    """Pseudo-arclength continuation of one Hopf branch through the κ box.

    The branch is followed in both directions from its seed and returned in
    arclength order. ``step`` is the initial arclength increment.
    """
    if seed is None:
        if branch not in BRANCH_SEEDS:
            raise SeedNotOnBranch(f"no built-in seed for branch {branch!r}")
        seed = BRANCH_SEEDS[branch]
    k1, k2, w = seed
    x0 = np.array([k1, k2, w], float)
    # polish the seed with κ2 fixed
    try:
        hp = solve_hopf(p.with_kappa(kappa2=max(k2, 0.0)), (k1, w), free="kappa1")
    except (NoConvergence, JacobianSingular) as exc:
        raise SeedNotOnBranch(f"seed {seed!r} does not converge to a Hopf point") from exc
    if abs(hp.omega - w) > 0.5 or abs(hp.kappa1 - k1) > 1.0:
        raise SeedNotOnBranch(f"seed {seed!r} converged to a distant point")
    x0 = np.array([hp.kappa1, hp.kappa2, hp.omega])

    halves = []
    _, J0 = _hopf_system(p, x0)
    t0 = _tangent(J0, None)
    for sign in (1.0, -1.0):
        pts = []
        x, t = x0.copy(), sign * t0
        h = step
        while len(pts) < max_points:
            x_new, iters = _corrector(p, x + h * t, t)
            if x_new is None or np.linalg.norm(x_new - x) > 2 * h:
                h *= 0.5
                if h < 1e-10:
                    raise StepCollapse(f"Hopf continuation step collapsed at {x!r}")
                continue
            if not _inside(x_new, box):
                break
            _, J = _hopf_system(p, x_new)
            t = _tangent(J, t)
            x = x_new
            pts.append(x)
            if iters <= 3:
                h = min(hmax, h * 1.5)
            elif iters >= 6:
                h = max(hmin, h * 0.5)
            h = max(h, hmin)
        halves.append(pts)
    ordered = list(reversed(halves[1])) + [x0] + halves[0]
    return [HopfPoint(float(a), float(b), float(c), branch) for a, b, c in ordered]


def _seg_intersections(A: np.ndarray, B: np.ndarray):
    """All crossings of two polylines in the plane; returns (i, s, j, u)."""
    out = []
    for i in range(len(A) - 1):
        p0, p1 = A[i], A[i + 1]
        d = p1 - p0
        lo = np.minimum(p0, p1)
        hi = np.maximum(p0, p1)
        q0, q1 = B[:-1], B[1:]
        m = ((np.maximum(q0, q1) >= lo).all(axis=1) & (np.minimum(q0, q1) <= hi).all(axis=1))
        for j in np.nonzero(m)[0]:
            e = q1[j] - q0[j]
            den = d[0] * e[1] - d[1] * e[0]
            if abs(den) < 1e-300:
                continue
            w = q0[j] - p0
            s = (w[0] * e[1] - w[1] * e[0]) / den
            u = (w[0] * d[1] - w[1] * d[0]) / den
            if 0 <= s <= 1 and 0 <= u <= 1:
                out.append((i, s, int(j), u))
    return out


def detect_hopf_hopf(p: Parameters, curves: Dict[str, Sequence[HopfPoint]]) -> List[Tuple[str, str, HopfHopfPoint]]:
    """Crossings of traced Hopf curves, polished by :func:`find_hopf_hopf`."""
    labels = list(curves)
    found = []
    for a in range(len(labels)):
        for b in range(a + 1, len(labels)):
            A = np.array([[h.kappa1, h.kappa2, h.omega] for h in curves[labels[a]]])
            B = np.array([[h.kappa1, h.kappa2, h.omega] for h in curves[labels[b]]])
            if len(A) < 2 or len(B) < 2:
                continue
            for i, s, j, u in _seg_intersections(A[:, :2], B[:, :2]):
                xa = A[i] + s * (A[i + 1] - A[i])
                xb = B[j] + u * (B[j + 1] - B[j])
                try:
                    hh = find_hopf_hopf(p, (xa[0], xa[2], xa[1], xb[2]))
                except (NoConvergence, StrongResonance, JacobianSingular):
                    continue
                found.append((labels[a], labels[b], hh))
    return found


def _hh_residual(p: Parameters, x) -> np.ndarray:
    k1, w1, k2, w2 = x
    r = []
    for w in (w1, w2):
        lam = 1j * w
        v = lam + p.gamma + k1 * cmath.exp(-p.a1 * lam) + k2 * cmath.exp(-p.a2 * lam)
        r += [v.real, v.imag]
    return np.array(r)


def _hh_jacobian(p: Parameters, x) -> np.ndarray:
    k1, w1, k2, w2 = x
    J = np.zeros((4, 4))
    for w, row, col in ((w1, 0, 1), (w2, 2, 3)):
        e1, e2 = cmath.exp(-1j * p.a1 * w), cmath.exp(-1j * p.a2 * w)
        dw = 1j * (1 - p.a1 * k1 * e1 - p.a2 * k2 * e2)
        J[row:row + 2, 0] = [e1.real, e1.imag]
        J[row:row + 2, 2] = [e2.real, e2.imag]
        J[row:row + 2, col] = [dw.real, dw.imag]
    return J


def strong_resonance_margin(omega1: float, omega2: float, order: int = 5) -> float:
    """min |k ω1 - l ω2| over k, l ≥ 1 with k + l ≤ order."""
    return min(abs(k * omega1 - l * omega2)
               for k in range(1, order) for l in range(1, order) if k + l <= order)


def find_hopf_hopf(p: Parameters, seed: Tuple[float, float, float, float],
                   tol: float = 1e-13, max_iter: int = 50,
                   resonance_tol: float = 1e-8) -> HopfHopfPoint:
    """Solve Δ(iω1) = Δ(iω2) = 0 for (κ1, ω1, κ2, ω2); seed has that order."""
    x = np.array(seed, float)
    if abs(x[1] - x[3]) < 1e-8:
        raise NoConvergence("seed frequencies must be distinct")
    best = None
    for _ in range(max_iter):
        F = _hh_residual(p, x)
        nF = np.max(np.abs(F))
        if best is None or nF < best[0]:
            best = (nF, x.copy())
        J = _hh_jacobian(p, x)
        try:
            dx = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            break
        x = x + dx
        if not np.all(np.isfinite(x)):
            break
        if np.max(np.abs(dx)) < 1e-15 * max(1.0, np.max(np.abs(x))):
            F = _hh_residual(p, x)
            if np.max(np.abs(F)) < best[0]:
                best = (np.max(np.abs(F)), x.copy())
            break
    nF, x = best
    if nF >= tol:
        sol = least_squares(lambda v: _hh_residual(p, v), x, jac=lambda v: _hh_jacobian(p, v),
                            xtol=1e-15, ftol=1e-15, gtol=1e-15, method="lm")
        if np.max(np.abs(sol.fun)) < nF:
            x, nF = sol.x, float(np.max(np.abs(sol.fun)))
    if nF >= tol:
        raise NoConvergence(f"Hopf-Hopf Newton from {seed!r} stopped at residual {nF:.3e}")
    if min(x[1], x[3]) <= 0 or abs(x[1] - x[3]) < 1e-8:
        raise NoConvergence(f"Hopf-Hopf Newton from {seed!r} reached ω=({float(x[1])!r}, {float(x[3])!r}), "
                            "which is not a pair of distinct positive frequencies")
    k1, w1, k2, w2 = x
    if w2 > w1:
        w1, w2 = w2, w1
    if strong_resonance_margin(w1, w2) <= resonance_tol:
        raise StrongResonance(f"k ω1 ≈ l ω2 at ω=({w1!r}, {w2!r})")
    return HopfHopfPoint(float(k1), float(k2), float(w1), float(w2), float(nF))


def dlambda_dkappa(p: Parameters, lam: complex, j: int) -> complex:
    if j not in (1, 2):
        raise ValueError("j must be 1 or 2")
    den = char_fn_derivative(p, lam)
    if abs(den) < 1e-12:
        raise CharacteristicDegenerate(f"double characteristic root at λ={lam!r}")
    a = p.a1 if j == 1 else p.a2
    return -cmath.exp(-a * lam) / den


@dataclass(frozen=True)
class MuJacobian:
    J: np.ndarray
    Jinv: np.ndarray

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.J))


def mu_jacobian(p: Parameters, hh: HopfHopfPoint, swap: bool = False) -> MuJacobian:
    """J_ij = Re ∂λ/∂κ_j at λ = iω_i; ``swap`` exchanges the roles of ω1, ω2."""
    q = hh.params(p)
    ws = (hh.omega2, hh.omega1) if swap else (hh.omega1, hh.omega2)
    J = np.array([[dlambda_dkappa(q, 1j * w, j).real for j in (1, 2)] for w in ws])
    d = np.linalg.det(J)
    if abs(d) < 1e-12:
        raise RegularityViolated(f"det J = {d!r}")
    return MuJacobian(J, np.linalg.inv(J))


def map_mu_to_kappa(hh: HopfHopfPoint, J: MuJacobian, mu: Sequence[float]) -> Tuple[float, float]:
    dk = J.Jinv @ np.asarray(mu, float)
    return hh.kappa1 + float(dk[0]), hh.kappa2 + float(dk[1])


def map_kappa_to_mu(hh: HopfHopfPoint, J: MuJacobian, kappa: Sequence[float]) -> Tuple[float, float]:
    mu = J.J @ (np.asarray(kappa, float) - [hh.kappa1, hh.kappa2])
    return float(mu[0]), float(mu[1])


def imaginary_axis_roots(p: Parameters, omega_max: float = 30.0, n: int = 30001) -> List[float]:
    """Frequencies ω in (0, omega_max] with Δ(iω) = 0, found on a grid then polished.

    A bounded check only: the spectrum is infinite.
    """
    ws = np.linspace(1e-6, omega_max, n)
    vals = np.array([abs(hopf_residual(p, w)) for w in ws])
    out: List[float] = []
    for i in range(1, n - 1):
        if vals[i] <= vals[i - 1] and vals[i] <= vals[i + 1] and vals[i] < 0.5:
            try:
                lam = char_root(p, 1j * ws[i])
            except (NoConvergence, JacobianSingular):
                continue
            if abs(lam.real) < 1e-9 and lam.imag > 0 and all(abs(lam.imag - o) > 1e-7 for o in out):
                out.append(lam.imag)
    return sorted(out)
