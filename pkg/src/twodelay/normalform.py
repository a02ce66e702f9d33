"""Hopf-Hopf normal form of the cubic constant-delay truncation.

Pipeline: eigenbasis and adjoint normalisation under the bilinear form,
multilinear forms F2/F3 of the nonlinearity, quadratic centre-manifold flow
coefficients, the six quadratic graph coefficients w_m, the cubic flow
coefficients, Kuznetsov's G coefficients and finally the amplitude
parameters ϑ = p12/p22, δ = p21/p11.

Basis order throughout is (q1, conj q1, q2, conj q2) and a multi-index
m = (l, s, r, k) counts how often each basis element occurs.
"""
from __future__ import annotations

import cmath
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .errors import (
    CharacteristicDegenerate,
    DegenerateCubic,
    NormalizationDegenerate,
    RegularityViolated,
    ResonantDenominator,
    StrongResonance,
    WrongCase,
)
from .expsum import ExpSum
from .model import Parameters
from .spectral import (
    HopfHopfPoint,
    MuJacobian,
    char_fn,
    map_mu_to_kappa,
    mu_jacobian,
    strong_resonance_margin,
)

Multi = Tuple[int, int, int, int]

QUAD_INDICES: Tuple[Multi, ...] = (
    (2, 0, 0, 0), (0, 2, 0, 0), (1, 1, 0, 0), (0, 0, 2, 0), (0, 0, 0, 2),
    (0, 0, 1, 1), (1, 0, 1, 0), (0, 1, 0, 1), (1, 0, 0, 1), (0, 1, 1, 0),
)
W_INDICES: Tuple[Multi, ...] = (
    (2, 0, 0, 0), (1, 1, 0, 0), (1, 0, 1, 0), (1, 0, 0, 1), (0, 0, 2, 0), (0, 0, 1, 1),
)
CUBIC_INDICES: Tuple[Multi, ...] = ((2, 1, 0, 0), (1, 0, 1, 1), (1, 1, 1, 0), (0, 0, 2, 1))


def mstr(m: Multi) -> str:
    return "".join(str(i) for i in m)


def parse_m(s: str) -> Multi:
    if len(s) != 4 or not s.isdigit():
        raise ValueError(f"bad multi-index {s!r}")
    return tuple(int(ch) for ch in s)  # type: ignore[return-value]


def mfact(m: Multi) -> int:
    return math.prod(math.factorial(i) for i in m)


def conj_index(m: Multi) -> Multi:
    """Index of the complex-conjugate monomial: (l, s, r, k) -> (s, l, k, r)."""
    return (m[1], m[0], m[3], m[2])


def swap_index(m: Multi) -> Multi:
    """Relabel under ω1 <-> ω2: (l, s, r, k) -> (r, k, l, s)."""
    return (m[2], m[3], m[0], m[1])


def _multi_of(*ids: int) -> Multi:
    m = [0, 0, 0, 0]
    for i in ids:
        m[i] += 1
    return tuple(m)  # type: ignore[return-value]


# ---------------------------------------------------------------- bilinear form

def _segment_integral(rate: complex, a: float) -> complex:
    """∫_{-a}^0 e^{rate s} ds."""
    if abs(rate) < 1e-12:
        return complex(a)
    return (1.0 - cmath.exp(-rate * a)) / rate


def bilinear(p: Parameters, psi: ExpSum, phi: ExpSum) -> complex:
    """⟨ψ, φ⟩ = conj ψ(0) φ(0) - Σ_j κ_j ∫_{-a_j}^0 conj ψ(s + a_j) φ(s) ds."""
    total = complex(np.conj(psi(0.0))) * phi(0.0)
    for kap, a in ((p.kappa1, p.a1), (p.kappa2, p.a2)):
        if kap == 0.0:
            continue
        for rp, cp in psi:
            rb, cb = rp.conjugate(), cp.conjugate()
            shift = cb * cmath.exp(rb * a)
            for rf, cf in phi:
                total -= kap * shift * cf * _segment_integral(rb + rf, a)
    return total


# ----------------------------------------------------------------- eigenbasis

@dataclass(frozen=True)
class EigBasis:
    omega1: float
    omega2: float
    q1: ExpSum
    q2: ExpSum
    p1: ExpSum
    p2: ExpSum
    D1: complex
    D2: complex

    @property
    def phi(self) -> Tuple[ExpSum, ExpSum, ExpSum, ExpSum]:
        return (self.q1, self.q1.conj(), self.q2, self.q2.conj())

    @property
    def D(self) -> Tuple[complex, complex]:
        return (self.D1, self.D2)


def normalization_constant(p: Parameters, omega: float) -> complex:
    """D = 1 / conj ⟨e^{iω·}, e^{iω·}⟩, so that ⟨D e^{iω·}, e^{iω·}⟩ = 1."""
    e = ExpSum.exp(1j * omega)
    b = bilinear(p, e, e)
    if abs(b) < 1e-12:
        raise NormalizationDegenerate(f"⟨q, q⟩ = {b!r} at ω={omega!r}")
    return 1.0 / b.conjugate()


def normalization_closed_form(p: Parameters, omega: float) -> complex:
    """The same constant written out: 1/conj(1 - Σ κ_j a_j e^{-iω a_j})."""
    s = 1.0 - p.kappa1 * p.a1 * cmath.exp(-1j * omega * p.a1) - p.kappa2 * p.a2 * cmath.exp(-1j * omega * p.a2)
    return 1.0 / s.conjugate()


def build_basis(p: Parameters, hh: HopfHopfPoint, swap: bool = False) -> EigBasis:
    w1, w2 = (hh.omega2, hh.omega1) if swap else (hh.omega1, hh.omega2)
    q = hh.params(p)
    D1 = normalization_constant(q, w1)
    D2 = normalization_constant(q, w2)
    return EigBasis(
        w1, w2,
        ExpSum.exp(1j * w1), ExpSum.exp(1j * w2),
        ExpSum.exp(1j * w1, D1), ExpSum.exp(1j * w2, D2),
        D1, D2,
    )


# --------------------------------------------------------------- nonlinearity

def full_nonlinearity(p: Parameters, phi: Callable[[complex], complex]) -> complex:
    """𝓕(φ) = F(φ) - Lφ = -Σ κ_j [φ(-a_j - c φ(0)) - φ(-a_j)].

    ``phi`` may be complex valued (it is then continued analytically), which
    is what the directional-derivative checks of F2 and F3 rely on.
    """
    u0 = phi(0.0)
    return -sum(k * (phi(-a - p.c * u0) - phi(-a)) for k, a in ((p.kappa1, p.a1), (p.kappa2, p.a2)))


def F2(p: Parameters, n1: ExpSum, n2: ExpSum) -> complex:
    d1, d2 = n1.derivative(), n2.derivative()
    u1, u2 = n1(0.0), n2(0.0)
    return sum(k * p.c * (u1 * d2(-a) + u2 * d1(-a)) for k, a in ((p.kappa1, p.a1), (p.kappa2, p.a2)))


def F3(p: Parameters, n1: ExpSum, n2: ExpSum, n3: ExpSum) -> complex:
    """Third derivative of 𝓕 at 0: one term per choice of the twice-differentiated slot."""
    total = 0j
    for A, B, C in ((n1, n2, n3), (n1, n3, n2), (n2, n3, n1)):
        dd = C.derivative(2)
        total -= p.c ** 2 * A(0.0) * B(0.0) * (p.kappa1 * dd(-p.a1) + p.kappa2 * dd(-p.a2))
    return total


def F2_difference(p: Parameters, n1: ExpSum, n2: ExpSum) -> complex:
    """F2 of the truncated constant-delay equation, with Lν in place of ν'."""
    l1, l2 = n1.apply_L(p), n2.apply_L(p)
    u1, u2 = n1(0.0), n2(0.0)
    return sum(k * p.c * (u1 * l2(-a) + u2 * l1(-a)) for k, a in ((p.kappa1, p.a1), (p.kappa2, p.a2)))


def F3_difference(p: Parameters, n1: ExpSum, n2: ExpSum, n3: ExpSum) -> complex:
    """Symmetrised third derivative of the cubic terms of the truncated equation."""
    ks = ((p.kappa1, p.a1), (p.kappa2, p.a2))
    c2 = p.c ** 2

    def cub(A, B, C):
        lc = C.apply_L(p)
        llc = lc.apply_L(p)
        t = 0j
        for ki, ai in ks:
            for kj, aj in ks:
                t += ki * kj * c2 * A(0.0) * B(-ai) * lc(-ai - aj)
            t -= 0.5 * c2 * A(0.0) * B(0.0) * ki * llc(-ai)
        return t

    return sum(cub(*perm) for perm in itertools.permutations((n1, n2, n3)))


ROUTES = {
    "derivative": (F2, F3),
    "difference": (F2_difference, F3_difference),
}


# ---------------------------------------------------------- quadratic terms

@dataclass(frozen=True)
class QuadraticCoeffs:
    """g^j_m for j = 0, 1 (first and second Hopf pair) and |m| = 2."""
    g: Tuple[Dict[Multi, complex], Dict[Multi, complex]]

    def __call__(self, j: int, m) -> complex:
        if isinstance(m, str):
            m = parse_m(m)
        return self.g[j][m]


def quadratic_g(p: Parameters, basis: EigBasis, route: str = "derivative") -> QuadraticCoeffs:
    f2 = ROUTES[route][0]
    phi = basis.phi
    out = ({}, {})
    for a, b in itertools.combinations_with_replacement(range(4), 2):
        m = _multi_of(a, b)
        v = f2(p, phi[a], phi[b])
        for j, D in enumerate(basis.D):
            out[j][m] = D.conjugate() * v
    return QuadraticCoeffs(out)


def quadratic_g_closed_form(p: Parameters, basis: EigBasis) -> QuadraticCoeffs:
    """The same coefficients from their hand-simplified expressions."""
    w1, w2, g, c = basis.omega1, basis.omega2, p.gamma, p.c
    raw = {
        (2, 0, 0, 0): 2 * c * 1j * w1 * (-g - 1j * w1),
        # conjugate of the (2,0,0,0) value
        (0, 2, 0, 0): 2 * c * (-1j * w1) * (-g + 1j * w1),
        (1, 1, 0, 0): 2 * c * w1 ** 2,
        (0, 0, 2, 0): 2 * c * 1j * w2 * (-g - 1j * w2),
        (0, 0, 0, 2): -2 * c * 1j * w2 * (-g + 1j * w2),
        (0, 0, 1, 1): 2 * c * w2 ** 2,
        (1, 0, 1, 0): c * (w1 ** 2 + w2 ** 2 - 1j * g * (w1 + w2)),
        (0, 1, 0, 1): c * (w1 ** 2 + w2 ** 2 + 1j * g * (w1 + w2)),
        (1, 0, 0, 1): c * (w1 ** 2 + w2 ** 2 - 1j * g * (w1 - w2)),
        (0, 1, 1, 0): c * (w1 ** 2 + w2 ** 2 + 1j * g * (w1 - w2)),
    }
    return QuadraticCoeffs(tuple({m: D.conjugate() * v for m, v in raw.items()} for D in basis.D))


def F3_closed_forms(p: Parameters, basis: EigBasis) -> Dict[Multi, complex]:
    w1, w2, g, c = basis.omega1, basis.omega2, p.gamma, p.c
    return {
        (2, 1, 0, 0): -c * c * w1 ** 2 * (3 * g + 1j * w1),
        (0, 0, 2, 1): -c * c * w2 ** 2 * (3 * g + 1j * w2),
        (1, 1, 1, 0): -c * c * (g * (2 * w1 ** 2 + w2 ** 2) + 1j * w2 ** 3),
        (1, 0, 1, 1): -c * c * (g * (w1 ** 2 + 2 * w2 ** 2) + 1j * w1 ** 3),
    }


# -------------------------------------------------------- quadratic manifold

@dataclass(frozen=True)
class WCoeffs:
    """Graph coefficients w_m(θ) and their integration constants E_m."""
    w: Dict[Multi, ExpSum]
    E: Dict[Multi, complex]
    nu: Dict[Multi, complex]
    forcing: Dict[Multi, ExpSum]
    F2_pair: Dict[Multi, complex]

    def __getitem__(self, m) -> ExpSum:
        if isinstance(m, str):
            m = parse_m(m)
        if m not in self.w and conj_index(m) in self.w:
            return self.w[conj_index(m)].conj()
        return self.w[m]


def _pair_of(m: Multi) -> Tuple[int, int]:
    ids = [i for i in range(4) for _ in range(m[i])]
    return ids[0], ids[1]


def w_coefficients(p: Parameters, basis: EigBasis, qg: QuadraticCoeffs,
                   route: str = "derivative", indices=None, tol: float = 1e-10) -> WCoeffs:
    f2 = ROUTES[route][0]
    phi = basis.phi
    rates = (1j * basis.omega1, -1j * basis.omega1, 1j * basis.omega2, -1j * basis.omega2)
    indices = indices or tuple(m for m in QUAD_INDICES)
    ws, Es, nus, forcing, pairs = {}, {}, {}, {}, {}
    for m in indices:
        nu = sum(mi * r for mi, r in zip(m, rates))
        mt = conj_index(m)
        terms = (
            (qg(0, m), rates[0]),
            (qg(0, mt).conjugate(), rates[1]),
            (qg(1, m), rates[2]),
            (qg(1, mt).conjugate(), rates[3]),
        )
        w = ExpSum()
        for b, rho in terms:
            if abs(rho - nu) < tol:
                raise ResonantDenominator(f"rate {rho!r} resonates with ν_{mstr(m)}")
            w = w + ExpSum.exp(rho, b / (rho - nu))
        a, b = _pair_of(m)
        F = f2(p, phi[a], phi[b])
        delta = char_fn(p, nu)
        if abs(delta) < tol:
            raise ResonantDenominator(f"Δ(ν_{mstr(m)}) = {delta!r}")
        E = F / delta
        ws[m] = w + ExpSum.exp(nu, E)
        Es[m] = E
        nus[m] = nu
        forcing[m] = ExpSum((rho, b) for b, rho in terms)
        pairs[m] = F
    return WCoeffs(ws, Es, nus, forcing, pairs)


def w_residuals(p: Parameters, wc: WCoeffs, m: Multi, thetas=None) -> Tuple[float, float]:
    """(ODE residual max over θ, boundary residual) for one w_m."""
    w, nu, forcing = wc.w[m], wc.nu[m], wc.forcing[m]
    thetas = np.linspace(-3 * p.a2, 0.0, 20) if thetas is None else thetas
    lhs = w.derivative()(thetas) - nu * w(thetas) - forcing(thetas)
    ode = float(np.max(np.abs(lhs)))
    Lw = w.apply_L(p)(0.0)
    bnd = abs(Lw - nu * w(0.0) - forcing(0.0) + wc.F2_pair[m])
    return ode, bnd


# --------------------------------------------------------------- cubic terms

def cubic_g(p: Parameters, basis: EigBasis, qg: QuadraticCoeffs, wc: WCoeffs,
            route: str = "derivative", indices=CUBIC_INDICES) -> Tuple[Dict[Multi, complex], Dict[Multi, complex]]:
    """g^j_m for |m| = 3: m! times the z^m coefficient of F3(Φz)^3/6 + F2(Φz, w(z))."""
    f2, f3 = ROUTES[route]
    phi = basis.phi
    out = ({}, {})
    for m in indices:
        c3 = 0j
        seen = {}
        for trip in itertools.product(range(4), repeat=3):
            if _multi_of(*trip) != m:
                continue
            key = tuple(sorted(trip))
            if key not in seen:
                seen[key] = f3(p, *(phi[i] for i in key))
            c3 += seen[key] / 6.0
        c2 = 0j
        for a in range(4):
            mm = list(m)
            mm[a] -= 1
            if min(mm) < 0:
                continue
            mm = tuple(mm)
            c2 += f2(p, phi[a], wc[mm]) / mfact(mm)
        val = (c3 + c2) * mfact(m)
        for j, D in enumerate(basis.D):
            out[j][m] = D.conjugate() * val
    return out


# ------------------------------------------------------ Kuznetsov G and p_ij

@dataclass(frozen=True)
class GCoefficients:
    """G at μ = 0. ``reported`` drops the two purely imaginary trailing terms."""
    full: Dict[str, complex]
    reported: Dict[str, complex]


def G_coefficients(gt: Callable[[int, str], complex], omega1: float, omega2: float,
                   resonance_tol: float = 1e-8) -> GCoefficients:
    """``gt(j, 'lsrk')`` returns the scaled coefficient g/(l!s!r!k!) for j = 0, 1."""
    w1, w2 = omega1, omega2
    for d in (w1, w2, 2 * w1 + w2, 2 * w1 - w2, w1 + 2 * w2, w1 - 2 * w2, 3 * w1, 3 * w2):
        if abs(d) < resonance_tol:
            raise StrongResonance("vanishing frequency combination in G denominators")

    def G(j, s):
        return gt(j, s)

    def gb(j, s):
        return gt(j, s).conjugate()

    I = 1j
    main = {
        "G2100_1": (G(0, "2100") + I / w1 * G(0, "1100") * G(0, "2000")
                    + I / w2 * (G(0, "1010") * G(1, "1100") - G(0, "1001") * gb(1, "1100"))
                    - I / (2 * w1 + w2) * G(0, "0101") * gb(1, "0200")
                    - I / (2 * w1 - w2) * G(0, "0110") * G(1, "2000")),
        "G1011_1": (G(0, "1011") + I / w2 * (G(0, "1010") * G(1, "0011") - G(0, "1001") * gb(1, "0011"))
                    + I / w1 * (2 * G(0, "2000") * G(0, "0011") - G(0, "1100") * gb(0, "0011")
                                - G(1, "1010") * G(0, "0011") - G(0, "0011") * gb(1, "0110"))
                    - 2 * I / (w1 + 2 * w2) * G(0, "0002") * gb(1, "0101")
                    - 2 * I / (w1 - 2 * w2) * G(0, "0020") * G(1, "1001")),
        "G1110_2": (G(1, "1110") + I / w1 * (G(0, "1100") * G(1, "1010") - G(1, "0110") * gb(0, "1100"))
                    + I / w2 * (2 * G(1, "0020") * G(1, "1100") - G(1, "0011") * gb(1, "1100")
                                - G(0, "1010") * G(1, "1100") - G(1, "1100") * gb(0, "1001"))
                    - 2 * I / (2 * w1 + w2) * G(1, "0200") * gb(0, "0101")
                    + 2 * I / (2 * w1 - w2) * G(1, "2000") * G(0, "0110")),
        "G0021_2": (G(1, "0021") + I / w2 * G(1, "0011") * G(1, "0020")
                    + I / w1 * (G(1, "1010") * G(0, "0011") - G(1, "0110") * gb(0, "0011"))
                    - I / (2 * w2 + w1) * G(1, "0101") * gb(0, "0002")
                    - I / (2 * w2 - w1) * G(1, "1001") * G(0, "0020")),
    }
    tail = {
        "G2100_1": -I / w1 * abs(G(0, "1100")) ** 2 - 2 * I / (3 * w1) * abs(G(0, "0200")) ** 2,
        "G1011_1": -I / (2 * w1 - w2) * abs(G(0, "0110")) ** 2 - I / (2 * w1 + w2) * abs(G(0, "0101")) ** 2,
        "G1110_2": I / (w1 - 2 * w2) * abs(G(1, "1001")) ** 2 - I / (w1 + 2 * w2) * abs(G(1, "0101")) ** 2,
        "G0021_2": -I / w2 * abs(G(1, "0011")) ** 2 - 2 * I / (3 * w2) * abs(G(1, "0002")) ** 2,
    }
    full = {k: main[k] + tail[k] for k in main}
    return GCoefficients(full, main)


@dataclass(frozen=True)
class AmplitudeParameters:
    p11: float
    p12: float
    p21: float
    p22: float
    theta: float
    delta: float


def amplitude_parameters(G: Dict[str, complex], tol: float = 1e-12) -> AmplitudeParameters:
    p11, p12 = G["G2100_1"].real, G["G1011_1"].real
    p21, p22 = G["G1110_2"].real, G["G0021_2"].real
    if abs(p11) < tol or abs(p22) < tol:
        raise DegenerateCubic(f"p11={p11!r}, p22={p22!r}")
    return AmplitudeParameters(p11, p12, p21, p22, p12 / p22, p21 / p11)


# ----------------------------------------------------------- classification

SUBCASES = ("I", "II", "III", "IV", "V")


def classify(p11: float, p22: float, theta: float, delta: float, tol: float = 1e-12) -> str:
    """Kuznetsov's subcase of the simple case (p11 p22 > 0).

    Labels refer to the ordering ϑ ≥ δ; otherwise the roles are swapped first.
    Both p11, p22 > 0 is the time-reversed simple case and is labelled with
    a ``-reversed`` suffix.
    """
    if abs(p11) < tol or abs(p22) < tol:
        return "BoundaryDegenerate"
    if p11 * p22 < 0:
        return "DifficultCase"
    th, de = (theta, delta) if theta >= delta else (delta, theta)
    if min(abs(th), abs(de), abs(th * de - 1.0)) < tol:
        return "BoundaryDegenerate"
    if th > 0 and de > 0:
        label = "I" if th * de > 1 else "II"
    elif th > 0 > de:
        label = "III"
    else:
        label = "IV" if th * de < 1 else "V"
    return label if p11 < 0 else label + "-reversed"


# --------------------------------------------------------------- torus rays

@dataclass(frozen=True)
class TorusRay:
    name: str
    mu_direction: Tuple[float, float]
    kappa_direction: Tuple[float, float]
    anchor: Tuple[float, float]

    @property
    def mu_slope(self) -> float:
        """dμ2/dμ1 along the ray."""
        return self.mu_direction[1] / self.mu_direction[0]

    def kappa_at(self, s: float) -> Tuple[float, float]:
        return (self.anchor[0] + s * self.kappa_direction[0],
                self.anchor[1] + s * self.kappa_direction[1])

    def to_dict(self) -> dict:
        return {"name": self.name, "mu_direction": list(self.mu_direction),
                "kappa_direction": list(self.kappa_direction), "anchor": list(self.anchor)}


def torus_rays(hh: HopfHopfPoint, amp: AmplitudeParameters, J: MuJacobian,
               case_label: str) -> Tuple[TorusRay, TorusRay]:
    """T1: μ2 = δ μ1 with μ1 > 0; T2: μ1 = ϑ μ2 with μ2 > 0 (unit μ-directions)."""
    if case_label != "III":
        raise WrongCase(f"torus rays are implemented for case III, got {case_label!r}")
    rays = []
    for name, mu in (("T1", (1.0, amp.delta)), ("T2", (amp.theta, 1.0))):
        v = np.asarray(mu) / np.hypot(*mu)
        k = map_mu_to_kappa(hh, J, v)
        kd = (k[0] - hh.kappa1, k[1] - hh.kappa2)
        rays.append(TorusRay(name, (float(v[0]), float(v[1])), kd, (hh.kappa1, hh.kappa2)))
    return rays[0], rays[1]


# ------------------------------------------------------------ nondegeneracy

@dataclass(frozen=True)
class Condition:
    name: str
    passed: bool
    margin: float
    note: str = ""


def nondegeneracy_report(omega1: float, omega2: float, amp: Optional[AmplitudeParameters],
                         detJ: Optional[float], tol: float = 1e-12,
                         resonance_tol: float = 1e-8) -> Dict[str, Condition]:
    out = {}
    m0 = strong_resonance_margin(omega1, omega2)
    out["HH0"] = Condition("HH0", m0 > resonance_tol, m0, "min |k ω1 - l ω2|, k+l ≤ 5")
    if amp is not None:
        for name, v in (("HH1", amp.p11), ("HH2", amp.p12), ("HH3", amp.p21), ("HH4", amp.p22)):
            out[name] = Condition(name, abs(v) > tol, abs(v))
        d6 = amp.p11 * amp.p22 - amp.p12 * amp.p21
        out["HH6"] = Condition("HH6", abs(d6) > tol, abs(d6), "det(p_ij)")
    if detJ is not None:
        out["HH5"] = Condition("HH5", abs(detJ) > tol, abs(detJ), "det ∂μ/∂κ")
    return {k: out[k] for k in sorted(out)}


# ------------------------------------------------------------------ pipeline

def _cjson(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


@dataclass(frozen=True)
class NormalFormReport:
    hh: HopfHopfPoint
    omega1: float
    omega2: float
    gt: Dict[str, complex]
    G: Dict[str, complex]
    G_full: Dict[str, complex]
    amp: AmplitudeParameters
    nondegeneracy: Dict[str, Condition]
    case_label: str
    jacobian: Optional[MuJacobian]
    t1_ray: Optional[TorusRay]
    t2_ray: Optional[TorusRay]
    quadratic: QuadraticCoeffs = field(repr=False)
    cubic: Tuple[Dict[Multi, complex], Dict[Multi, complex]] = field(repr=False)
    w: WCoeffs = field(repr=False)
    basis: EigBasis = field(repr=False)

    @property
    def theta(self) -> float:
        return self.amp.theta

    @property
    def delta(self) -> float:
        return self.amp.delta

    def gtilde(self, j: int, m) -> complex:
        """Scaled coefficient for j in (0, 1) and any stored quadratic or cubic index."""
        if isinstance(m, str):
            m = parse_m(m)
        raw = self.quadratic(j, m) if sum(m) == 2 else self.cubic[j][m]
        return raw / mfact(m)

    def to_dict(self) -> dict:
        d = {
            "kappa1": self.hh.kappa1, "kappa2": self.hh.kappa2,
            "omega1": self.omega1, "omega2": self.omega2,
        }
        for k, v in self.gt.items():
            d[k] = _cjson(v)
        for k, v in self.G.items():
            d[k] = _cjson(v)
        for k, v in self.G_full.items():
            d[k + "_full"] = _cjson(v)
        a = self.amp
        d.update(p11=a.p11, p12=a.p12, p21=a.p21, p22=a.p22, theta=a.theta, delta=a.delta)
        d["case"] = self.case_label
        d["hh_flags"] = {k: {"passed": c.passed, "margin": c.margin} for k, c in self.nondegeneracy.items()}
        if self.jacobian is not None:
            d["mu_jacobian"] = self.jacobian.J.tolist()
        d["t1_ray"] = self.t1_ray.to_dict() if self.t1_ray else None
        d["t2_ray"] = self.t2_ray.to_dict() if self.t2_ray else None
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=_json_default)


def _json_default(o):
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    raise TypeError(type(o))


def normal_form(p: Parameters, hh: HopfHopfPoint, swap: bool = False,
                route: str = "derivative") -> NormalFormReport:
    """Full pipeline at a Hopf-Hopf point.

    ``swap`` exchanges the roles of the two frequencies; ``route`` picks the
    derivative form of F2/F3 or the one built from the difference operator.
    """
    q = hh.params(p)
    basis = build_basis(p, hh, swap=swap)
    w1, w2 = basis.omega1, basis.omega2
    qg = quadratic_g(q, basis, route)
    wc = w_coefficients(q, basis, qg, route)
    cub = cubic_g(q, basis, qg, wc, route)

    def gt(j, s):
        m = parse_m(s)
        raw = qg(j, m) if sum(m) == 2 else cub[j][m]
        return raw / mfact(m)

    Gc = G_coefficients(gt, w1, w2)
    amp = amplitude_parameters(Gc.reported)
    case = classify(amp.p11, amp.p22, amp.theta, amp.delta)
    try:
        J = mu_jacobian(p, hh, swap=swap)
        detJ = J.det
    except (RegularityViolated, CharacteristicDegenerate):  # reported through HH5
        J, detJ = None, 0.0
    flags = nondegeneracy_report(w1, w2, amp, detJ)
    t1 = t2 = None
    if case == "III" and J is not None:
        t1, t2 = torus_rays(hh, amp, J, case)
    gts = {
        "gt2100_1": gt(0, "2100"), "gt1011_1": gt(0, "1011"),
        "gt1110_2": gt(1, "1110"), "gt0021_2": gt(1, "0021"),
    }
    return NormalFormReport(hh, w1, w2, gts, Gc.reported, Gc.full, amp, flags, case,
                            J, t1, t2, qg, cub, wc, basis)
