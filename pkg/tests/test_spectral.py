import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twodelay.errors import (
    JacobianSingular,
    NoConvergence,
    RegularityViolated,
    SeedNotOnBranch,
    StrongResonance,
)
from twodelay.model import Parameters
from twodelay.spectral import (
    BRANCHES,
    HopfHopfPoint,
    char_fn,
    char_fn_derivative,
    char_root,
    detect_hopf_hopf,
    dlambda_dkappa,
    find_hopf_hopf,
    hopf_kappa_of_omega,
    hopf_residual,
    imaginary_axis_roots,
    map_kappa_to_mu,
    map_mu_to_kappa,
    mu_jacobian,
    solve_hopf,
    strong_resonance_margin,
    trace_hopf_curve,
)

HH1 = (2.080920227069894, 3.786800923405767, 2.487102830659818, 1.582152129599611)


@pytest.fixture(scope="module")
def curves():
    p = Parameters()
    return {b: trace_hopf_curve(p, b) for b in BRANCHES}


class TestCharFn:
    def test_zero_feedback_root(self):
        p = Parameters()
        assert char_fn(p, -p.gamma) == 0

    def test_conjugate_symmetry(self, rng):
        p = Parameters(kappa1=3.0, kappa2=2.0)
        for z in rng.normal(size=(1000, 2)) * [2, 10]:
            lam = complex(*z)
            assert abs(char_fn(p, lam.conjugate()) - char_fn(p, lam).conjugate()) <= 1e-14 * max(1, abs(char_fn(p, lam)))

    def test_hh1_roots(self):
        p = Parameters(kappa1=HH1[0], kappa2=HH1[1])
        assert abs(char_fn(p, 1j * HH1[2])) < 1e-12
        assert abs(char_fn(p, 1j * HH1[3])) < 1e-12
        assert abs(hopf_residual(p, HH1[2])) < 1e-12

    def test_imaginary_axis_scan_at_hh1(self):
        p = Parameters(kappa1=HH1[0], kappa2=HH1[1])
        roots = imaginary_axis_roots(p, omega_max=4.0, n=4001)
        assert len(roots) == 2
        assert roots[0] == pytest.approx(HH1[3], abs=1e-9) and roots[1] == pytest.approx(HH1[2], abs=1e-9)

    @given(st.floats(0.3, 12.0))
    def test_hopf_conditions_linear_in_kappa(self, w):
        p = Parameters()
        try:
            k1, k2 = hopf_kappa_of_omega(p, w)
        except JacobianSingular:
            return
        if min(k1, k2) < 0:
            return
        assert abs(hopf_residual(p.with_kappa(k1, k2), w)) <= 1e-11 * max(1, abs(k1), abs(k2), w)


class TestSolveHopf:
    def test_h1_anchor(self):
        h = solve_hopf(Parameters(kappa2=3.0), (3.2, 2.5))
        assert h.kappa1 == pytest.approx(3.2061, abs=1e-3)
        assert h.residual(Parameters()) < 1e-12

    def test_single_delay_reduction(self):
        h = solve_hopf(Parameters(), (5.0, 2.0))
        g, a1 = 4.75, 1.3
        assert g + h.kappa1 * math.cos(a1 * h.omega) == pytest.approx(0, abs=1e-12)
        assert h.omega == pytest.approx(h.kappa1 * math.sin(a1 * h.omega), abs=1e-12)

    def test_degenerate_seed(self):
        with pytest.raises((NoConvergence, JacobianSingular)):
            solve_hopf(Parameters(), (0.0, 0.0))

    def test_free_kappa2(self):
        h = solve_hopf(Parameters(kappa1=3.2061), (3.0, 2.5), free="kappa2")
        assert h.kappa2 == pytest.approx(3.0, abs=1e-3)

    def test_bad_free_name(self):
        with pytest.raises(ValueError):
            solve_hopf(Parameters(), (1, 1), free="gamma")


class TestTracing:
    def test_residuals(self, curves):
        p = Parameters()
        for pts in curves.values():
            assert len(pts) > 20
            assert max(h.residual(p) for h in pts) < 1e-10

    def test_h1_passes_anchor(self, curves):
        x = np.array([[h.kappa1, h.kappa2] for h in curves["H1"]])
        a, b = x[:-1], x[1:]
        t = np.clip(np.einsum("ij,ij->i", [3.2061, 3.0] - a, b - a) / np.einsum("ij,ij->i", b - a, b - a), 0, 1)
        d = np.min(np.linalg.norm(a + t[:, None] * (b - a) - [3.2061, 3.0], axis=1))
        assert d < 5e-3

    def test_hu_minimum(self, curves):
        assert min(h.kappa2 for h in curves["Hu"]) == pytest.approx(2.627, abs=5e-3)

    def test_hu_folds_in_kappa2(self, curves):
        k2 = np.array([h.kappa2 for h in curves["Hu"]])
        i = int(np.argmin(k2))
        assert 0 < i < len(k2) - 1

    def test_arclength_order(self, curves):
        for pts in curves.values():
            x = np.array([[h.kappa1, h.kappa2] for h in pts])
            assert np.max(np.linalg.norm(np.diff(x, axis=0), axis=1)) < 0.25

    def test_bad_seed(self):
        with pytest.raises(SeedNotOnBranch):
            trace_hopf_curve(Parameters(), "H1", seed=(0.0, 0.0, 0.0))
        with pytest.raises(SeedNotOnBranch):
            trace_hopf_curve(Parameters(), "H9")

    def test_detects_hh_points(self, curves, golden):
        found = detect_hopf_hopf(Parameters(), curves)
        pairs = {(a, b) for a, b, _ in found}
        assert {("H1", "Hu"), ("H2", "Hu"), ("H3", "Hu")} <= pairs
        for name in ("HH1", "HH2", "HH3"):
            g = golden[name]
            assert any(abs(hh.kappa1 - g["kappa1"]) < 1e-10 and abs(hh.kappa2 - g["kappa2"]) < 1e-10
                       for _, _, hh in found)


class TestHopfHopf:
    @pytest.mark.parametrize("name", ["HH1", "HH2", "HH3"])
    def test_golden(self, golden, name):
        g = golden[name]
        hh = find_hopf_hopf(Parameters(), g["seed"])
        for k in ("kappa1", "kappa2", "omega1", "omega2"):
            assert getattr(hh, k) == pytest.approx(g[k], rel=1e-12)
        assert hh.residual < 1e-13

    @pytest.mark.parametrize("name", ["HH1", "HH2", "HH3"])
    def test_seed_pair_swap(self, golden, name):
        k1, w1, k2, w2 = golden[name]["seed"]
        a = find_hopf_hopf(Parameters(), (k1, w1, k2, w2))
        b = find_hopf_hopf(Parameters(), (k1, w2, k2, w1))
        for k in ("kappa1", "kappa2", "omega1", "omega2"):
            assert getattr(a, k) == pytest.approx(getattr(b, k), rel=1e-12)

    def test_nonresonant(self, hh_points):
        for hh in hh_points.values():
            assert strong_resonance_margin(hh.omega1, hh.omega2) > 1e-3

    def test_equal_seed_frequencies(self):
        with pytest.raises(NoConvergence):
            find_hopf_hopf(Parameters(), (2.1, 2.0, 3.8, 2.0))

    def test_resonance_guard(self, hh_points):
        hh = hh_points["HH1"]
        with pytest.raises(StrongResonance):
            find_hopf_hopf(Parameters(), (hh.kappa1, hh.omega1, hh.kappa2, hh.omega2), resonance_tol=10.0)


class TestParameterDerivatives:
    def test_zero_feedback(self):
        p = Parameters()
        assert dlambda_dkappa(p, -p.gamma, 1) == pytest.approx(-math.exp(p.a1 * p.gamma), rel=1e-14)

    @pytest.mark.parametrize("j", [1, 2])
    def test_finite_difference(self, hh_points, j):
        hh = hh_points["HH1"]
        p = hh.params(Parameters())
        for w in (hh.omega1, hh.omega2):
            d = dlambda_dkappa(p, 1j * w, j)
            h = 1e-6
            kp = (p.kappa1 + h, p.kappa2) if j == 1 else (p.kappa1, p.kappa2 + h)
            km = (p.kappa1 - h, p.kappa2) if j == 1 else (p.kappa1, p.kappa2 - h)
            fd = (char_root(p.with_kappa(*kp), 1j * w) - char_root(p.with_kappa(*km), 1j * w)) / (2 * h)
            assert abs(fd - d) / abs(d) < 1e-5

    def test_invalid_index(self):
        with pytest.raises(ValueError):
            dlambda_dkappa(Parameters(), 1j, 3)

    def test_jacobian(self, hh_points):
        for hh in hh_points.values():
            J = mu_jacobian(Parameters(), hh)
            assert abs(J.det) > 1e-6
            S = mu_jacobian(Parameters(), hh, swap=True)
            assert np.array_equal(S.J, J.J[::-1])

    def test_jacobian_signs_follow_root_motion(self, hh_points):
        # increasing kappa_j moves Re(lambda) by J_ij to first order
        hh = hh_points["HH1"]
        p = hh.params(Parameters())
        J = mu_jacobian(Parameters(), hh).J
        for i, w in enumerate((hh.omega1, hh.omega2)):
            for j in range(2):
                dk = [0.0, 0.0]
                dk[j] = 1e-5
                lam = char_root(p.with_kappa(p.kappa1 + dk[0], p.kappa2 + dk[1]), 1j * w)
                assert np.sign(lam.real) == np.sign(J[i, j])

    def test_singular_jacobian(self):
        # on kappa = 0 both derivatives are real multiples; construct det 0 by a repeated frequency
        hh = HopfHopfPoint(1.0, 1.0, 2.0, 2.0)
        with pytest.raises(RegularityViolated):
            mu_jacobian(Parameters(), hh)

    def test_mu_kappa_maps(self, hh_points):
        hh = hh_points["HH2"]
        J = mu_jacobian(Parameters(), hh)
        assert map_mu_to_kappa(hh, J, (0.0, 0.0)) == (hh.kappa1, hh.kappa2)
        dk = np.array([1e-3, -2e-3])
        mu = J.J @ dk
        k = map_mu_to_kappa(hh, J, mu)
        assert np.allclose(np.array(k) - [hh.kappa1, hh.kappa2], dk, rtol=0, atol=1e-12)
        assert np.allclose(map_kappa_to_mu(hh, J, k), mu, atol=1e-12)

    def test_char_fn_derivative_matches_fd(self):
        p = Parameters(kappa1=2.0, kappa2=3.0)
        lam, h = 0.3 + 1.1j, 1e-6
        fd = (char_fn(p, lam + h) - char_fn(p, lam - h)) / (2 * h)
        assert abs(fd - char_fn_derivative(p, lam)) < 1e-8
