import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twodelay.errors import (
    DegenerateStateDependence,
    DelayAdvanced,
    HistoryOutOfRange,
    WellPosednessViolated,
)
from twodelay.model import (
    HistoryLookup,
    Parameters,
    delay_arguments,
    difference_L,
    difference_L2,
    dump_parameters,
    evaluate_rhs,
    load_parameters,
    max_delay_bound,
    parse_parameter_text,
    rhs_cubic_truncation,
    solution_bound_interval,
)
from twodelay.spectral import char_fn


def lookup(fn, lo=-40.0, hi=5.0):
    return HistoryLookup(fn, lo, hi)


def trig(rng, eps=1.0):
    A, W, P = rng.normal(size=3), rng.uniform(0.3, 2.5, 3), rng.uniform(0, 2 * np.pi, 3)
    return lambda s: eps * float(np.sum(A * np.sin(W * s + P)))


class TestParameters:
    def test_defaults(self):
        p = Parameters()
        assert (p.gamma, p.a1, p.a2, p.c) == (4.75, 1.3, 6.0, 1.0)

    @pytest.mark.parametrize("kw", [dict(gamma=0), dict(kappa1=-1), dict(a1=7.0),
                                    dict(c=-1), dict(gamma=math.nan)])
    def test_rejects_invalid(self, kw):
        with pytest.raises(ValueError):
            Parameters(**kw)

    def test_with_kappa_keeps_rest(self):
        p = Parameters(gamma=5.0).with_kappa(kappa2=2.0)
        assert p.gamma == 5.0 and p.kappa1 == 0.0 and p.kappa2 == 2.0

    def test_file_round_trip(self, tmp_path):
        p = Parameters(kappa1=3.4, kappa2=3.0, c=0.5)
        f = tmp_path / "p.txt"
        f.write_text(dump_parameters(p))
        assert load_parameters(f) == p

    def test_parse_errors(self):
        assert parse_parameter_text("kappa1 = 2  # comment\n\n") == {"kappa1": 2.0}
        with pytest.raises(ValueError):
            parse_parameter_text("beta = 1")
        with pytest.raises(ValueError):
            parse_parameter_text("kappa1 2")

    def test_from_dict_unknown_key(self):
        with pytest.raises(ValueError):
            Parameters.from_dict({"kappa3": 1.0})


class TestDelayArguments:
    def test_zero_state(self):
        assert delay_arguments(Parameters(), 0.0, 0.0) == (-1.3, -6.0)

    def test_linear_formula(self):
        a1, a2 = delay_arguments(Parameters(), 10.0, 1.0)
        assert a1 == pytest.approx(7.7, abs=1e-15) and a2 == pytest.approx(3.0, abs=1e-15)

    def test_positive_near_lower_bound(self):
        p = Parameters(kappa1=3, kappa2=3)
        lo, _ = solution_bound_interval(p)
        a1, _ = delay_arguments(p, 0.0, lo + 1e-6)
        assert a1 < 0.0


class TestRHS:
    def test_zero_history(self):
        p = Parameters(kappa1=3.4, kappa2=3.0)
        assert evaluate_rhs(p, lookup(lambda s: 0.0), 0.0) == 0.0

    def test_pure_decay(self):
        p = Parameters()
        h = lookup(lambda s: 0.3 * math.exp(-p.gamma * s))
        assert evaluate_rhs(p, h, 0.7) == pytest.approx(-p.gamma * h(0.7), rel=1e-15)

    def test_matches_direct_evaluation(self):
        p = Parameters(kappa1=3.4, kappa2=3.0)
        eps = 0.05
        h = lookup(lambda s: eps * math.sin(s))
        u = 0.0
        direct = -p.gamma * u - 3.4 * eps * math.sin(-1.3 - u) - 3.0 * eps * math.sin(-6.0 - u)
        assert evaluate_rhs(p, h, 0.0) == pytest.approx(direct, rel=1e-14)

    def test_advanced_delay(self):
        # u(t) < -a1/c puts the first delay argument ahead of t
        p = Parameters(kappa1=1.0)
        with pytest.raises(DelayAdvanced):
            evaluate_rhs(p, lookup(lambda s: -2.0), 0.0)

    def test_history_range_enforced(self):
        p = Parameters(kappa1=1.0, kappa2=1.0)
        with pytest.raises(HistoryOutOfRange):
            evaluate_rhs(p, HistoryLookup(lambda s: 0.1, -2.0, 0.0), 0.0)

    def test_linear_in_kappa_when_c_zero(self, rng):
        h = lookup(trig(rng))
        p1 = Parameters(kappa1=1.0, kappa2=0.0, c=0.0)
        p2 = Parameters(kappa1=0.0, kappa2=1.0, c=0.0)
        p0 = Parameters(c=0.0)
        p = Parameters(kappa1=2.0, kappa2=3.0, c=0.0)
        lin = 2 * evaluate_rhs(p1, h, 0.3) + 3 * evaluate_rhs(p2, h, 0.3) - 4 * evaluate_rhs(p0, h, 0.3)
        assert evaluate_rhs(p, h, 0.3) == pytest.approx(lin, rel=1e-12, abs=1e-14)


class TestDifferenceOperators:
    def test_zero(self):
        p = Parameters(kappa1=2, kappa2=1)
        z = lookup(lambda s: 0.0)
        assert difference_L(p, z, 0.0) == 0.0 == difference_L2(p, z, 0.0)
        assert rhs_cubic_truncation(p, z, 0.0) == 0.0

    def test_constant(self):
        p = Parameters(kappa1=2, kappa2=1)
        assert difference_L(p, lookup(lambda s: 1.0), 0.0) == -(4.75 + 3.0)

    @given(st.floats(-1.0, 1.0), st.floats(-3.0, 3.0), st.floats(0, 5), st.floats(0, 5),
           st.floats(-2.0, 2.0))
    def test_exponential_identity(self, re, im, k1, k2, t):
        p = Parameters(kappa1=k1, kappa2=k2)
        lam = complex(re, im)
        for part in (lambda z: z.real, lambda z: z.imag):
            h = lookup(lambda s: part(np.exp(lam * s)))
            want = part((lam - char_fn(p, lam)) * np.exp(lam * t))
            got = difference_L(p, h, t)
            assert abs(got - want) <= 1e-12 * max(1.0, abs(np.exp(lam * t)) * (abs(lam) + 15))

    def test_exponential_identity_squared(self):
        p = Parameters(kappa1=2.5, kappa2=1.5)
        lam = complex(-0.2, 1.7)
        for part in (lambda z: z.real, lambda z: z.imag):
            h = lookup(lambda s: part(np.exp(lam * s)))
            want = part((lam - char_fn(p, lam)) ** 2 * np.exp(lam * 0.4))
            assert difference_L2(p, h, 0.4) == pytest.approx(want, rel=1e-12, abs=1e-12)

    def test_L2_is_composition(self, rng):
        p = Parameters(kappa1=2.0, kappa2=3.5)
        for _ in range(5):
            h = lookup(trig(rng))
            Lh = lookup(lambda s: difference_L(p, h, s), -25.0, 5.0)
            assert difference_L2(p, h, 0.0) == pytest.approx(difference_L(p, Lh, 0.0), rel=1e-12, abs=1e-13)

    def test_truncation_equals_L_without_state_dependence(self, rng):
        p = Parameters(kappa1=3.0, kappa2=3.0, c=0.0)
        for _ in range(1000):
            h = lookup(trig(rng))
            t = float(rng.uniform(-1, 1))
            assert rhs_cubic_truncation(p, h, t) == difference_L(p, h, t)


class TestBounds:
    def test_zero_feedback(self):
        assert max_delay_bound(Parameters()) == 6.0
        assert solution_bound_interval(Parameters()) == (-1.3, 0.0)

    def test_formula(self):
        p = Parameters(kappa1=3.2061, kappa2=3.0)
        assert max_delay_bound(p) == pytest.approx(6 + 1.3 * 6.2061 / 4.75, rel=1e-15)
        lo, hi = solution_bound_interval(Parameters(kappa1=3, kappa2=3))
        assert lo == -1.3 and hi == pytest.approx(1.3 * 6 / 4.75, rel=1e-15)

    def test_boundary_rejected(self):
        with pytest.raises(WellPosednessViolated):
            max_delay_bound(Parameters(kappa2=4.75))

    def test_c_zero(self):
        with pytest.raises(DegenerateStateDependence):
            solution_bound_interval(Parameters(kappa1=1, c=0.0))
