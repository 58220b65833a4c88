import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gbmsim import Params, StateTriple
from gbmsim.kinetics import (b_func, d_func, f1, f2, f3, f_truncated, rates,
                             rates_truncated, sum_rhs, vascular_fraction)

from oracles import literal_rates, literal_truncated_rates

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)
densities = st.floats(min_value=-2.0, max_value=2.0)


def test_params_reject_nonpositive():
    with pytest.raises(ValueError):
        Params.delta_dominant(alpha=0.0)
    with pytest.raises(ValueError):
        Params.delta_dominant(K=-1.0)


def test_state_total():
    s = StateTriple(0.1, 0.2, 0.3)
    assert s.total == pytest.approx(0.6)


class TestVascularFraction:
    def test_symmetry_point(self):
        assert vascular_fraction(0.5, 0.5) == 0.5

    def test_axes(self):
        assert vascular_fraction(0.0, 1.0) == 0.0
        assert vascular_fraction(1.0, 0.0) == 1.0

    def test_origin_convention(self):
        assert vascular_fraction(0.0, 0.0) == 0.0

    @given(phi=finite, t=finite)
    def test_bounded_for_all_reals(self, phi, t):
        p = vascular_fraction(phi, t)
        assert 0.0 <= p <= 1.0


class TestBD:
    def test_b_values(self):
        assert b_func(0.0, 0.0) == 0.0
        assert b_func(0.0, 2.0) == 2.0
        assert b_func(0.5, 0.5) == pytest.approx(0.5 * math.sqrt(0.75), abs=1e-15)

    def test_d_values(self):
        assert d_func(0.0, 0.0) == 0.0
        assert d_func(1.0, 0.0) == 0.0
        assert d_func(0.5, 0.5) == pytest.approx(0.25, abs=1e-16)

    def test_finite_difference_slope_bounds(self, rng):
        # difference quotients of a Lipschitz function never exceed the
        # derivative sup bounds: 1/2 in phi, 2 in t
        pts = rng.uniform(1e-12, 2.0, size=(20000, 2))
        hs = 10.0 ** rng.uniform(-8, -1, size=20000)
        for (phi, t), h in zip(pts, hs):
            dphi = (b_func(phi + h, t) - b_func(phi, t)) / h
            dt = (b_func(phi, t + h) - b_func(phi, t)) / h
            assert abs(dphi) <= 0.5 + 1e-4
            assert abs(dt) <= 2.0 + 1e-4


class TestRates:
    def test_f1_tumor_free(self, params):
        assert f1(StateTriple(0.0, 0.3, 0.2), params) == 0.0

    def test_f1_hand_value(self, params):
        # logistic factor vanishes at S = K, leaving -alpha * B
        assert f1(StateTriple(0.5, 0.0, 0.5), params) == pytest.approx(
            -0.0129903810567665, abs=1e-15)

    def test_f1_at_capacity(self, params):
        assert f1(StateTriple(params.K, 0.0, 0.0), params) == pytest.approx(
            -params.alpha * params.K, abs=1e-16)

    def test_f2_hand_value(self, params):
        # 0.03 * B(0.5, 0.5) + 0.3 * 0.25
        assert f2(StateTriple(0.5, 0.0, 0.5), params) == pytest.approx(
            0.0879903810567666, abs=1e-15)

    def test_f2_no_tumor_no_phi(self, params):
        assert f2(StateTriple(0.0, 0.4, 0.0), params) == 0.0

    def test_f2_beta2_term_only(self, params):
        for n, phi in [(0.2, 0.7), (1.0, 0.1)]:
            assert f2(StateTriple(0.0, n, phi), params) == pytest.approx(
                params.beta2 * n * phi, rel=1e-15)

    def test_f3_no_vasculature(self, params):
        assert f3(StateTriple(0.4, 0.2, 0.0), params) == 0.0

    def test_f3_hand_value(self, params):
        assert f3(StateTriple(0.5, 0.0, 0.5), params) == pytest.approx(-0.075, abs=1e-16)

    @given(t=densities, n=densities, phi=densities)
    def test_f2_nonnegative_on_nonneg_states(self, t, n, phi):
        s = StateTriple(abs(t), abs(n), abs(phi))
        assert f2(s, Params.delta_dominant()) >= 0.0

    def test_f3_nonpositive_above_capacity(self, params, rng):
        pts = rng.uniform(0.0, 2.0, size=(5000, 3))
        pts = pts[pts.sum(axis=1) >= params.K]
        r3 = rates(pts[:, 0], pts[:, 1], pts[:, 2], params)[2]
        assert (r3 <= 1e-18).all()

    def test_equilibria_vanish_exactly(self, params, rng):
        states = [StateTriple(0.0, 0.0, 0.0)]
        states += [StateTriple(0.0, float(n), 0.0) for n in rng.uniform(1e-6, 5.0, 25)]
        states += [StateTriple(0.0, 0.0, float(phi)) for phi in rng.uniform(1e-6, 5.0, 25)]
        for s in states:
            assert f1(s, params) == 0.0
            assert f2(s, params) == 0.0
            assert f3(s, params) == 0.0


class TestAgainstLiteralForm:
    def test_matches_literal_off_origin(self, params, rng):
        pts = rng.uniform(0.0, 2.0, size=(20000, 3))
        pts = pts[np.maximum(pts[:, 0], pts[:, 2]) > 0.0]
        for t, n, phi in pts[:5000]:
            mine = rates(t, n, phi, params)
            ref = literal_rates(t, n, phi, params)
            for a, b in zip(mine, ref):
                assert a == pytest.approx(b, rel=1e-12, abs=1e-15)

    def test_truncated_matches_literal(self, params, rng):
        pts = rng.uniform(-1.0, 2.0, size=(2000, 3))
        for t, n, phi in pts:
            mine = rates_truncated(t, n, phi, params)
            ref = literal_truncated_rates(t, n, phi, params)
            for a, b in zip(mine, ref):
                assert a == pytest.approx(b, rel=1e-12, abs=1e-15)


class TestTruncated:
    def test_clamps_tumor_for_necrosis_rate(self, params):
        s = StateTriple(2.0 * params.K, 0.0, 0.0)
        assert f_truncated(2, s, params) == pytest.approx(params.alpha * params.K,
                                                          rel=1e-15)

    def test_negative_tumor_gives_zero_growth(self, params):
        assert f_truncated(1, StateTriple(-1.0, 0.0, 0.5), params) == 0.0

    def test_identity_in_box(self, params, rng):
        for t, n, phi in rng.uniform(0.0, 1.0, size=(500, 3)):
            s = StateTriple(t, n, phi)
            assert f_truncated(1, s, params) == f1(s, params)
            assert f_truncated(2, s, params) == f2(s, params)
            assert f_truncated(3, s, params) == f3(s, params)

    def test_rejects_bad_index(self, params):
        with pytest.raises(ValueError):
            f_truncated(0, StateTriple(0.1, 0.1, 0.1), params)


class TestSumIdentity:
    def test_zero_cases(self, params):
        assert sum_rhs(StateTriple(0.0, 0.4, 0.9), params) == 0.0
        assert sum_rhs(StateTriple(0.5, 0.0, 0.5), params) == 0.0  # S = K
        assert sum_rhs(StateTriple(0.3, 0.7, 0.0), params) == 0.0

    def test_matches_rate_sum_on_1e5_random_states(self, params, rng):
        K = params.K
        t, n, phi = rng.uniform(-K, 2.0 * K, size=(3, 100_000))
        r1, r2, r3 = rates(t, n, phi, params)
        total = r1 + r2 + r3
        direct = np.array([sum_rhs(StateTriple(*s), params)
                           for s in zip(t[:200], n[:200], phi[:200])])
        assert direct == pytest.approx(total[:200], rel=1e-12, abs=1e-15)
        # vectorized identity over the full sample
        frac = np.where(np.maximum(phi, 0) + np.maximum(t, 0) > 0,
                        np.maximum(phi, 0)
                        / np.where(np.maximum(phi, 0) + np.maximum(t, 0) > 0,
                                   np.maximum(phi, 0) + np.maximum(t, 0), 1.0), 0.0)
        B = np.maximum(t, 0) * np.sqrt(np.clip(1 - frac**2, 0, 1))
        D = np.maximum(t, 0) * frac
        srhs = (params.rho * D + (params.gamma / K) * B * phi) * (1 - (t + n + phi) / K)
        scale = np.maximum(1.0, np.abs(r1) + np.abs(r2) + np.abs(r3))
        assert (np.abs(srhs - total) <= 1e-12 * scale).all()
