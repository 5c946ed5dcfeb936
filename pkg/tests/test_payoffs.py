import math

import numpy as np
import pytest

from oracles import conditional_normal_average
from qvbarrier.charfun import Branch, conditional_charfun
from qvbarrier.payoffs import (PayoffFn, Side, dbko_image, dbko_image_term,
                               frac_ki_payoff, powerexp_payoff, ratio_dpsi_dp,
                               ratio_ki_payoff, rebate_psi, sbko_image,
                               sbko_image_upper, ski_psi, ski_psi_derivs)

L = math.log(90.0)
U = math.log(110.0)


def qv_payoff():
    return PayoffFn(lambda x, v: np.broadcast_to(
        np.asarray(v, dtype=complex), np.shape(x)).copy(), "qv")


class TestKnockOutImages:
    def test_sbko_pointwise(self):
        img = sbko_image(qv_payoff(), L)
        assert img(np.array([math.log(100.0)]), 0.1)[0] == pytest.approx(0.1)
        # below the barrier: -(81/90) * 0.1
        got = img(np.array([math.log(81.0)]), 0.1)[0]
        assert got == pytest.approx(-0.09, abs=1e-14)

    def test_sbko_upper_pointwise(self):
        one = powerexp_payoff(0, 0, 0.0, 0.0)
        img = sbko_image_upper(one, U)
        assert img(np.array([math.log(100.0)]), 0.0)[0] == pytest.approx(1.0)
        got = img(np.array([math.log(121.0)]), 0.0)[0]
        assert got == pytest.approx(-121.0 / 110.0, abs=1e-12)

    def test_pathwise_agreement_inside(self):
        img = sbko_image(qv_payoff(), L)
        xs = np.linspace(L + 0.01, L + 1.0, 11)
        np.testing.assert_allclose(img(xs, 0.3).real, 0.3, rtol=1e-14)
        db = dbko_image(qv_payoff(), L, U, q=5)
        xs = np.linspace(L + 0.01, U - 0.01, 11)
        np.testing.assert_allclose(db(xs, 0.3).real, 0.3, rtol=1e-13)

    def test_dbko_q0_inside_equals_phi(self):
        db = dbko_image(powerexp_payoff(0, 0, 0.0, 0.0), L, U, q=0)
        xs = np.linspace(L + 1e-6, U - 1e-6, 9)
        np.testing.assert_allclose(db(xs, 0.0).real, 1.0, rtol=1e-14)

    @pytest.mark.parametrize("v", [0.01, 0.04, 0.16])
    def test_zero_value_at_barrier_single(self, v):
        img = sbko_image(qv_payoff(), L)
        val = conditional_normal_average(
            lambda x: img(np.array([x]), v)[0], L, v, img.breakpoints)
        assert abs(val) < 1e-10
        imgU = sbko_image_upper(qv_payoff(), U)
        val = conditional_normal_average(
            lambda x: imgU(np.array([x]), v)[0], U, v, imgU.breakpoints)
        assert abs(val) < 1e-10

    @pytest.mark.parametrize("v", [0.01, 0.04, 0.16])
    def test_zero_value_at_barrier_double(self, v):
        db = dbko_image(qv_payoff(), L, U, q=5)
        for H in (L, U):
            val = conditional_normal_average(
                lambda x: db(np.array([x]), v)[0], H, v, db.breakpoints)
            assert abs(val) < 1e-6

    def test_dbko_tail_bound_on_grid(self):
        # |term(n)| <= e^{-|n| delta} sup|phi| for |n| >= 2 on the plot window
        xs = np.linspace(math.log(60.0), math.log(150.0), 301)
        delta = U - L
        sup_phi = 0.3
        for n in (-5, -3, -2, 2, 3, 5):
            term = dbko_image_term(qv_payoff(), L, U, n)(xs, sup_phi)
            assert np.max(np.abs(term)) <= math.exp(-abs(n) * delta) * sup_phi + 1e-15


class TestKnockInPsi:
    def test_barrier_and_support_values(self):
        assert ski_psi(np.array([L]), L, 0.0, 0.0, Side.LOWER)[0] == pytest.approx(1.0)
        assert ski_psi(np.array([L + 0.5]), L, 0.7, 0.2, Side.LOWER)[0] == 0.0
        assert ski_psi(np.array([U - 0.5]), U, 0.7, 0.2, Side.UPPER)[0] == 0.0
        assert ski_psi(np.array([U]), U, 0.0, 0.0, Side.UPPER)[0] == pytest.approx(1.0)

    def test_quadrature_identity_at_barrier(self):
        # started at the barrier, E psi equals the conditional charfun
        w, s, v = 0.5, 0.2, 0.09
        got = conditional_normal_average(
            lambda x: ski_psi(np.array([x]), L, w, s)[0], L, v, (L,))
        assert abs(got - conditional_charfun(w, s, v)) < 1e-10

    def test_quadrature_identity_upper(self):
        w, s, v = 0.3, 0.1, 0.04
        # upper side: conditional normal centered at the barrier
        got = conditional_normal_average(
            lambda x: ski_psi(np.array([x]), U, w, s, Side.UPPER)[0], U, v, (U,))
        assert abs(got - conditional_charfun(w, s, v)) < 1e-10

    def test_derivs_match_finite_differences(self):
        xs = np.linspace(L - 1.0, L - 0.01, 7)
        h = 1e-6
        w, s = 0.4, 0.15
        base10 = ski_psi_derivs(1, 0, xs, L, w, s)
        fd = (-1j) * (ski_psi(xs, L, w + h, s) - ski_psi(xs, L, w - h, s)) / (2 * h)
        np.testing.assert_allclose(base10, fd, atol=1e-7)
        base01 = ski_psi_derivs(0, 1, xs, L, w, s)
        fd = (-1j) * (ski_psi(xs, L, w, s + h) - ski_psi(xs, L, w, s - h)) / (2 * h)
        np.testing.assert_allclose(base01, fd, atol=1e-7)

    def test_derivs_respect_support(self):
        xs = np.linspace(L + 0.01, L + 1.0, 5)
        assert np.all(ski_psi_derivs(1, 1, xs, L, 0.4, 0.1) == 0.0)


class TestRebatePsi:
    def test_values(self):
        assert rebate_psi(np.array([L]), 0.0, L, 0.0)[0] == pytest.approx(1.0)
        # minus branch at s=0 has root -i: exp(i(-i)(x-H)) = exp(x-H)
        x = L + 0.3
        got = rebate_psi(np.array([x]), 0.0, L, 0.0, Branch.MINUS)[0]
        assert got == pytest.approx(math.exp(0.3), rel=1e-13)


class TestFractionalPayoff:
    def test_support(self):
        assert frac_ki_payoff(L + 0.1, L, 0.5) == 0.0
        assert frac_ki_payoff(L, L, 0.5) == 0.0

    def test_barrier_start_sqrt_moment(self):
        # conditional-normal average from the barrier = sqrt(total QV)
        v = 0.04
        val = conditional_normal_average(
            lambda x: frac_ki_payoff(x, L, 0.5), L, v, (L,))
        assert abs(val.real - math.sqrt(v)) < 1e-8
        assert abs(val.imag) < 1e-12

    def test_small_z_integrand_scaling(self):
        # |z^{-(r+1)} (psi(x;0,0) - psi(x;0,iz))| <= C z^{-r} near 0
        from qvbarrier.payoffs import _frac_integrand
        x = L - 0.4
        delta = x - L
        r = 0.5
        C = 4.0 * abs(delta) * (1.0 + math.exp(delta)) * math.exp(abs(delta) / 2)
        for z in np.geomspace(1e-8, 1e-2, 13):
            lhs = abs(_frac_integrand(np.array([z]), delta)[0]) * z ** (-(r + 1.0))
            assert lhs <= C * z ** (-r) * (1.0 + 1e-9)

    def test_zero_limit_consistency(self):
        # psi(x;0,iz) -> psi(x;0,0) pointwise as z -> 0
        from qvbarrier.payoffs import _frac_integrand
        x = L - 0.7
        vals = [abs(_frac_integrand(np.array([z]), x - L)[0])
                for z in (1e-3, 1e-5, 1e-7)]
        assert vals[0] > vals[1] > vals[2]
        assert vals[2] < 1e-6

    def test_r_range_guard(self):
        with pytest.raises(ValueError):
            frac_ki_payoff(L - 0.1, L, 1.2)


class TestRatioPayoff:
    def test_support(self):
        assert ratio_ki_payoff(L + 0.2, L, 0.5, 1e-3) == 0.0

    def test_dpsi_dp_matches_finite_differences(self):
        xs = np.linspace(L - 1.0, L - 0.05, 5)
        h = 1e-6
        for w in (0.05, 0.3, 2.0):
            got = ratio_dpsi_dp(xs, L, 0.0, w)
            fd = (-1j) * (ski_psi(xs, L, h, 1j * w) - ski_psi(xs, L, -h, 1j * w)) / (2 * h)
            np.testing.assert_allclose(got, fd, atol=1e-6)

    def test_deterministic_vol_value(self):
        # from the barrier with total QV v: E[(X-L) e^0 / sqrt(v + eps)]
        # with X - L ~ N(-v/2, v): mean -v/2 over sqrt(v + eps)
        v, eps = 0.04, 1e-3
        val = conditional_normal_average(
            lambda x: ratio_ki_payoff(x, L, 0.5, eps), L, v, (L,))
        want = (-0.5 * v) / math.sqrt(v + eps)
        assert abs(val.real - want) < 1e-7
        assert abs(val.imag) < 1e-10

    def test_param_guards(self):
        with pytest.raises(ValueError):
            ratio_ki_payoff(L - 0.1, L, -0.5, 1e-3)
        with pytest.raises(ValueError):
            ratio_ki_payoff(L - 0.1, L, 0.5, 0.0)


def test_payoffs_bounded_on_compacts():
    # finite and bounded by C e^{|x|} on a compact window
    xs = np.linspace(math.log(40.0), math.log(250.0), 57)
    for payoff in (sbko_image(qv_payoff(), L), sbko_image_upper(qv_payoff(), U),
                   dbko_image(qv_payoff(), L, U, q=5)):
        for v in (0.0, 0.04, 0.5):
            vals = payoff(xs, v)
            assert np.all(np.isfinite(vals))
            assert np.max(np.abs(vals)) <= 10.0 * np.exp(np.max(np.abs(xs)))
