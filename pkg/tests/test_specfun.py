import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import roots_laguerre

from monopole_spectra import specfun
from monopole_spectra.specfun import (
    DomainError,
    PolynomialCoeffs,
    elliptic_agm,
    elliptic_e,
    elliptic_k,
    elliptic_k_derivative,
    hurwitz_zeta,
    hurwitz_zeta_batch,
    laguerre_rodrigues,
    polygamma,
    sinh2_laplace,
    sinh_laplace,
)

# Frozen oracles from 30-digit mpmath evaluations.
K_HALF = 1.6857503548125960
E_HALF = 1.4674622093394272
PSI2_AT_1 = -2.4041138063191886
ZETA3 = 1.2020569031595943
EULER_GAMMA = 0.5772156649015329
K22 = 0.44287716368863215  # pi^2/6 - zeta(3), also quadrature of r^2 e^{-2r}/sinh^2 r
HURWITZ_37_03 = 86.476824769465902
POLYGAMMA_5_25 = 0.57856917856718348


def rel(a, b):
    return abs(a - b) / abs(b)


class TestElliptic:
    def test_k_at_zero(self):
        assert elliptic_k(0.0) == pytest.approx(math.pi / 2, rel=1e-15)

    def test_k_at_half_matches_frozen_oracle(self):
        assert rel(elliptic_k(0.5), K_HALF) < 1e-14

    def test_k_at_one_is_domain_error(self):
        with pytest.raises(DomainError):
            elliptic_k(1.0)

    def test_k_grows_without_bound_near_one(self):
        assert elliptic_k(1 - 1e-12) > 14

    def test_e_endpoints_and_half(self):
        assert elliptic_e(0.0) == pytest.approx(math.pi / 2, rel=1e-15)
        assert elliptic_e(1.0) == 1.0
        assert rel(elliptic_e(0.5), E_HALF) < 1e-14

    @pytest.mark.parametrize("k", [-0.1, 1.5])
    def test_e_outside_unit_interval_raises(self, k):
        with pytest.raises(DomainError):
            elliptic_e(k)

    def test_e_against_quadrature(self):
        for k in (0.1, 0.3, 0.7, 0.95):
            with mpmath.workdps(30):
                ref = float(mpmath.quad(lambda t: mpmath.sqrt(1 - (k * mpmath.sin(t)) ** 2),
                                        [0, mpmath.pi / 2]))
            assert rel(elliptic_e(k), ref) < 1e-14

    def test_legendre_relation_at_twenty_moduli(self):
        for k in np.linspace(0.02, 0.98, 20):
            kp = math.sqrt(1 - k * k)
            lhs = (elliptic_e(k) * elliptic_k(kp) + elliptic_e(kp) * elliptic_k(k)
                   - elliptic_k(k) * elliptic_k(kp))
            assert abs(lhs - math.pi / 2) < 1e-12

    def test_k_derivative_against_central_difference(self):
        for k in (0.2, 0.5, 0.8):
            h = 1e-5
            fd = (elliptic_k(k + h) - elliptic_k(k - h)) / (2 * h)
            assert rel(elliptic_k_derivative(k), fd) < 1e-8

    def test_agm_complement_form_is_accurate_near_one(self):
        kp = 1e-10
        K, E, _ = elliptic_agm(math.sqrt(1 - kp * kp), kp)
        with mpmath.workdps(40):
            ref = float(mpmath.ellipk(1 - mpmath.mpf(kp) ** 2))
        assert rel(K, ref) < 1e-14
        assert E == pytest.approx(1.0, rel=1e-14)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(min_value=0.0, max_value=0.999))
    def test_k_not_smaller_than_e(self, k):
        assert elliptic_k(k) >= elliptic_e(k)


class TestLaguerre:
    def test_k0_n0_is_one(self):
        assert laguerre_rodrigues(0, 0) == PolynomialCoeffs([1])

    def test_k1_n0_is_one_minus_r(self):
        assert laguerre_rodrigues(1, 0) == PolynomialCoeffs([1, -1])

    def test_k0_n3_is_six(self):
        assert laguerre_rodrigues(0, 3) == PolynomialCoeffs([6])

    def test_coefficients_are_exact_rationals(self):
        p = laguerre_rodrigues(18, 3)
        assert all(isinstance(c, Fraction) for c in p)

    @pytest.mark.parametrize("k", [1, 3, 6, 10, 15])
    def test_vanishes_at_standard_laguerre_roots(self, k):
        p = laguerre_rodrigues(k, 0)
        roots, _ = roots_laguerre(k)
        absolute = PolynomialCoeffs(abs(c) for c in p)
        for x in roots:
            # relative to the rounding bound sum |c_i| x^i of the evaluation
            assert abs(p(float(x))) / absolute(float(x)) < 1e-10

    def test_is_factorial_times_standard(self):
        from scipy.special import eval_genlaguerre
        for k in range(6):
            for N in range(4):
                x = 0.7
                ref = math.factorial(k + N) * eval_genlaguerre(k, N, x)
                assert laguerre_rodrigues(k, N)(x) == pytest.approx(ref, rel=1e-12)

    def test_negative_degree_raises(self):
        with pytest.raises(DomainError):
            laguerre_rodrigues(-1, 0)


class TestPolynomialCoeffs:
    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(-9, 9), min_size=1, max_size=6),
           st.lists(st.integers(-9, 9), min_size=1, max_size=6),
           st.integers(-5, 5))
    def test_ring_operations_match_evaluation(self, a, b, x):
        p, q = PolynomialCoeffs(a), PolynomialCoeffs(b)
        assert (p * q)(Fraction(x)) == p(Fraction(x)) * q(Fraction(x))
        assert (p + q)(Fraction(x)) == p(Fraction(x)) + q(Fraction(x))
        assert (p - q)(Fraction(x)) == p(Fraction(x)) - q(Fraction(x))

    def test_leading_coefficient_trimmed(self):
        p = PolynomialCoeffs([1, 2, 0, 0])
        assert p.degree == 1
        assert PolynomialCoeffs([0, 0]).is_zero


class TestPolygamma:
    def test_trigamma_at_one(self):
        assert rel(polygamma(1, 1.0), math.pi**2 / 6) < 1e-13

    def test_digamma_at_one(self):
        assert rel(polygamma(0, 1.0), -EULER_GAMMA) < 1e-13

    def test_tetragamma_at_one(self):
        assert rel(polygamma(2, 1.0), PSI2_AT_1) < 1e-13

    def test_higher_order_frozen(self):
        assert rel(polygamma(5, 2.5), POLYGAMMA_5_25) < 1e-13

    @pytest.mark.parametrize("x", [0.0, -1.0])
    def test_nonpositive_argument_raises(self, x):
        with pytest.raises(DomainError):
            polygamma(1, x)

    @settings(max_examples=80, deadline=None)
    @given(st.integers(0, 8), st.floats(min_value=0.05, max_value=40.0))
    def test_recurrence(self, m, x):
        lhs = polygamma(m, x + 1) - polygamma(m, x)
        rhs = (-1) ** m * math.factorial(m) * x ** (-m - 1)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


class TestHurwitz:
    def test_reduces_to_zeta2(self):
        assert rel(hurwitz_zeta(2, 1), math.pi**2 / 6) < 1e-13

    def test_half_argument(self):
        assert rel(hurwitz_zeta(2, 0.5), math.pi**2 / 2) < 1e-13

    def test_zeta3(self):
        assert rel(hurwitz_zeta(3, 1), ZETA3) < 1e-13

    def test_noninteger_order_frozen(self):
        assert rel(hurwitz_zeta(3.7, 0.3), HURWITZ_37_03) < 1e-13

    @pytest.mark.parametrize("q,w", [(1.0, 1.0), (0.5, 2.0), (2.0, 0.0), (2.0, -1.0)])
    def test_domain(self, q, w):
        with pytest.raises(DomainError):
            hurwitz_zeta(q, w)

    @settings(max_examples=80, deadline=None)
    @given(st.floats(min_value=1.1, max_value=30.0), st.floats(min_value=0.05, max_value=50.0))
    def test_shift_recurrence(self, q, w):
        lhs = hurwitz_zeta(q, w) - hurwitz_zeta(q, w + 1)
        assert abs(lhs - w ** (-q)) <= 1e-13 * max(1.0, w ** (-q))

    def test_batch_matches_mpmath_at_high_precision(self):
        with mpmath.workprec(200):
            w = mpmath.mpf(7) / 5
            vals = hurwitz_zeta_batch(range(2, 30), w, prec=200)
            for q, v in zip(range(2, 30), vals):
                ref = mpmath.zeta(q, w)
                assert abs(v - ref) <= mpmath.mpf(2) ** -190 * abs(ref)


class TestLaplaceIdentities:
    def test_sinh2_kernel_closed_form(self):
        assert abs(float(sinh2_laplace(2, 2)) - K22) < 1e-14

    def test_sinh2_kernel_against_quadrature(self):
        ref, _ = quad(lambda r: r**2 * math.exp(-2 * r) / math.sinh(r) ** 2, 0, 60,
                      epsabs=1e-14, epsrel=1e-13)
        assert abs(float(sinh2_laplace(2, 2)) - ref) < 1e-12

    def test_sinh_kernel_closed_form(self):
        assert abs(float(sinh_laplace(1, 1)) - math.pi**2 / 12) < 1e-14

    def test_sinh_kernel_higher_power_against_quadrature(self):
        ref, _ = quad(lambda r: r**4 * math.exp(-0.7 * r) / math.sinh(r), 0, 200,
                      epsabs=1e-13, epsrel=1e-13)
        assert rel(float(sinh_laplace(4, 0.7)), ref) < 1e-11


def test_module_exports_are_present():
    for name in specfun.__all__:
        assert hasattr(specfun, name)
