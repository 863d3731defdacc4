import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from iftrkit.core_math import (DomainError, IntegrationError, QuadratureRule, bessel_i0, bessel_i0e,
                               circle_rule, gamma_rule, gauss_legendre_rule, integrate_adaptive,
                               log_gamma, nakagami_rule, phi2_3)


def _i0_series(x, n=200):
    term, total = 1.0, 1.0
    for k in range(1, n):
        term *= (x / 2) ** 2 / (k * k)
        total += term
    return total


def _phi2_brute(b, c, x, n=200):
    """Direct triple sum of the Phi2 series with ``n`` terms per index."""
    k = np.arange(n)
    terms = []
    for bi, xi in zip(b, x):
        lp = np.array([float(mpmath.log(abs(mpmath.rf(bi, int(j)) * mpmath.mpf(xi) ** int(j) / mpmath.factorial(int(j))))
                                 if mpmath.rf(bi, int(j)) * mpmath.mpf(xi) ** int(j) != 0 else -np.inf)
                       for j in k])
        sg = np.array([float(mpmath.sign(mpmath.rf(bi, int(j)) * mpmath.mpf(xi) ** int(j))) for j in k])
        terms.append((lp, sg))
    (l1, s1), (l2, s2), (l3, s3) = terms
    lc = np.array([float(mpmath.log(mpmath.rf(c, int(j)))) for j in range(3 * n)])
    tot = 0.0
    for i in range(n):
        a = l1[i] + l2[:, None] + l3[None, :] - lc[i + k[:, None] + k[None, :]]
        tot += float(np.sum(s1[i] * s2[:, None] * s3[None, :] * np.exp(a)))
    return tot


class TestLogGamma:
    @pytest.mark.parametrize("x,expected", [(1.0, 0.0), (0.5, 0.5723649429247001), (10.0, 12.801827480081469)])
    def test_examples(self, x, expected):
        assert log_gamma(x) == pytest.approx(expected, rel=1e-12, abs=1e-14)

    @pytest.mark.parametrize("x", [0.0, -1.0, float("nan")])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            log_gamma(x)

    @given(st.floats(0.1, 100.0))
    def test_recurrence(self, x):
        assert abs(log_gamma(x + 1) - log_gamma(x) - math.log(x)) <= 1e-10

    @given(st.floats(1e-3, 1e3))
    def test_against_mpmath(self, x):
        ref = float(mpmath.loggamma(x))
        assert log_gamma(x) == pytest.approx(ref, rel=1e-12, abs=1e-13)


class TestBesselI0:
    def test_examples(self):
        assert bessel_i0(0.0) == 1.0
        assert bessel_i0(2.0) == pytest.approx(_i0_series(2.0), rel=1e-12)
        assert bessel_i0(2.0) == pytest.approx(2.2795853023, rel=1e-10)

    def test_large_argument_scaled(self):
        v = bessel_i0e(700.0)
        assert math.isfinite(v)
        assert v == pytest.approx(1.0 / math.sqrt(2 * math.pi * 700.0), rel=1e-3)
        assert math.isfinite(bessel_i0(700.0))
        assert bessel_i0(700.0) / (math.exp(700.0) / math.sqrt(2 * math.pi * 700.0)) == pytest.approx(1.0, rel=2e-4)

    def test_domain(self):
        with pytest.raises(DomainError):
            bessel_i0(-1.0)

    @given(st.floats(0.0, 20.0))
    def test_power_series(self, x):
        assert bessel_i0(x) == pytest.approx(_i0_series(x), rel=1e-10)


class TestPhi2:
    def test_zero_arguments(self):
        rep = phi2_3(2.3, 1.1, 0.7, 1.5, 0.0, 0.0, 0.0)
        assert rep.value == 1.0 and rep.converged

    def test_vanishing_numerators(self):
        rep = phi2_3(0.0, 0.0, 0.0, 3.0, -1.0, -2.0, -0.5)
        assert rep.value == pytest.approx(1.0, abs=1e-14)

    def test_brute_force(self):
        rep = phi2_3(1.0, 1.0, 1.0, 1.0, -0.5, -0.3, -0.2, tol=1e-12)
        assert rep.converged
        assert rep.value == pytest.approx(_phi2_brute((1, 1, 1), 1.0, (-0.5, -0.3, -0.2)), rel=1e-10)

    @pytest.mark.parametrize("method", ["series", "contour"])
    def test_routes_agree(self, method):
        ref = _phi2_brute((2.0, 3.0, 1.0), 4.0, (-1.2, -0.4, -2.0), n=120)
        rep = phi2_3(2.0, 3.0, 1.0, 4.0, -1.2, -0.4, -2.0, tol=1e-12, method=method)
        assert rep.converged and rep.tail_bound <= 1e-12
        assert rep.value == pytest.approx(ref, rel=1e-9)

    @given(st.floats(0.1, 5.0), st.floats(0.5, 6.0), st.floats(-8.0, 0.0))
    def test_single_argument_reduces_to_kummer(self, b, c, x):
        rep = phi2_3(b, 1.3, 0.6, c, x, 0.0, 0.0, tol=1e-12)
        with mpmath.workdps(40):
            terms = [mpmath.rf(b, k) / mpmath.rf(c, k) * mpmath.mpf(x) ** k / mpmath.factorial(k) for k in range(200)]
            ref, scale = float(mpmath.fsum(terms)), float(mpmath.fsum(abs(t) for t in terms))
        assert abs(rep.value - ref) <= 1e-9 * abs(ref) + 1e-14 * scale

    def test_converged_implies_tail_bound(self):
        rep = phi2_3(3.0, 2.0, 5.0, 7.0, -40.0, -10.0, -60.0, tol=1e-10)
        assert (not rep.converged) or rep.tail_bound <= 1e-10

    def test_nonconvergence_reported(self):
        rep = phi2_3(3.0, 2.0, 5.0, 7.0, -400.0, -100.0, -600.0, tol=1e-12, method="series", budget=20)
        assert not rep.converged


class TestIntegrate:
    def test_examples(self):
        assert integrate_adaptive(lambda x: 1.0, 0.0, 1.0) == pytest.approx(1.0, abs=1e-12)
        assert integrate_adaptive(math.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-10)
        phi = lambda x: math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
        assert integrate_adaptive(phi, -8.0, 8.0, 1e-12) == pytest.approx(math.erf(8 / math.sqrt(2)), abs=1e-10)

    def test_depth_error_carries_estimate(self):
        f = lambda x: 1.0 / math.sqrt(x) if x > 0 else 0.0
        with pytest.raises(IntegrationError) as info:
            integrate_adaptive(f, 0.0, 1.0, 1e-14, max_depth=5)
        assert info.value.estimate == pytest.approx(2.0, abs=0.01)
        assert info.value.residual > 0

    @given(st.floats(-3, 3), st.floats(-3, 3))
    def test_linearity(self, a, b):
        f, g = math.cos, (lambda x: x * x)
        lhs = integrate_adaptive(lambda x: a * f(x) + b * g(x), 0.0, 2.0, 1e-11)
        rhs = a * integrate_adaptive(f, 0.0, 2.0, 1e-11) + b * integrate_adaptive(g, 0.0, 2.0, 1e-11)
        assert lhs == pytest.approx(rhs, abs=1e-9)


class TestRules:
    @pytest.mark.parametrize("n", [1, 5, 64])
    def test_legendre(self, n):
        rule = gauss_legendre_rule(n, 0.0, 3.0)
        assert rule.weights.sum() == pytest.approx(3.0, abs=1e-12)
        assert np.all((rule.nodes > 0) & (rule.nodes < 3))

    def test_circle(self):
        rule = circle_rule(128)
        assert rule.weights.sum() == pytest.approx(2 * math.pi, abs=1e-12)
        assert rule.integrate(np.cos(rule.nodes) ** 2) == pytest.approx(math.pi, abs=1e-12)

    @pytest.mark.parametrize("shape", [0.6, 2.5, 20.0])
    def test_gamma_moments(self, shape):
        rule = gamma_rule(shape, 24)
        # unit-mean Gamma: E[xi] = 1, E[xi^2] = 1 + 1/m
        assert rule.integrate(np.ones_like(rule.nodes)) == pytest.approx(1.0, abs=1e-12)
        assert rule.integrate(rule.nodes) == pytest.approx(1.0, rel=1e-12)
        assert rule.integrate(rule.nodes ** 2) == pytest.approx(1.0 + 1.0 / shape, rel=1e-11)

    @pytest.mark.parametrize("shape", [0.05, 0.69, 5.0, 50.0])
    def test_nakagami_moments(self, shape):
        rule = nakagami_rule(shape, 48)
        t = rule.nodes
        assert rule.integrate(np.ones_like(t)) == pytest.approx(1.0, abs=1e-12)
        assert rule.integrate(t ** 2) == pytest.approx(1.0, rel=1e-11)
        ref = math.exp(math.lgamma(shape + 0.5) - math.lgamma(shape)) / math.sqrt(shape)
        assert rule.integrate(t) == pytest.approx(ref, rel=1e-10)

    def test_nakagami_domain(self):
        with pytest.raises(DomainError):
            nakagami_rule(0.0, 8)

    def test_rule_validation(self):
        with pytest.raises(ValueError):
            QuadratureRule(np.array([0.5]), np.array([-1.0]), (0.0, 1.0))
        with pytest.raises(ValueError):
            QuadratureRule(np.array([2.0]), np.array([1.0]), (0.0, 1.0))
