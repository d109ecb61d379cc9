import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from levyexp.errors import DomainError, PoleError
from levyexp.special import (beta_integral, digamma, double_gamma_calibrate, double_gamma_identity_residual,
                             double_gamma_log, gamma_ratio, gauss_2f1, log_gamma, mp_double_gamma)

complex_points = st.builds(complex, st.floats(-8, 8), st.floats(-8, 8)).filter(
    lambda z: min(abs(z + n) for n in range(0, 12)) > 1e-3)


@settings(max_examples=60, deadline=None)
@given(complex_points)
def test_log_gamma_matches_mpmath(z):
    ref = complex(mpmath.exp(mpmath.loggamma(z)))
    np.testing.assert_allclose(np.exp(log_gamma(z)), ref, rtol=1e-12)


def test_log_gamma_rejects_poles():
    with pytest.raises(PoleError):
        log_gamma(-2.0)


def test_gamma_ratio_vanishes_at_denominator_pole():
    assert gamma_ratio([1.5], [-1.0]) == 0
    np.testing.assert_allclose(gamma_ratio([2.5, 0.5], [3.0]), math.gamma(2.5) * math.gamma(0.5) / 2.0, rtol=1e-14)


@pytest.mark.parametrize("x", [0.1, 0.5, 1.3, 7.2])
def test_digamma_matches_mpmath(x):
    np.testing.assert_allclose(digamma(x), float(mpmath.digamma(x)), rtol=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.3, 4), st.floats(-0.95, 0.95))
def test_gauss_2f1_matches_mpmath(a, b, c, z):
    ref = float(mpmath.hyp2f1(a, b, c, z))
    np.testing.assert_allclose(gauss_2f1(a, b, c, z), ref, rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("a,b,c", [(0.3, 1.0, 0.6), (-0.5, 2.0, 0.2), (1.0, 1.5, 0.9)])
def test_beta_integral_matches_quadrature(a, b, c):
    def f(u):
        log_expm1 = b * u + math.log(-math.expm1(-b * u))
        return math.exp(a * u - c * log_expm1)

    ref = integrate.quad(f, 0, np.inf, limit=200)[0]
    np.testing.assert_allclose(beta_integral(a, b, c), ref, rtol=1e-8)


def test_beta_integral_domain():
    with pytest.raises(DomainError):
        beta_integral(0.3, -1.0, 0.5)


@pytest.mark.parametrize("z", [0.3, 1.7, 4.2, 2.5 + 1j, 0.5 - 3j])
def test_double_gamma_unit_tau_is_barnes_g(z):
    ev = double_gamma_calibrate(1.0)
    np.testing.assert_allclose(np.exp(double_gamma_log(ev, z)), complex(mpmath.barnesg(z)), rtol=1e-10)


@pytest.mark.parametrize("tau", [0.4, math.sqrt(2), 2.7])
@pytest.mark.parametrize("z", [0.3, 2.5, 1.2 + 2j, 6.5 - 1j])
def test_double_gamma_matches_high_precision(tau, z):
    ev = double_gamma_calibrate(tau)
    ref = complex(mpmath.exp(mp_double_gamma(tau).log(z)))
    np.testing.assert_allclose(np.exp(double_gamma_log(ev, z)), ref, rtol=1e-9)


@settings(max_examples=30, deadline=None)
@given(complex_points, st.sampled_from([0.4, 1.0, math.sqrt(2), 2.7]),
       st.sampled_from(["shift_one", "shift_tau", "modular"]))
def test_double_gamma_identities(z, tau, which):
    assert double_gamma_identity_residual(tau, z, which) < 1e-9


def test_double_gamma_normalized_at_one():
    for tau in (0.4, 1.0, 2.7):
        np.testing.assert_allclose(np.exp(double_gamma_log(double_gamma_calibrate(tau), 1.0)), 1.0, atol=1e-12)


def test_double_gamma_zero_lattice_raises():
    ev = double_gamma_calibrate(math.sqrt(2))
    with pytest.raises(PoleError):
        double_gamma_log(ev, -math.sqrt(2) - 1)
