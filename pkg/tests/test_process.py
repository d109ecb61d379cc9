import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from levyexp.errors import AdmissibilityError, DomainError, ValidationError
from levyexp.process import (HypergeometricParams, Longtime, StableParams, classify, dual, lamperti_stable,
                             laplace_exponent, laplace_exponent_derivative_at_zero, levy_density, validate,
                             wiener_hopf_factors)

PARAMS = HypergeometricParams(0.5, 0.1, 0.6, 0.1)
params_st = st.builds(HypergeometricParams, st.floats(0.05, 1.0), st.floats(0.05, 0.95),
                      st.floats(0.05, 1.0), st.floats(0.05, 0.95))


@settings(max_examples=50, deadline=None)
@given(params_st, st.floats(-0.04, 0.04))
def test_laplace_exponent_matches_gamma_product(p, z):
    ref = -float(mpmath.gammaprod([1 - p.beta + p.gamma - z, p.beta_hat + p.gamma_hat + z],
                                  [1 - p.beta - z, p.beta_hat + z]))
    np.testing.assert_allclose(laplace_exponent(p, z).real, ref, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("z", [0.2, -0.45])
def test_levy_measure_reproduces_exponent(z):
    # bounded variation without drift: psi(z) - psi(0) = int (e^{zx} - 1) Pi(dx)
    f = lambda x: np.expm1(z * x) * float(levy_density(PARAMS, x))
    total = integrate.quad(f, 0, 60, limit=400)[0] + integrate.quad(f, -60, 0, limit=400)[0]
    np.testing.assert_allclose(total, (laplace_exponent(PARAMS, z) - laplace_exponent(PARAMS, 0)).real, rtol=1e-6)


def test_levy_density_rejects_zero():
    with pytest.raises(ValidationError):
        levy_density(PARAMS, 0.0)


def test_kill_rate_and_mean():
    c = classify(PARAMS)
    np.testing.assert_allclose(c.kill_rate, -laplace_exponent(PARAMS, 0).real, rtol=1e-14)
    h = 1e-5
    deriv = (laplace_exponent(PARAMS, h) - laplace_exponent(PARAMS, -h)).real / (2 * h)
    np.testing.assert_allclose(laplace_exponent_derivative_at_zero(PARAMS), deriv, rtol=1e-8)
    assert c.longtime is Longtime.KILLED


def test_unkilled_longtime_follows_mean():
    p = HypergeometricParams(1.0, 0.3, 0.6, 0.4)
    c = classify(p)
    assert c.kill_rate == 0
    assert c.longtime is (Longtime.DRIFTS_PLUS if c.mean > 0 else Longtime.DRIFTS_MINUS)


@pytest.mark.parametrize("alpha,rho", [(math.sqrt(2), 0.45), (0.7, 0.3), (1.7, 0.55)])
def test_killed_stable_closed_form(alpha, rho):
    q = lamperti_stable("star", StableParams(alpha, rho))
    z = np.linspace(-0.95, alpha - 0.05, 20) + 0.3j
    gz = np.array([complex(mpmath.gamma(alpha - v) * mpmath.gamma(1 + v)) for v in z])
    ref = gz * np.sin(np.pi * (z - alpha * (1 - rho))) / np.pi
    np.testing.assert_allclose(laplace_exponent(q, z), ref, rtol=1e-10)


@settings(max_examples=30, deadline=None)
@given(params_st, st.floats(-0.04, 0.04), st.floats(-3, 3))
def test_wiener_hopf_product(p, x, y):
    z = complex(x, y)
    kappa, kappa_hat = wiener_hopf_factors(p, z)
    minus_kappa, _ = wiener_hopf_factors(p, -z)
    np.testing.assert_allclose(-laplace_exponent(p, z), minus_kappa * kappa_hat, rtol=1e-11)


def test_dual_reflects_exponent():
    np.testing.assert_allclose(laplace_exponent(dual(PARAMS), 0.3), laplace_exponent(PARAMS, -0.3), rtol=1e-14)


def test_conditioned_processes_are_not_killed():
    s = StableParams(math.sqrt(2), 0.45)
    assert classify(lamperti_stable("up", s)).longtime is Longtime.DRIFTS_PLUS
    assert classify(lamperti_stable("down", s)).longtime is Longtime.DRIFTS_MINUS
    assert classify(lamperti_stable("star", s)).longtime is Longtime.KILLED


@pytest.mark.parametrize("bad", [(1.2, 0.1, 0.5, 0.1), (0.5, 0.0, 0.5, 0.5), (0.5, 0.5, -0.1, 0.5)])
def test_inadmissible_parameters(bad):
    with pytest.raises(AdmissibilityError):
        HypergeometricParams(*bad)


def test_validate_accepts_sequences_and_mappings():
    assert validate((0.5, 0.1, 0.6, 0.1)) == PARAMS
    assert validate({"beta": 0.5, "gamma": 0.1, "beta_hat": 0.6, "gamma_hat": 0.1}) == PARAMS


@pytest.mark.parametrize("alpha,rho", [(2.5, 0.5), (1.5, 0.8), (0.5, 1.2)])
def test_stable_params_domain(alpha, rho):
    with pytest.raises((AdmissibilityError, DomainError)):
        StableParams(alpha, rho)
