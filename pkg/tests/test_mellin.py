import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from levyexp.errors import AdmissibilityError, PoleError
from levyexp.mellin import (ExpFunctionalSpec, distributional_identity_residual, identity_residual, mellin_full,
                            mellin_M, mellin_M_mp, reflection_identity_residual)
from levyexp.process import HypergeometricParams, StableParams, lamperti_stable, laplace_exponent
from levyexp.series import density

SQRT2 = math.sqrt(2)


def make(b, g, bh, gh, alpha):
    return ExpFunctionalSpec(HypergeometricParams(b, g, bh, gh), alpha)


SPECS = [
    make(0.5, 0.1, 0.6, 0.1, SQRT2),
    make(0.3, 0.4, 0.5, 0.6, 1.5),
    make(1.0, 0.9, 0.7, 0.85, math.sqrt(3)),
    ExpFunctionalSpec(lamperti_stable("star", StableParams(SQRT2, 0.45)), SQRT2),
]


@pytest.mark.parametrize("spec", SPECS)
def test_normalized_at_one(spec):
    np.testing.assert_allclose(mellin_full(spec, 1.0), 1.0, atol=1e-13)


@pytest.mark.parametrize("spec", SPECS)
def test_moment_recursion_from_exponent(spec):
    # E[I^s] = s / (-psi(-alpha s)) E[I^(s-1)]
    hi = spec.cramer_strip[1]
    for s in np.linspace(0.1, hi - 1.05, 5) if hi > 1.2 else [0.1, 0.2]:
        rhs = -s / laplace_exponent(spec.params, -spec.alpha * s) * mellin_full(spec, s)
        np.testing.assert_allclose(mellin_full(spec, s + 1), rhs, rtol=1e-10)


def test_mean_is_minus_inverse_exponent():
    spec = SPECS[0]
    np.testing.assert_allclose(mellin_full(spec, 2.0).real, -1 / laplace_exponent(spec.params, -spec.alpha).real,
                               rtol=1e-10)


@pytest.mark.parametrize("s", [0.6, 1.5, 2.5])
def test_moments_match_density_quadrature(s):
    spec = make(0.4, 0.15, 1.2, 0.1, SQRT2 / 3)
    f = lambda u: math.exp(s * u) * float(density(spec, math.exp(u)))
    val = integrate.quad(f, -40, 20, limit=400, epsrel=1e-10)[0]
    np.testing.assert_allclose(val, mellin_full(spec, s).real, rtol=1e-6)


strip_points = st.builds(complex, st.floats(0.05, 1.35), st.floats(-2, 2))


@settings(max_examples=40, deadline=None)
@given(strip_points, st.sampled_from(["plus_one", "plus_delta"]))
def test_functional_identities(s, which):
    assert identity_residual(SPECS[0], s, which) < 1e-9


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 1.3))
def test_distributional_identity(s):
    assert distributional_identity_residual(SPECS[0], s) < 1e-9


@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("u", [0.5, 2.0, 5.0])
def test_reflection_identity(k, u):
    assert reflection_identity_residual(SPECS[0], k, u) < 1e-7


@pytest.mark.parametrize("s", [0.4 + 0.7j, 1.1 - 2j, -0.3 + 0.5j])
def test_double_precision_matches_mpmath(s):
    np.testing.assert_allclose(mellin_M(SPECS[0], s), complex(mellin_M_mp(SPECS[0], s)), rtol=1e-10)


def test_pole_raises():
    spec = SPECS[0]
    with pytest.raises(PoleError):
        mellin_M(spec, spec.cramer_strip[1])


def test_cramer_strip_and_tilde():
    spec = SPECS[0]
    np.testing.assert_allclose(spec.cramer_strip, (0.0, 1 + 0.6 / SQRT2))
    np.testing.assert_allclose(spec.theta, 0.6 / SQRT2)
    assert spec.tilde_params is not None


def test_cramer_condition_required():
    with pytest.raises(AdmissibilityError):
        make(0.5, 0.1, 0.0, 0.1, 1.0)
    with pytest.raises(AdmissibilityError):
        make(0.5, 0.1, 0.6, 0.1, -1.0)
