import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyexp.errors import DomainError, RationalAlphaError
from levyexp.mellin import ExpFunctionalSpec, mellin_full
from levyexp.oracle import mellin_invert_density
from levyexp.process import HypergeometricParams
from levyexp.series import (alpha_diagnostic, coeff_a, coeff_b, coeff_c, contour_residue, density,
                            density_asymptotic, mellin_residue)

SQRT2 = math.sqrt(2)
SPEC = ExpFunctionalSpec(HypergeometricParams(0.5, 0.1, 0.6, 0.1), SQRT2)
SPEC_WIDE = ExpFunctionalSpec(HypergeometricParams(1.0, 0.9, 0.7, 0.85), math.sqrt(3))


@settings(max_examples=25, deadline=None)
@given(st.builds(complex, st.floats(-3, 3), st.floats(-3, 3)))
def test_contour_residue_of_simple_pole(z0):
    np.testing.assert_allclose(contour_residue(lambda z: 2.5 / (z - z0) + z ** 2, z0), 2.5, rtol=1e-12)


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_coefficients_a_are_residues(n):
    np.testing.assert_allclose(coeff_a(SPEC, n), mellin_residue(SPEC, -n).real, rtol=1e-8)


def test_no_a_family_when_beta_is_one():
    assert coeff_a(SPEC_WIDE, 0) == 0


@pytest.mark.parametrize("spec", [SPEC, SPEC_WIDE])
@pytest.mark.parametrize("m,n", [(0, 0), (1, 0), (0, 1), (2, 1)])
def test_coefficients_b_c_are_residues(spec, m, n):
    np.testing.assert_allclose(coeff_b(spec, m, n).value, mellin_residue(spec, spec.poles.minus(m, n)).real,
                               rtol=1e-7)
    np.testing.assert_allclose(coeff_c(spec, m, n).value, -mellin_residue(spec, spec.poles.plus(m, n)).real,
                               rtol=1e-7)


@pytest.mark.parametrize("spec", [SPEC, SPEC_WIDE])
def test_density_matches_mellin_inversion(spec):
    xs = np.geomspace(0.05, 20, 9)
    ref = mellin_invert_density(lambda s: mellin_full(spec, s), xs, contour_re=0.5)
    np.testing.assert_allclose(density(spec, xs), ref, rtol=1e-7)


def test_density_tends_to_first_coefficient_at_zero():
    xs = np.array([1e-4, 1e-6, 1e-8])
    err = np.abs(density(SPEC, xs) - coeff_a(SPEC, 0))
    slope = np.diff(np.log(err)) / np.diff(np.log(xs))
    np.testing.assert_allclose(slope, (1 - 0.5 + 0.1) / SQRT2, rtol=0.05)


def test_leading_tail_term():
    x = 1e4
    lead = density_asymptotic(SPEC, x, 1, "infinity")
    np.testing.assert_allclose(lead, coeff_c(SPEC, 0, 0).value * x ** (-SPEC.cramer_strip[1]), rtol=1e-12)
    np.testing.assert_allclose(density(SPEC, x), density_asymptotic(SPEC, x, 6, "infinity"), rtol=1e-6)


def test_density_is_positive_and_shaped():
    xs = np.geomspace(1e-3, 1e3, 40)
    p = density(SPEC, xs)
    assert np.all(p > 0)
    np.testing.assert_equal(density(SPEC, 1.0).shape, ())


def test_density_rejects_nonpositive():
    with pytest.raises(DomainError):
        density(SPEC, 0.0)


def test_alpha_diagnostic_verdicts():
    assert alpha_diagnostic(1.5).verdict == "rational"
    assert alpha_diagnostic(SQRT2).verdict == "safe"
    assert alpha_diagnostic(1.5 + 1e-10).verdict == "suspect"


def test_rational_alpha_refused():
    spec = ExpFunctionalSpec(HypergeometricParams(0.5, 0.1, 0.6, 0.1), 1.5)
    with pytest.raises(RationalAlphaError):
        density(spec, 1.0, method="convergent")


def test_gamma_sum_one_refused():
    spec = ExpFunctionalSpec(HypergeometricParams(0.3, 0.4, 0.5, 0.6), SQRT2)
    with pytest.raises(DomainError):
        density(spec, 1.0)
