import math

import numpy as np
import pytest
from scipy import integrate, stats
from scipy import special as sc

from levyexp.applications import (RadialSpec, entrance_law_up, entrance_law_up_mellin, excursion_entrance_law,
                                  last_passage_density, last_passage_mellin, lifetime_density_down,
                                  lifetime_spec, radial_entrance_law, radial_entrance_mellin, supremum_cdf,
                                  supremum_density, supremum_mellin)
from levyexp.errors import DomainError, ValidationError
from levyexp.mellin import mellin_full
from levyexp.oracle import SimulationConfig, mellin_invert_density, simulate_stable_supremum
from levyexp.process import StableParams
from levyexp.series import density

SQRT2 = math.sqrt(2)
STABLE = StableParams(SQRT2, 0.45)
STABLE_LOW = StableParams(1 / SQRT2, 0.4)


def log_quad(f, lo, hi):
    return integrate.quad(lambda u: math.exp(u) * float(f(math.exp(u))), lo, hi, limit=400, epsrel=1e-10)[0]


@pytest.mark.parametrize("alpha", [0.6, 0.7, 0.85])
def test_radial_entrance_one_dimension_is_folded_stable(alpha):
    # |Y_1| / 2 for a symmetric stable Y with E exp(i t Y_1) = exp(-|t|^alpha)
    xs = np.geomspace(0.05, 10, 8)
    np.testing.assert_allclose(radial_entrance_law(RadialSpec(alpha, 1), xs),
                               4 * stats.levy_stable.pdf(2 * xs, alpha, 0.0), rtol=1e-7)


def _isotropic_3d(r, alpha):
    v = integrate.quad(lambda k: k * math.exp(-k ** alpha), 0, np.inf, weight="sin", wvar=r, limit=400)[0]
    return v / (2 * math.pi ** 2 * r)


@pytest.mark.parametrize("alpha", [1.5, 1.3])
def test_radial_entrance_three_dimensions_matches_fourier(alpha):
    xs = [0.2, 0.7, 1.5, 3.0]
    ref = [8 * math.pi * (2 * x) ** 2 * _isotropic_3d(2 * x, alpha) for x in xs]
    np.testing.assert_allclose(radial_entrance_law(RadialSpec(alpha, 3), np.array(xs)), ref, rtol=1e-8)


@pytest.mark.parametrize("alpha,t", [(0.6, 0.5), (0.6, 2.0), (0.8, 1.0)])
def test_last_passage_cdf_matches_hitting_probability(alpha, t):
    # P(U_2 <= t) = P(Y_t never returns to the ball of radius 2)
    radial = RadialSpec(alpha, 1)
    cdf = integrate.quad(lambda u: last_passage_density(radial, u), 0, t, limit=200)[0]
    scale = t ** (1 / alpha)

    def escape(y):
        hit = sc.betainc((1 - alpha) / 2, alpha / 2, min(1.0, 4 / y ** 2))
        return (1 - hit) * stats.levy_stable.pdf(y / scale, alpha, 0.0) / scale

    ref = 2 * integrate.quad(escape, 2, np.inf, limit=200)[0]
    np.testing.assert_allclose(cdf, ref, rtol=1e-7)


def test_last_passage_radius_scaling():
    radial = RadialSpec(0.7, 2)
    t = np.array([0.3, 1.0, 4.0])
    r = 3.0
    k = (r / 2) ** radial.alpha
    np.testing.assert_allclose(last_passage_density(radial, t, radius=r), last_passage_density(radial, t / k) / k,
                               rtol=1e-10)


@pytest.mark.parametrize("radial", [RadialSpec(0.7, 2), RadialSpec(1.3, 3)])
def test_radial_series_match_mellin_inversion(radial):
    xs = np.geomspace(0.1, 10, 7)
    ref = mellin_invert_density(lambda s: radial_entrance_mellin(radial, s), xs, contour_re=0.5)
    np.testing.assert_allclose(radial_entrance_law(radial, xs), ref, rtol=1e-8)
    ref = mellin_invert_density(lambda s: last_passage_mellin(radial, s), xs, contour_re=0.5)
    np.testing.assert_allclose(last_passage_density(radial, xs), ref, rtol=1e-8)


@pytest.mark.parametrize("alpha,d", [(1.5, 3), (SQRT2, 2), (0.8, 2)])
def test_radial_routes_agree(alpha, d):
    radial = RadialSpec(alpha, d)
    xs = np.geomspace(0.05, 20, 9)
    np.testing.assert_allclose(radial_entrance_law(radial, xs, method="transport"), radial_entrance_law(radial, xs),
                               rtol=1e-8)


def test_radial_spec_domain():
    with pytest.raises((DomainError, ValidationError)):
        RadialSpec(1.2, 1)


def test_supremum_against_skeleton_simulation():
    # rational alpha: the pole series is unavailable, the inversion route is used
    stable = StableParams(1.5, 0.5)
    s = simulate_stable_supremum(stable, 10_000, SimulationConfig(n_paths=20_000, rng_seed=7))
    xs = np.array([0.5, 1.0, 2.0])
    exact = supremum_cdf(stable, xs, method="inversion")
    for x, ex in zip(xs, exact):
        mc = (s <= x).mean()
        se = math.sqrt(mc * (1 - mc) / s.size)
        # the skeleton misses part of the supremum, so its CDF sits slightly above
        assert -3 * se < mc - ex < 0.01 + 3 * se


@pytest.mark.parametrize("stable", [STABLE, STABLE_LOW])
def test_inversion_routes_match_series(stable):
    xs = np.array([0.5, 1.0, 2.0])
    for f in (supremum_density, lifetime_density_down):
        np.testing.assert_allclose(f(stable, xs, method="inversion"), f(stable, xs), rtol=1e-6)
    np.testing.assert_allclose(entrance_law_up(stable, xs, method="inversion"), entrance_law_up(stable, xs),
                               rtol=1e-6)
    np.testing.assert_allclose(supremum_cdf(stable, xs, method="inversion"), supremum_cdf(stable, xs), rtol=1e-8)


@pytest.mark.parametrize("stable", [STABLE, STABLE_LOW])
def test_supremum_cdf_integrates_density(stable):
    a, b = 0.4, 2.5
    mass = log_quad(lambda x: supremum_density(stable, x), math.log(a), math.log(b))
    np.testing.assert_allclose(supremum_cdf(stable, b) - supremum_cdf(stable, a), mass, rtol=1e-7)


def test_supremum_mellin_matches_quadrature():
    s = 1.5
    val = log_quad(lambda x: x ** (s - 1) * supremum_density(STABLE, x), -30, 30)
    np.testing.assert_allclose(val, supremum_mellin(STABLE, s).real, rtol=1e-6)


@pytest.mark.parametrize("stable", [STABLE, STABLE_LOW])
def test_entrance_law_up_mellin(stable):
    for s in (0.3, 0.6):
        val = log_quad(lambda x: x ** (s - 1) * entrance_law_up(stable, x), -30, 30)
        np.testing.assert_allclose(val, entrance_law_up_mellin(stable, s).real, rtol=1e-6)


def test_entrance_law_methods_agree():
    xs = np.array([0.3, 1.0, 2.0])
    np.testing.assert_allclose(entrance_law_up(STABLE, xs, method="series"), entrance_law_up(STABLE, xs),
                               rtol=1e-8)


def test_excursion_law_reweights_entrance_law():
    xs = np.array([0.5, 1.0, 3.0])
    a, r = STABLE_LOW.alpha, STABLE_LOW.rho
    np.testing.assert_allclose(excursion_entrance_law(STABLE_LOW, xs),
                               xs ** (-a * (1 - r)) * entrance_law_up(STABLE_LOW, xs), rtol=1e-14)


def test_lifetime_density_is_exponential_functional():
    t = np.array([0.2, 1.0, 5.0])
    np.testing.assert_allclose(lifetime_density_down(STABLE, t), density(lifetime_spec(STABLE), t), rtol=1e-14)
    moment = log_quad(lambda x: x ** 0.5 * lifetime_density_down(STABLE_LOW, x), -30, 30)
    np.testing.assert_allclose(moment, mellin_full(lifetime_spec(STABLE_LOW), 1.5).real, rtol=1e-6)


def test_alpha_one_rejected():
    with pytest.raises((DomainError, ValidationError)):
        supremum_density(StableParams(1.0, 0.5), 1.0)
