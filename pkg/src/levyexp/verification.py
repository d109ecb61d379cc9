"""Verification suites shared by the ``verify`` command and the test suite.

Each suite returns a list of :class:`CheckResult`; a check passes when its
``value`` is within ``tolerance`` (or, for p-values, above it).  Runtime
budgets are reported as separate checks.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from .applications import (RadialSpec, entrance_law_up, excursion_entrance_law,
                           last_passage_density, last_passage_mellin, lifetime_density_down,
                           radial_entrance_law, radial_entrance_mellin, radial_mellin,
                           supremum_density)
from .mellin import ExpFunctionalSpec, identity_residual, mellin_full, reflection_identity_residual
from .oracle import (SimulationConfig, mc_moment, mellin_invert, mellin_invert_density,
                     simulate_exponential_functional)
from .process import (HypergeometricParams, StableParams, lamperti_stable, laplace_exponent,
                      wiener_hopf_factors)
from .series import coeff_a, coeff_b, coeff_c, density, mellin_residue
from .special import double_gamma_identity_residual

__all__ = ["CheckResult", "MassResult", "SUITES", "run_suite", "log_space_mass"]

SQRT2, SQRT3 = math.sqrt(2), math.sqrt(3)
GOLDEN = (1 + math.sqrt(5)) / 2


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""


def _at_most(name, value, tol, detail=""):
    value = float(value)
    return CheckResult(name, value, tol, bool(value <= tol), detail)


def _at_least(name, value, tol, detail=""):
    value = float(value)
    return CheckResult(name, value, tol, bool(value > tol), detail)


def _spec(b, g, bh, gh, alpha):
    return ExpFunctionalSpec(HypergeometricParams(b, g, bh, gh), alpha)


def _runtime(name, start, limit):
    return _at_most(f"{name}: runtime [s]", time.perf_counter() - start, limit)


# ---------------------------------------------------------------------------
# normalisation in log space with power-law tails
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MassResult:
    total: float
    body: float
    lower_tail: float
    upper_tail: float
    interval: tuple


def _tail(g, end, inward, h=0.25):
    """Mass beyond ``end`` of ``g(u)`` assuming exponential decay in ``u``
    (a power law in ``x``), with the rate read off over a step ``h``."""
    ge = g(end)
    if ge == 0:
        return 0.0
    gi = g(end + inward * h)
    if not gi > ge:
        return math.inf
    return ge * h / math.log(gi / ge)


def log_space_mass(f, lo=-12.0, hi=12.0, epsrel=1e-8, tail_tol=1e-6, step=6.0, max_steps=4):
    """Total mass of a density ``f`` on ``(0, inf)``.

    Integrates ``x f(x)`` over ``u = log x`` in ``[lo, hi]`` by adaptive
    quadrature.  Each end is pushed outwards by ``step`` (at most
    ``max_steps`` times) while the extrapolated tail exceeds ``tail_tol``;
    the remaining tails are added assuming power-law decay.
    """
    def g(u):
        x = math.exp(u)
        return float(f(x)) * x

    def piece(a, b):
        return integrate.quad(g, a, b, limit=200, epsabs=0.0, epsrel=epsrel)[0]

    body = piece(lo, hi)
    low, high = _tail(g, lo, +1), _tail(g, hi, -1)
    for _ in range(max_steps):
        if low <= tail_tol:
            break
        body += piece(lo - step, lo)
        lo -= step
        low = _tail(g, lo, +1)
    for _ in range(max_steps):
        if high <= tail_tol:
            break
        body += piece(hi, hi + step)
        hi += step
        high = _tail(g, hi, -1)
    return MassResult(body + low + high, body, low, high, (lo, hi))


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

def check_double_gamma():
    t0 = time.perf_counter()
    taus = (0.4, 1.0, SQRT2, 2.7)
    rng = np.random.default_rng(0)
    radius = 10 * np.sqrt(rng.random(20))
    zs = np.concatenate([[0.3, 0.7, 1.5, 2.5, 5.5],
                         radius * np.exp(2j * np.pi * rng.random(20))])
    out = []
    for which in ("shift_one", "shift_tau", "modular"):
        worst = max(float(np.max(double_gamma_identity_residual(t, zs, which))) for t in taus)
        out.append(_at_most(f"double gamma {which}", worst, 1e-9, f"{len(zs)} z x {len(taus)} tau"))
    out.append(_runtime("double gamma", t0, 5.0))
    return out


def _mellin_specs():
    stable = StableParams(SQRT2, 0.45)
    return {
        "(0.3,0.4,0.5,0.6; 1.5)": _spec(0.3, 0.4, 0.5, 0.6, 1.5),
        "killed stable (sqrt2, 0.45)": ExpFunctionalSpec(lamperti_stable("star", stable), SQRT2),
        "stable conditioned up (sqrt2, 0.45)": ExpFunctionalSpec(lamperti_stable("up", stable), SQRT2),
        "(0.5,0.1,0.6,0.1; sqrt2)": _spec(0.5, 0.1, 0.6, 0.1, SQRT2),
    }


def check_mellin():
    t0 = time.perf_counter()
    out = []
    rng = np.random.default_rng(1)
    for label, spec in _mellin_specs().items():
        lo, hi = spec.cramer_strip
        pts = lo + (hi - lo) * (0.02 + 0.96 * rng.random(50)) + 1j * rng.uniform(-2, 2, 50)
        for which in ("plus_one", "plus_delta", "alpha_map"):
            worst = max(identity_residual(spec, s, which) for s in pts)
            out.append(_at_most(f"Mellin {which} {label}", worst, 1e-9, "50 strip points"))
    out.append(_runtime("Mellin identities", t0, 10.0))
    return out


def check_psi():
    out = []
    for a, r in ((SQRT2, 0.45), (0.7, 0.3)):
        stable = StableParams(a, r)
        params = lamperti_stable("star", stable)
        zs = np.linspace(-0.95, a - 0.05, 20) + 0.3j
        closed = (np.vectorize(lambda z: complex(
            math.pi ** -1 * _cgamma(a - z) * _cgamma(1 + z) * np.sin(np.pi * (z - a * (1 - r)))))(zs))
        got = laplace_exponent(params, zs)
        err = float(np.max(np.abs(got - closed) / np.abs(closed)))
        out.append(_at_most(f"psi closed form, killed stable ({a:.4g}, {r})", err, 1e-10, "20 points"))
    for label, spec in _mellin_specs().items():
        zs = np.linspace(-0.5, 0.5, 20) + 0.2j
        k, kh = wiener_hopf_factors(spec.params, -zs)[0], wiener_hopf_factors(spec.params, zs)[1]
        psi = laplace_exponent(spec.params, zs)
        err = float(np.max(np.abs(k * kh + psi) / np.abs(psi)))
        out.append(_at_most(f"Wiener-Hopf product {label}", err, 1e-11, "20 points"))
    return out


def _cgamma(z):
    from scipy.special import loggamma
    return np.exp(loggamma(complex(z)))


def check_residues():
    t0 = time.perf_counter()
    out = []
    specs = {"gamma+gamma_hat<1 (0.5,0.1,0.6,0.1; sqrt2)": _spec(0.5, 0.1, 0.6, 0.1, SQRT2),
             "gamma+gamma_hat>1 (1,0.9,0.7,0.85; sqrt3)": _spec(1.0, 0.9, 0.7, 0.85, SQRT3)}
    for label, spec in specs.items():
        errs = {}
        if spec.params.beta < 1:
            errs["a"] = max(abs(mellin_residue(spec, -n) - coeff_a(spec, n)) / abs(coeff_a(spec, n))
                            for n in range(6))
        errs["b"] = max(abs(mellin_residue(spec, spec.poles.minus(m, n)) / coeff_b(spec, m, n).value - 1)
                        for m, n in spec.poles.smallest("minus", 6))
        errs["c"] = max(abs(mellin_residue(spec, spec.poles.plus(m, n)) / coeff_c(spec, m, n).value + 1)
                        for m, n in spec.poles.smallest("plus", 6))
        for fam, err in errs.items():
            out.append(_at_most(f"residues {fam} {label}", err, 1e-6, "6 smallest poles"))
    out.append(_runtime("residues", t0, 30.0))
    return out


def _inversion_specs():
    return {"(0.5,0.1,0.6,0.1; sqrt2)": _spec(0.5, 0.1, 0.6, 0.1, SQRT2),
            "(1,0.9,0.7,0.85; sqrt3)": _spec(1.0, 0.9, 0.7, 0.85, SQRT3),
            "(0.2,0.35,1.2,0.3; golden)": _spec(0.2, 0.35, 1.2, 0.3, GOLDEN)}


def check_inversion():
    t0 = time.perf_counter()
    xs = np.geomspace(0.05, 20, 25)
    out = []
    for label, spec in _inversion_specs().items():
        ref = mellin_invert(spec, xs).value
        err = float(np.max(np.abs(density(spec, xs) / ref - 1)))
        out.append(_at_most(f"series vs inversion {label}", err, 1e-6, "25 points in [0.05, 20]"))
    out.append(_runtime("series vs inversion", t0, 60.0))
    return out


MC_SPEC = (0.4, 0.15, 1.2, 0.1, SQRT2 / 3)


def _chi2_pvalue(spec, samples, n_bins=40, seed=11):
    """Chi-square test of ``samples`` against the series density, with bin
    edges at quantiles of an independent pilot sample."""
    pilot = simulate_exponential_functional(spec, SimulationConfig(n_paths=20_000, rng_seed=seed))
    edges = np.unique(np.quantile(pilot, np.linspace(0, 1, n_bins + 1)[1:-1]))
    nodes, weights = np.polynomial.legendre.leggauss(20)
    probs = []
    lo = 0.0
    for hi in edges:
        x = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
        probs.append(0.5 * (hi - lo) * float(np.dot(weights, density(spec, x))))
        lo = hi
    probs.append(1.0 - sum(probs))
    counts = np.bincount(np.searchsorted(edges, samples), minlength=len(probs))
    expected = np.asarray(probs) * samples.size
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    return float(stats.chi2.sf(chi2, len(probs) - 1)), chi2


def check_monte_carlo(n_moment=100_000, n_hist=1_000_000):
    t0 = time.perf_counter()
    spec = _spec(*MC_SPEC)
    out = []
    samples = simulate_exponential_functional(spec, SimulationConfig(n_paths=n_moment, rng_seed=1))
    exact_mean = -1.0 / float(np.real(laplace_exponent(spec.params, -spec.alpha)))
    s_mid = 1 + spec.theta / 2
    for label, s, exact in (("E[I]", 2.0, exact_mean),
                            (f"E[I^{s_mid - 1:.3f}]", s_mid, float(np.real(mellin_full(spec, s_mid))))):
        est = mc_moment(samples, s)
        z = abs(est.mean - exact) / est.std_error
        out.append(_at_most(f"Monte Carlo {label} |z-score|", z, 3.0,
                            f"estimate {est.mean:.6g} +- {est.std_error:.2g}, exact {exact:.6g}"))
    big = simulate_exponential_functional(spec, SimulationConfig(n_paths=n_hist, rng_seed=2))
    p, chi2 = _chi2_pvalue(spec, big)
    out.append(_at_least("Monte Carlo chi-square p-value", p, 1e-3, f"chi2 {chi2:.1f}, {n_hist} samples"))
    out.append(_runtime("Monte Carlo", t0, 300.0))
    return out


def _normalization_cases():
    up = StableParams(SQRT2, 0.45)
    down = StableParams(1 / SQRT2, 0.4)
    spec = _spec(0.5, 0.1, 0.6, 0.1, SQRT2)
    return {
        "exponential functional (0.5,0.1,0.6,0.1; sqrt2)": lambda x: density(spec, x),
        "supremum S_1 (sqrt2, 0.45)": lambda x: supremum_density(up, x),
        "conditioned-up entrance law (sqrt2, 0.45)": lambda x: entrance_law_up(up, x),
        "x^(alpha(1-rho)) q_1 (1/sqrt2, 0.4)":
            lambda x: x ** (down.alpha * (1 - down.rho)) * excursion_entrance_law(down, x),
        "lifetime T (1/sqrt2, 0.4)": lambda x: lifetime_density_down(down, x),
        "radial entrance law (1.5, 3)": lambda x: radial_entrance_law(RadialSpec(1.5, 3), x),
        "last passage U_2 (0.7, 2)": lambda x: last_passage_density(RadialSpec(0.7, 2), x),
    }


def check_normalization():
    t0 = time.perf_counter()
    out = []
    for label, f in _normalization_cases().items():
        res = log_space_mass(f)
        out.append(_at_most(f"normalisation {label}", abs(res.total - 1), 1e-5,
                            f"log-x range {res.interval}, tails {res.lower_tail:.1e}/{res.upper_tail:.1e}"))
    out.append(_runtime("normalisation", t0, 60.0))
    return out


RADIAL_CASES = ((0.8, 2), (1.3, 3), (1.5, 5))


def check_radial():
    out = []
    rng = np.random.default_rng(3)
    xs = np.geomspace(0.05, 20, 25)
    for a, d in RADIAL_CASES:
        radial = RadialSpec(a, d)
        spec = radial.exp_spec()
        lo, hi = spec.cramer_strip
        s = lo + (hi - lo) * (0.02 + 0.96 * rng.random(20)) + 1j * rng.uniform(-2, 2, 20)
        general = mellin_full(spec, s)
        err = float(np.max(np.abs(general / radial_mellin(radial, s) - 1)))
        out.append(_at_most(f"radial Mellin gamma ratio ({a}, {d})", err, 1e-10, "20 strip points"))
        ref = mellin_invert_density(lambda z: radial_entrance_mellin(radial, z), xs, contour_re=0.5)
        err = float(np.max(np.abs(radial_entrance_law(radial, xs) / ref - 1)))
        out.append(_at_most(f"radial entrance law vs inversion ({a}, {d})", err, 1e-8, "25 points"))
        ref = mellin_invert_density(lambda z: last_passage_mellin(radial, z), xs, contour_re=1.0)
        err = float(np.max(np.abs(last_passage_density(radial, xs) / ref - 1)))
        out.append(_at_most(f"last passage vs inversion ({a}, {d})", err, 1e-8, "25 points"))
    return out


ASYMPTOTIC_SPEC = (0.9, 0.1, 0.6, 0.1, 1 / SQRT2)


def check_asymptotics():
    # alpha < 1 keeps the first correction at large x down to x^-1
    spec = _spec(*ASYMPTOTIC_SPEC)
    b, g = spec.params.beta, spec.params.gamma
    a0 = coeff_a(spec, 0)
    expected = min(1.0, (1 - b + g) * spec.delta)
    x1, x2 = 1e-5, 1e-4
    d1, d2 = (abs(float(density(spec, x)) - a0) for x in (x1, x2))
    slope = math.log(d2 / d1) / math.log(x2 / x1)
    out = [_at_most("small-x slope of |p - a_0|", abs(slope / expected - 1), 0.1,
                    f"slope {slope:.4f}, next exponent {expected:.4f}")]
    x = 1e3
    c00 = coeff_c(spec, 0, 0).value
    lead = x ** (1 + spec.theta) * float(density(spec, x))
    out.append(_at_most("x^(1+theta) p(x) -> c_00 at x=1e3", abs(lead / c00 - 1), 0.01,
                        f"{lead:.6g} vs {c00:.6g}"))
    # for alpha > 1 the first corrections x^-delta and x^-1 are visible at 1e3
    spec = _spec(0.5, 0.1, 0.6, 0.1, SQRT2)
    three = (coeff_c(spec, 0, 0).value + coeff_c(spec, 1, 0).value * x ** -spec.delta
             + coeff_c(spec, 0, 1).value / x)
    lead = x ** (1 + spec.theta) * float(density(spec, x))
    out.append(_at_most("x^(1+theta) p(x) vs c_00 + c_10 x^-delta + c_01 x^-1 at x=1e3 (alpha=sqrt2)",
                        abs(lead / three - 1), 1e-3, f"{lead:.6g} vs {three:.6g}"))
    return out


def check_reflection():
    out = []
    for label, spec in (("(0.5,0.1,0.6,0.1; sqrt2)", _spec(0.5, 0.1, 0.6, 0.1, SQRT2)),
                        ("(1,0.9,0.7,0.85; sqrt3)", _spec(1.0, 0.9, 0.7, 0.85, SQRT3))):
        worst = max(reflection_identity_residual(spec, k, u) for k in (1, 2) for u in (0.5, 2.0, 5.0))
        out.append(_at_most(f"reflection identity {label}", worst, 1e-7, "k in {1,2}, u in {0.5,2,5}"))
    return out


SUITES = {
    "double-gamma": (check_double_gamma,),
    "mellin": (check_mellin,),
    "psi": (check_psi,),
    "residues": (check_residues,),
    "inversion": (check_inversion,),
    "monte-carlo": (check_monte_carlo,),
    "normalization": (check_normalization,),
    "radial": (check_radial,),
    "asymptotics": (check_asymptotics,),
    "reflection": (check_reflection,),
}
SUITES["identities"] = SUITES["double-gamma"] + SUITES["mellin"] + SUITES["reflection"]
SUITES["all"] = tuple(f for key in list(SUITES) if key != "identities" for f in SUITES[key])


def run_suite(name):
    if name not in SUITES:
        from .errors import ValidationError
        raise ValidationError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    results = []
    for check in SUITES[name]:
        results.extend(check())
    return results
