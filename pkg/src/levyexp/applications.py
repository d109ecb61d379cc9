"""Stable-process quantities expressed through exponential functionals.

* the supremum ``S_1`` of a stable process on ``[0, 1]``,
* the entrance laws of the stable process conditioned to stay positive and
  of the excursion measure of the process reflected at its infimum,
* the lifetime of the stable process conditioned to hit zero continuously,
* the entrance law and the last passage times of the radial part
  ``R = |Y| / 2`` of a symmetric stable process in dimension ``d``.

Throughout ``rho = P(Y_1 > 0)`` and the characteristic exponent of ``Y`` is
``exp(pi i alpha (1 - 2 rho) sgn(z) / 2) |z|^alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import mpmath
import numpy as np
from mpmath.ctx_mp import MPContext
from scipy import integrate
from scipy import special as sc

from .errors import ConvergenceError, DomainError, PoleError, ValidationError
from .mellin import ExpFunctionalSpec, mellin_full
from .oracle import mellin_invert_density
from .process import HypergeometricParams, StableParams, lamperti_stable
from .series import density

__all__ = [
    "RadialSpec",
    "supremum_spec",
    "supremum_density",
    "supremum_cdf",
    "supremum_mellin",
    "entrance_up_spec",
    "mean_up",
    "entrance_law_up",
    "entrance_law_up_mellin",
    "excursion_entrance_law",
    "lifetime_spec",
    "lifetime_density_down",
    "radial_mellin",
    "radial_entrance_law",
    "radial_entrance_mellin",
    "ladder_height_mean",
    "ladder_factor_mellin",
    "last_passage_mellin",
    "last_passage_density",
    "exp_functional_cdf",
]

_MAX_DPS = 400


def _check_alpha(alpha):
    if abs(alpha - 1) < 1e-12:
        raise DomainError("alpha = 1 is excluded (the series expansions break down there)")


def _positive(x, name="x"):
    xs = np.asarray(x, dtype=float)
    if np.any(~(xs > 0)):
        raise DomainError(f"{name} must be positive")
    return xs


def _shape(out):
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# supremum of a stable process
# ---------------------------------------------------------------------------

def _exp_density(spec, y, method):
    """Density of ``I`` by the pole series (``auto``/``convergent``) or by
    Mellin inversion (``inversion``, which also covers rational alpha)."""
    if method == "inversion":
        y = np.asarray(y, dtype=float)
        c = 0.5 * (spec.cramer_strip[0] + spec.cramer_strip[1])
        return mellin_invert_density(spec, y.ravel(), contour_re=c).reshape(y.shape)
    return density(spec, y, method=method)


def _exp_survival_inversion(spec, y):
    """``P(I > y)`` from ``int y^(s-1) P(I > y) dy = E[I^s] / s``, ``0 < Re s < theta``."""
    y = np.asarray(y, dtype=float)
    out = mellin_invert_density(lambda s: mellin_full(spec, s + 1) / s, y.ravel(), contour_re=0.5 * spec.theta)
    return out.reshape(y.shape)


def supremum_spec(stable):
    """Spec of ``I(alpha, xi)`` with ``S_1^(-alpha)`` equal in law to it."""
    a, r = stable.alpha, stable.rho
    return ExpFunctionalSpec(HypergeometricParams(a * r, a * r, a * r, a * (1 - r)), a)


def supremum_density(stable, x, method="auto"):
    """Density of ``S_1 = sup_{t <= 1} Y_t``: ``alpha x^(-1-alpha) p(x^(-alpha))``."""
    _check_alpha(stable.alpha)
    xs = _positive(x)
    a = stable.alpha
    p = _exp_density(supremum_spec(stable), xs ** (-a), method)
    return _shape(np.asarray(a * xs ** (-1 - a) * p))


def supremum_mellin(stable, s):
    """``E[S_1^(s-1)] = M(1 - (s-1)/alpha)``, finite for ``1 - alpha rho < Re s < 1 + alpha``."""
    spec = supremum_spec(stable)
    return mellin_full(spec, 1 - (np.asarray(s, dtype=complex) - 1) / stable.alpha)


def exp_functional_cdf(spec, x, method="auto"):
    """``P(I <= x)`` by quadrature of the series density on a log scale, or by
    Mellin inversion of the survival function when ``method="inversion"``."""
    xs = _positive(x)
    if method == "inversion":
        return _shape(np.asarray(1.0 - _exp_survival_inversion(spec, xs)))

    def f(u):
        y = math.exp(u)
        return float(density(spec, y, method=method)) * y

    out = []
    for v in xs.ravel():
        # below y0 the density behaves like y^k with k >= 0, whose mass is bounded by y0 p(y0) / (k+1)
        lo = math.log(v) - 40.0
        val, _ = integrate.quad(f, lo, math.log(v), limit=200, epsabs=1e-12, epsrel=1e-10)
        out.append(val + f(lo))
    return _shape(np.array(out).reshape(xs.shape))


def supremum_cdf(stable, x, method="auto"):
    """``P(S_1 <= x) = P(I >= x^(-alpha))``."""
    _check_alpha(stable.alpha)
    xs = _positive(x)
    return _shape(np.asarray(1.0 - exp_functional_cdf(supremum_spec(stable), xs ** (-stable.alpha), method)))


# ---------------------------------------------------------------------------
# entrance laws and lifetimes
# ---------------------------------------------------------------------------

def entrance_up_spec(stable):
    return ExpFunctionalSpec(lamperti_stable("up", stable), stable.alpha)


def mean_up(stable):
    """``E[xi_1]`` for the process attached to ``Y`` conditioned to stay positive."""
    a, r = stable.alpha, stable.rho
    return math.gamma(a * r) * math.gamma(1 + a * (1 - r))


def entrance_law_up(stable, x, method="transport"):
    """Density at time 1 of ``Y`` conditioned to stay positive, started at 0.

    ``Y_1^alpha`` is distributed as ``1/I`` size-biased by ``1/I``, so the
    density is ``x^(-1) p(x^(-alpha)) / E[xi_1]`` with ``p`` the density of
    ``I(alpha, xi)``.  ``method="transport"`` evaluates ``p`` with
    :func:`levyexp.series.density`, ``method="series"`` restricts it to the
    convergent double series and ``method="inversion"`` inverts its Mellin
    transform (usable for rational alpha).
    """
    _check_alpha(stable.alpha)
    xs = _positive(x)
    routes = {"transport": "auto", "series": "convergent", "inversion": "inversion"}
    if method not in routes:
        raise ValidationError(f"method must be one of {sorted(routes)}, got {method!r}")
    p = _exp_density(entrance_up_spec(stable), xs ** (-stable.alpha), routes[method])
    return _shape(np.asarray(p / (xs * mean_up(stable))))


def entrance_law_up_mellin(stable, s):
    """``int x^(s-1) p_1^up(x) dx = M((1 - s)/alpha) / (alpha E[xi_1])`` for ``-alpha < Re s < 1 + alpha rho``."""
    spec = entrance_up_spec(stable)
    u = (1 - np.asarray(s, dtype=complex)) / stable.alpha
    return mellin_full(spec, u) / (stable.alpha * mean_up(stable))


def excursion_entrance_law(stable, x, method="transport"):
    """Entrance law at time 1 of the excursions of ``Y`` reflected at its infimum."""
    xs = _positive(x)
    return _shape(np.asarray(xs ** (-stable.alpha * (1 - stable.rho)) * entrance_law_up(stable, xs, method)))


def lifetime_spec(stable):
    """Spec of ``I(alpha, xi)`` equal in law to the lifetime of ``Y`` conditioned
    to hit zero continuously (started at 1)."""
    a, r = stable.alpha, stable.rho
    return ExpFunctionalSpec(HypergeometricParams(1.0, a * (1 - r), 1.0, a * r), a)


def lifetime_density_down(stable, t, method="auto"):
    _check_alpha(stable.alpha)
    return _shape(np.asarray(_exp_density(lifetime_spec(stable), _positive(t, "t"), method)))


# ---------------------------------------------------------------------------
# power series from explicit residues
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Family:
    """Terms ``coef(k) * x^(offset + slope k)`` for ``k >= start``.

    ``log_coef(k)`` returns ``(log_envelope, factor)`` with
    ``coef = factor * exp(log_envelope)`` and ``|factor| <= 1``; truncation
    decisions use the envelope so that sporadic zeros of an oscillating
    factor are not mistaken for convergence.  ``mp_coef(ctx, k)`` returns the
    coefficient in the context ``ctx``.  ``offset`` is given as
    ``(numerator, denominator, shift)`` and ``slope`` as
    ``(numerator, denominator)`` with exactly representable floats, so that
    exponents can be formed in working precision (the terms cancel heavily).
    """

    start: int
    offset_frac: tuple
    slope_frac: tuple
    log_coef: Callable
    mp_coef: Callable

    @property
    def offset(self):
        return self.offset_frac[0] / self.offset_frac[1] + self.offset_frac[2]

    @property
    def slope(self):
        return self.slope_frac[0] / self.slope_frac[1]

    def mp_exponent(self, ctx, k):
        (a, b, shift), (c, e) = self.offset_frac, self.slope_frac
        return ctx.mpf(a) / ctx.mpf(b) + shift + k * ctx.mpf(c) / ctx.mpf(e)

    def log_term(self, k, lnx):
        lc, factor = self.log_coef(k)
        return lc + (self.offset + self.slope * k) * lnx, factor


def _sum_convergent(fam, x, rel_tol, max_terms=200_000):
    lnx = math.log(x)
    # locate the largest term and the point where terms become negligible
    logs = []
    lmax = -math.inf
    k = fam.start
    while True:
        lt, _ = fam.log_term(k, lnx)
        logs.append(lt)
        lmax = max(lmax, lt)
        if len(logs) > 3 and lt < lmax - 60 * math.log(10) and lt < logs[-2]:
            break
        k += 1
        if k - fam.start > max_terms:
            raise ConvergenceError(f"series at x={x} needs more than {max_terms} terms")
    def summed(dps):
        ctx = MPContext()
        ctx.dps = dps
        cut = lmax - (dps + 5) * math.log(10)
        xm = ctx.mpf(x)
        total = ctx.mpf(0)
        for i, lt in enumerate(logs):
            if lt < cut and i > 0 and lt < logs[i - 1]:
                continue
            kk = fam.start + i
            total += fam.mp_coef(ctx, kk) * ctx.power(xm, fam.mp_exponent(ctx, kk))
        return float(total)

    # the cancellation estimate comes from the computed value itself, so every
    # accepted value is confirmed by a second sum at higher precision
    dps = int(30 + max(0.0, lmax / math.log(10)))
    val = summed(dps)
    while True:
        lost = (lmax - math.log(abs(val))) / math.log(10) if val != 0 else math.inf
        need = max(dps + 10, int(20 + max(0.0, lost) - math.log10(rel_tol) / 2))
        if need > _MAX_DPS:
            raise ConvergenceError(f"series at x={x} needs more than {_MAX_DPS} digits")
        check = summed(need)
        if abs(check - val) <= 0.1 * rel_tol * abs(check):
            return check
        dps, val = need, check


def _sum_asymptotic(fam, x, rel_tol, max_terms=400):
    """Optimally truncated sum; returns ``(value, error)`` (``error`` is the first omitted term)."""
    lnx = math.log(x)
    total, prev = 0.0, math.inf
    terms = []
    for k in range(fam.start, fam.start + max_terms):
        lt, factor = fam.log_term(k, lnx)
        if lt > prev and k > fam.start + 1:
            return math.fsum(terms), math.exp(prev)
        terms.append(factor * math.exp(lt))
        total = math.fsum(terms)
        if lt < math.log(1e-3 * rel_tol) + math.log(abs(total) + 1e-300):
            return total, math.exp(lt)
        prev = lt
    return math.fsum(terms), math.exp(prev)


def _eval_two_sided(convergent, asymptotic, x, rel_tol):
    if asymptotic is not None:
        val, err = _sum_asymptotic(asymptotic, x, rel_tol)
        if val > 0 and err <= rel_tol * val:
            return val
    return _sum_convergent(convergent, x, rel_tol)


# ---------------------------------------------------------------------------
# radial part of a symmetric stable process
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialSpec:
    """Symmetric ``alpha``-stable process in dimension ``d`` (``alpha < d``).

    ``R = |Y| / 2`` is a positive self-similar Markov process of index
    ``alpha``; twice its Lamperti process is hypergeometric with parameters
    ``(1, alpha/2, (d-alpha)/2, alpha/2)``.
    """

    alpha: float
    d: int

    def __post_init__(self):
        if not 0 < self.alpha < 2:
            raise ValidationError(f"alpha must lie in (0, 2), got {self.alpha}")
        if int(self.d) != self.d or self.d < 1:
            raise ValidationError(f"d must be a positive integer, got {self.d}")
        if not self.alpha < self.d:
            raise ValidationError(f"need alpha < d, got alpha={self.alpha}, d={self.d}")
        object.__setattr__(self, "d", int(self.d))

    @property
    def params(self):
        a = self.alpha
        return HypergeometricParams(1.0, a / 2, (self.d - a) / 2, a / 2)

    def exp_spec(self):
        """Spec of ``I(alpha/2, X) = I(alpha, xi)``."""
        return ExpFunctionalSpec(self.params, self.alpha / 2)

    @property
    def mean_xi(self):
        """``E[xi_1]`` for the Lamperti process ``xi`` of ``R``."""
        a, d = self.alpha, self.d
        return 0.5 * math.gamma(a / 2) * math.gamma(d / 2) / math.gamma((d - a) / 2)


def _on_integers(v, tol=1e-12):
    return np.abs(v - np.round(v)) < tol


def radial_mellin(radial, s):
    """``E[I(alpha/2, X)^(s-1)]`` in closed form.

    Simple poles at ``s = -n`` (``n >= 1``) and ``s = (d + 2m)/alpha`` (``m >= 0``).
    """
    a, d = radial.alpha, radial.d
    s = np.asarray(s, dtype=complex)
    left = (s.real < 0.5) & _on_integers(s.real) & (np.abs(s.imag) < 1e-12) & (np.abs(s) > 1e-12)
    w = (d - a * s) / 2
    right = (w.real < 0.5) & _on_integers(w.real) & (np.abs(w.imag) < 1e-12)
    if np.any(left | right):
        raise PoleError("radial_mellin: s is a pole")
    c = sc.gammaln(a / 2) - sc.gammaln((d - a) / 2)
    near0 = np.abs(s) < 1e-12
    s_safe = np.where(near0, 1.0, s)
    # Gamma(s) / Gamma(alpha s / 2) -> alpha / 2 as s -> 0
    ratio = np.where(near0, a / 2, np.exp(sc.loggamma(s_safe) - sc.loggamma(a * s_safe / 2)))
    out = np.exp(c + sc.loggamma(w)) * ratio
    return out[()] if out.ndim == 0 else out


def radial_entrance_mellin(radial, s):
    """``E[R_1^(s-1)] = M((1 - s)/alpha) / (alpha E[xi_1])`` for ``1 - d < Re s < 1 + alpha``."""
    u = (1 - np.asarray(s, dtype=complex)) / radial.alpha
    return radial_mellin(radial, u) / (radial.alpha * radial.mean_xi)


def _radial_entrance_families(radial):
    a, d = radial.alpha, radial.d
    lg = math.lgamma

    # residues at s = 1 - d - 2m: powers x^(d - 1 + 2m), convergent for alpha > 1
    pre_s = math.log(4 / a) - lg(d / 2)

    def small_log(m):
        return pre_s + lg((d + 2 * m) / a) - lg((d + 2 * m) / 2) - lg(m + 1), (-1) ** m

    def small_mp(ctx, m):
        am = ctx.mpf(a)
        return (4 / am / ctx.gamma(ctx.mpf(d) / 2) * ctx.gamma((d + 2 * m) / am)
                / ctx.gamma(ctx.mpf(d + 2 * m) / 2) * (-1) ** m / ctx.factorial(m))

    # residues at s = 1 + alpha n: powers x^(-1 - alpha n), convergent for alpha < 1
    pre_l = math.log(2 / math.pi) - lg(d / 2)

    def large_log(n):
        sn = math.sin(math.pi * a * n / 2)
        return (pre_l + lg(1 + a * n / 2) + lg((d + a * n) / 2) - lg(n + 1),
                sn * (-1) ** (n + 1))

    def large_mp(ctx, n):
        am = ctx.mpf(a)
        return (2 / ctx.pi / ctx.gamma(ctx.mpf(d) / 2) * ctx.sinpi(am * n / 2)
                * ctx.gamma(1 + am * n / 2) * ctx.gamma((d + am * n) / 2) * (-1) ** (n + 1) / ctx.factorial(n))

    small = _Family(0, (float(d), 1.0, -1), (2.0, 1.0), small_log, small_mp)
    large = _Family(1, (0.0, 1.0, -1), (-a, 1.0), large_log, large_mp)
    return small, large


def radial_entrance_law(radial, x, rel_tol=1e-12, method="series"):
    """Density at time 1 of ``R = |Y|/2`` started at 0.

    ``R_1^alpha`` is ``1/I(alpha, xi)`` size-biased by ``1/I``, so the density
    is ``x^(-1) p(x^(-alpha)) / E[xi_1]``.  ``method="series"`` sums the
    explicit residue series (valid for every ``alpha != 1``, including
    rational values); ``method="transport"`` evaluates ``p`` by inverting the
    closed-form Mellin transform of ``I(alpha/2, X)``.  The generic pole
    series cannot be used there: half of the double-gamma pole lattice cancels
    and its coefficient recursion meets 0 * inf.
    """
    _check_alpha(radial.alpha)
    xs = _positive(x)
    if method == "transport":
        p = mellin_invert_density(lambda s: radial_mellin(radial, s), xs.ravel() ** (-radial.alpha),
                                  contour_re=0.5).reshape(xs.shape)
        return _shape(np.asarray(p / (xs * radial.mean_xi)))
    if method != "series":
        raise ValidationError(f"method must be 'series' or 'transport', got {method!r}")
    small, large = _radial_entrance_families(radial)
    conv, asym = (large, small) if radial.alpha < 1 else (small, large)
    out = np.array([_eval_two_sided(conv, asym, float(v), rel_tol) for v in xs.ravel()])
    return _shape(out.reshape(xs.shape))


def ladder_height_mean(alpha):
    """``E[H_1]`` for the ascending ladder height of the radial Lamperti process."""
    return math.pi / (alpha * math.sin(math.pi * alpha / 2))


def ladder_factor_mellin(radial, u):
    """``E[G^u]`` of the independent factor in ``L_1 = G I(alpha, xi)``."""
    a = radial.alpha
    u = np.asarray(u, dtype=complex)
    out = np.exp(sc.loggamma(a * (1 + u) / 2) + sc.gammaln(1 - a / 2) - sc.loggamma(1 + a * u / 2))
    out = out / (a * ladder_height_mean(a))
    return out[()] if out.ndim == 0 else out


def last_passage_mellin(radial, s):
    """``E[U_2^(s-1)]``; simple poles at ``s = -n`` (``n >= 0``) and ``s = (d+2m)/alpha``."""
    a, d = radial.alpha, radial.d
    s = np.asarray(s, dtype=complex)
    left = (s.real < 0.5) & _on_integers(s.real) & (np.abs(s.imag) < 1e-12)
    w = (d - a * s) / 2
    right = (w.real < 0.5) & _on_integers(w.real) & (np.abs(w.imag) < 1e-12)
    if np.any(left | right):
        raise PoleError("last_passage_mellin: s is a pole")
    out = np.exp(sc.loggamma(s) + sc.loggamma(w) - sc.gammaln((d - a) / 2)
                 - sc.loggamma(1 - a * (1 - s) / 2))
    return out[()] if out.ndim == 0 else out


def _last_passage_families(radial):
    a, d = radial.alpha, radial.d
    lg = math.lgamma
    c0 = lg((d - a) / 2)

    def left_log(n):
        sn = math.sin(math.pi * a * (1 + n) / 2)
        return (-math.log(math.pi) - c0 + lg(a * (1 + n) / 2)
                + lg((d + a * n) / 2) - lg(n + 1), sn * (-1) ** n)

    def left_mp(ctx, n):
        am = ctx.mpf(a)
        return (ctx.sinpi(am * (1 + n) / 2) * ctx.gamma(am * (1 + n) / 2) * ctx.gamma((d + am * n) / 2)
                * (-1) ** n / ctx.factorial(n) / (ctx.pi * ctx.gamma((d - am) / 2)))

    def right_log(m):
        return (math.log(2 / a) - c0 + lg((d + 2 * m) / a) - lg((d - a) / 2 + m + 1) - lg(m + 1),
                (-1) ** m)

    def right_mp(ctx, m):
        am = ctx.mpf(a)
        return (2 / (am * ctx.gamma((d - am) / 2)) * ctx.gamma((d + 2 * m) / am)
                / ctx.gamma((d - am) / 2 + m + 1) * (-1) ** m / ctx.factorial(m))

    left = _Family(0, (0.0, 1.0, 0), (1.0, 1.0), left_log, left_mp)
    right = _Family(0, (-float(d), a, 0), (-2.0, a), right_log, right_mp)
    return left, right


def last_passage_density(radial, t, radius=2.0, rel_tol=1e-12):
    """Density of the last exit time ``U_r`` of ``Y`` (from 0) from the ball of radius ``r``.

    Computed for ``r = 2`` from the residue series and carried to other radii
    with ``U_r = (r/2)^alpha U_2`` in law.
    """
    _check_alpha(radial.alpha)
    ts = _positive(t, "t")
    if not radius > 0:
        raise ValidationError("radius must be positive")
    k = (2.0 / radius) ** radial.alpha
    left, right = _last_passage_families(radial)
    conv, asym = (left, right) if radial.alpha < 1 else (right, left)
    out = np.array([k * _eval_two_sided(conv, asym, float(v) * k, rel_tol) for v in ts.ravel()])
    return _shape(out.reshape(ts.shape))
