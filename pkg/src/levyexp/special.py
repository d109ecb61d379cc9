"""Complex special functions: log-gamma, digamma, Gauss 2F1 and the Barnes
double gamma function G(z; tau).

The double gamma function is evaluated from its Weierstrass product by doing
the inner product over ``n`` exactly (it is a ratio of gamma functions) and
truncating the outer product over ``m`` at ``M``; the remainder
``sum_{m >= M}`` is expanded in inverse powers of ``m*tau`` and summed in
closed form with Hurwitz zeta values.  The normalising constants a(tau) and
b(tau) are calibrated numerically so that ``G(1) = 1`` and
``G(z + 1) = Gamma(z / tau) G(z)``.

Two back ends share the algorithm: a vectorised float64 path (numpy/scipy)
and an mpmath path used where the series module needs more than double
precision.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy import special as sc

from .errors import ConvergenceError, DomainError, PoleError, ValidationError

__all__ = [
    "log_gamma",
    "gamma_ratio",
    "log_gamma_ratio",
    "digamma",
    "Hyp2F1Args",
    "gauss_2f1",
    "beta_integral",
    "DoubleGammaEvaluator",
    "double_gamma_calibrate",
    "double_gamma_log",
    "double_gamma_identity_residual",
    "MpDoubleGamma",
    "mp_double_gamma",
]

POLE_TOL = 1e-12


def _near_nonpositive_integer(z, tol=POLE_TOL):
    z = np.asarray(z)
    zr = np.real(z)
    n = np.round(zr)
    return (n <= 0) & (np.abs(z - n) < tol)


def log_gamma(z):
    """Principal branch of log Gamma(z) for complex ``z`` (scalar or array)."""
    z = np.asarray(z, dtype=complex)
    if np.any(_near_nonpositive_integer(z)):
        raise PoleError(f"log_gamma: argument at a pole of Gamma: {z[_near_nonpositive_integer(z)]!r}")
    out = sc.loggamma(z)
    return out[()] if out.ndim == 0 else out


def log_gamma_ratio(num, den):
    """log of prod Gamma(num) / prod Gamma(den); ``-inf`` where a denominator
    argument sits on a pole (the ratio vanishes there)."""
    num = [np.asarray(a, dtype=complex) for a in num]
    den = [np.asarray(b, dtype=complex) for b in den]
    shape = np.broadcast_shapes(*(a.shape for a in num + den))
    total = np.zeros(shape, dtype=complex)
    for a in num:
        if np.any(_near_nonpositive_integer(a)):
            raise PoleError("gamma ratio: numerator argument at a pole of Gamma")
        total = total + sc.loggamma(a)
    zero = np.zeros(shape, dtype=bool)
    for b in den:
        hit = np.broadcast_to(_near_nonpositive_integer(b), shape)
        zero |= hit
        total = total - np.where(hit, 0.0, sc.loggamma(np.where(hit, 1.0, b)))
    total = np.where(zero, -np.inf + 0j, total)
    return total[()] if total.ndim == 0 else total


def gamma_ratio(num, den):
    """prod Gamma(num) / prod Gamma(den) evaluated in log scale."""
    lg = np.asarray(log_gamma_ratio(num, den))
    out = np.where(np.isneginf(lg.real), 0.0 + 0j, np.exp(np.where(np.isneginf(lg.real), 0.0, lg)))
    return out[()] if out.ndim == 0 else out


def digamma(x):
    """Psi(x) = Gamma'(x)/Gamma(x) for real ``x``."""
    x = np.asarray(x, dtype=float)
    if np.any(_near_nonpositive_integer(x)):
        raise PoleError("digamma: argument at a pole")
    out = sc.psi(x)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Gauss hypergeometric function on (-1, 1)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Hyp2F1Args:
    a: float
    b: float
    c: float
    z: float

    def __post_init__(self):
        if _near_nonpositive_integer(self.c, 1e-14):
            raise ValidationError(f"2F1: c={self.c} is a non-positive integer")
        if not abs(self.z) < 1:
            raise ValidationError(f"2F1: |z| must be < 1, got {self.z}")


_DEGENERATE_GAP = 1e-8


def _hyp2f1_series(a, b, c, z, tol=1e-17, max_terms=5000):
    z = np.asarray(z, dtype=float)
    term = np.ones_like(z)
    total = np.ones_like(z)
    comp = np.zeros_like(z)
    for k in range(max_terms):
        term = term * ((a + k) * (b + k) / ((c + k) * (k + 1.0))) * z
        # Kahan step
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if np.all(np.abs(term) <= tol * np.abs(total)):
            return total
    raise ConvergenceError("2F1 power series did not converge")


def _hyp2f1_mp(a, b, c, z):
    return np.array([float(mpmath.hyp2f1(a, b, c, float(zi))) for zi in np.ravel(z)]).reshape(np.shape(z))


def _hyp2f1_near_one(a, b, c, z):
    """Connection formula z -> 1 - z for z in (0.9, 1)."""
    s = c - a - b
    if abs(s - round(s)) < _DEGENERATE_GAP:
        # logarithmic case: the two terms of the connection formula are
        # individually singular; mpmath evaluates the limit.
        return _hyp2f1_mp(a, b, c, z)
    w = 1.0 - z
    c1 = np.exp(sc.gammaln(c) + sc.gammaln(s)) * sc.gammasgn(c) * sc.gammasgn(s) * sc.rgamma(c - a) * sc.rgamma(c - b)
    c2 = np.exp(sc.gammaln(c) + sc.gammaln(-s)) * sc.gammasgn(c) * sc.gammasgn(-s) * sc.rgamma(a) * sc.rgamma(b)
    out = np.zeros_like(w)
    if c1 != 0.0:
        out = out + c1 * _hyp2f1_series(a, b, 1.0 - s, w)
    if c2 != 0.0:
        out = out + c2 * w**s * _hyp2f1_series(c - a, c - b, 1.0 + s, w)
    return out


def gauss_2f1(args_or_a, b=None, c=None, z=None):
    """Gauss hypergeometric function 2F1(a, b; c; z) for real z in (-1, 1).

    Accepts either a :class:`Hyp2F1Args` or ``(a, b, c, z)`` with ``z``
    possibly an array.  Uses the power series for |z| <= 0.9, the z -> 1 - z
    connection formula above 0.9 and the Pfaff transformation below -0.9.
    """
    if isinstance(args_or_a, Hyp2F1Args):
        a, b, c, z = args_or_a.a, args_or_a.b, args_or_a.c, args_or_a.z
    else:
        a = args_or_a
        Hyp2F1Args(a, b, c, float(np.max(np.abs(z))) * 0.0)  # validates c
    z = np.asarray(z, dtype=float)
    if np.any(np.abs(z) >= 1):
        raise ValidationError("2F1: |z| must be < 1")
    out = np.empty_like(z)
    mid = np.abs(z) <= 0.9
    hi = z > 0.9
    lo = z < -0.9
    if np.any(mid):
        out[mid] = _hyp2f1_series(a, b, c, z[mid])
    if np.any(hi):
        out[hi] = _hyp2f1_near_one(a, b, c, z[hi])
    if np.any(lo):
        zl = z[lo]
        out[lo] = (1.0 - zl) ** (-a) * _hyp2f1_series(a, c - b, c, zl / (zl - 1.0))
    return out[()] if out.ndim == 0 else out


def beta_integral(a, b, c):
    """Closed form of int_0^inf exp(a u) (exp(b u) - 1)^(-c) du, a/b < c < 1."""
    if not b > 0:
        raise DomainError("beta_integral: b must be positive")
    r = a / b
    if not (r < c < 1):
        raise DomainError(f"beta_integral: need a/b < c < 1, got a/b={r}, c={c}")
    return float(sc.gamma(c - r) * sc.gamma(1 - c) / sc.gamma(1 - r) / b)


# ---------------------------------------------------------------------------
# Barnes double gamma function
# ---------------------------------------------------------------------------

_TAIL_ORDER = 40          # number of inverse powers of m*tau kept in the tail
_TAIL_RATIO = 4.0         # truncation keeps |z| <= (M tau) / _TAIL_RATIO
_W_MIN = 12.0             # and M tau >= _W_MIN
_CHUNK = 1 << 21          # max matrix entries per vectorised block


@functools.lru_cache(maxsize=None)
def _tail_table(order):
    """coef[j, k] = coefficient of (-z)^k / (m tau)^j in the large-m expansion
    of log Gamma(w + z) - log Gamma(w) - z psi(w) - z^2 psi'(w) / 2."""
    bern = [mpmath.bernoulli(n) for n in range(order + 3)]
    coef = [[mpmath.mpf(0)] * (order + 2) for _ in range(order + 1)]
    for j in range(2, order + 1):
        coef[j][j + 1] += mpmath.mpf(1) / ((j + 1) * j)
        if j >= 3:
            coef[j][j] += mpmath.mpf(1) / (2 * j)
        i = 1
        while j + 1 - 2 * i >= 3:
            k = j + 1 - 2 * i
            coef[j][k] += bern[2 * i] * mpmath.factorial(j - 1) / (mpmath.factorial(2 * i) * mpmath.factorial(k))
            i += 1
    return coef


@functools.lru_cache(maxsize=64)
def _lattice_sums(tau, M):
    w = tau * np.arange(1, M)
    order = _TAIL_ORDER
    coef = np.array([[float(c) for c in row] for row in _tail_table(order)])
    js = np.arange(2, order + 1, dtype=float)
    zt = sc.zeta(js, M) * tau ** (-js)
    poly = (coef[2:, :] * zt[:, None]).sum(axis=0)
    return (w, float(sc.gammaln(w).sum()), float(sc.psi(w).sum()),
            float(sc.polygamma(1, w).sum()), poly)


def _truncation(tau, zmax, w_min=_W_MIN):
    M = int(math.ceil(max(w_min, _TAIL_RATIO * zmax) / tau)) + 1
    return max(32, 32 * ((M + 31) // 32))


def _remainder_sum(z, tau, w_min=_W_MIN):
    """sum_{m>=1} [log G(w+z) - log G(w) - z psi(w) - z^2 psi'(w)/2], w = m tau."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    flat = z.ravel()
    res = out.ravel()
    # group by required truncation so small |z| do not pay for large ones
    order = np.argsort(np.abs(flat))
    start = 0
    while start < flat.size:
        M = _truncation(tau, abs(flat[order[start]]), w_min)
        stop = start
        while stop < flat.size and _truncation(tau, abs(flat[order[stop]]), w_min) == M:
            stop += 1
        idx = order[start:stop]
        w, sum_lg, sum_psi, sum_psi1, poly = _lattice_sums(tau, M)
        step = max(1, _CHUNK // M)
        for k in range(0, idx.size, step):
            sub = idx[k:k + step]
            zz = flat[sub]
            lg = sc.loggamma(w[None, :] + zz[:, None]).sum(axis=1)
            tail = np.polynomial.polynomial.polyval(-zz, poly)
            res[sub] = lg - sum_lg - zz * sum_psi - 0.5 * zz * zz * sum_psi1 + tail
        start = stop
    return out


def _on_zero_lattice(z, tau, tol=POLE_TOL):
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    cand = (np.abs(z.imag) < tol) & (z.real < tol)
    hit = np.zeros(z.shape, dtype=bool)
    for i in np.flatnonzero(cand):
        x = z.real.flat[i]
        for m in range(int(math.floor(-x / tau)) + 2):
            n = round(x + m * tau)
            if n <= 0 and abs(x + m * tau - n) < tol:
                hit.flat[i] = True
                break
    return hit


@dataclass(frozen=True)
class DoubleGammaEvaluator:
    """Calibrated evaluator of log G(z; tau) for real tau > 0.

    ``a_const`` and ``b_const`` are the constants of the Weierstrass product;
    internally the evaluator uses the equivalent linear and quadratic
    coefficients ``lin = a/tau - euler_gamma`` and ``quad = b/(2 tau) + pi^2/12``.
    """

    tau: float
    a_const: float
    b_const: float
    truncation_order: int
    target_rel_err: float
    lin: float = field(repr=False, default=0.0)
    quad: float = field(repr=False, default=0.0)
    w_min: float = field(repr=False, default=_W_MIN)

    def log(self, z):
        return double_gamma_log(self, z)

    def __call__(self, z):
        return np.exp(double_gamma_log(self, z))


def _calibrate_coeffs(tau, w_min):
    s1, s2 = _remainder_sum(np.array([1.0, 2.0]), tau, w_min)
    s1, s2 = s1.real, s2.real
    quad = 0.5 * (sc.gammaln(1.0 / tau) - math.log(tau) + s2 - 2.0 * s1)
    lin = math.log(tau) + s1 - quad
    return lin, quad


def _log_g(z, tau, lin, quad, w_min):
    return -math.log(tau) - sc.loggamma(z) + lin * z + quad * z * z - _remainder_sum(z, tau, w_min)


@functools.lru_cache(maxsize=128)
def _calibrate_cached(tau, target_rel_err, max_truncation):
    if not tau > 0:
        raise ValidationError(f"double gamma: tau must be positive, got {tau}")
    w_min = _W_MIN
    best = None
    while True:
        lin, quad = _calibrate_coeffs(tau, w_min)
        # independent check of the shift identity off the calibration points
        z = np.array([0.5 + 0.5j, 1.7 - 2.0j])
        lhs = _log_g(z + 1.0, tau, lin, quad, w_min)
        rhs = _log_g(z, tau, lin, quad, w_min) + sc.loggamma(z / tau)
        resid = float(np.max(np.abs(np.expm1(lhs - rhs))))
        M = _truncation(tau, 0.0, w_min)
        if resid <= target_rel_err:
            break
        # a longer product only adds roundoff once the tail is resolved
        if M >= max_truncation or (best is not None and resid >= 0.5 * best[0]):
            raise ConvergenceError(
                f"double gamma calibration residual {resid:.2e} above target {target_rel_err:.1e} "
                f"at truncation {M}")
        best = (resid, w_min)
        w_min *= 2.0
    a = tau * (lin + np.euler_gamma)
    b = 2.0 * tau * (quad - math.pi**2 / 12.0)
    return DoubleGammaEvaluator(float(tau), float(a), float(b), M, float(target_rel_err),
                                lin=float(lin), quad=float(quad), w_min=w_min)


def double_gamma_calibrate(tau, target_rel_err=1e-10, max_truncation=1 << 16):
    """Build a :class:`DoubleGammaEvaluator` for ``tau`` (cached per tau)."""
    return _calibrate_cached(float(tau), float(target_rel_err), int(max_truncation))


def double_gamma_log(ev, z):
    """log G(z; tau) (some branch; exponentiate for the value)."""
    z = np.asarray(z, dtype=complex)
    if np.any(_on_zero_lattice(z, ev.tau)):
        raise PoleError(f"double gamma: argument on the zero lattice of G(.; {ev.tau})")
    out = _log_g(z, ev.tau, ev.lin, ev.quad, ev.w_min)
    return out[()] if out.ndim == 0 else out


def double_gamma_identity_residual(tau, z, which):
    """Relative residual of a functional identity of G(z; tau).

    ``which`` is ``"shift_one"`` (G(z+1) = Gamma(z/tau) G(z)), ``"shift_tau"``
    (G(z+tau) = (2 pi)^((tau-1)/2) tau^(1/2-z) Gamma(z) G(z)) or
    ``"modular"`` (the relation between G(z; tau) and G(z/tau; 1/tau)).
    """
    ev = double_gamma_calibrate(tau)
    z = np.asarray(z, dtype=complex)
    if which == "shift_one":
        lhs = double_gamma_log(ev, z + 1)
        rhs = double_gamma_log(ev, z) + log_gamma(z / tau)
    elif which == "shift_tau":
        lhs = double_gamma_log(ev, z + tau)
        rhs = (double_gamma_log(ev, z) + log_gamma(z) + 0.5 * (tau - 1) * math.log(2 * math.pi)
               + (0.5 - z) * math.log(tau))
    elif which == "modular":
        lhs = double_gamma_log(ev, z)
        rhs = (double_gamma_log(double_gamma_calibrate(1 / tau), z / tau)
               + 0.5 * z * (1 - 1 / tau) * math.log(2 * math.pi)
               + (-z * z / (2 * tau) + 0.5 * z * (1 + 1 / tau) - 1) * math.log(tau))
    else:
        raise ValidationError(f"unknown identity {which!r}")
    out = np.abs(np.expm1(lhs - rhs))
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# mpmath back end (used for high-precision series seeds)
# ---------------------------------------------------------------------------

class MpDoubleGamma:
    """mpmath evaluation of log G(z; tau) at ``dps`` decimal digits."""

    def __init__(self, tau, dps=40):
        self.dps = int(dps)
        with mpmath.workdps(self.dps + 10):
            self.tau = mpmath.mpf(tau)
            self.order = int(math.ceil((self.dps + 15) / math.log10(_TAIL_RATIO))) + 2
            self.w_min = max(_W_MIN, self.order / 2.0)
            self._cache = {}
            l1 = self._remainder(mpmath.mpf(1))
            l2 = self._remainder(mpmath.mpf(2))
            t = self.tau
            self.quad = (mpmath.loggamma(1 / t) - mpmath.log(t) + l2 - 2 * l1) / 2
            self.lin = mpmath.log(t) + l1 - self.quad

    def _sums(self, M):
        if M not in self._cache:
            t = self.tau
            ws = [t * m for m in range(1, M)]
            coef = _tail_table(self.order)
            zt = [mpmath.zeta(j, M) * t ** (-j) for j in range(self.order + 1)]
            poly = [mpmath.fsum(coef[j][k] * zt[j] for j in range(2, self.order + 1))
                    for k in range(self.order + 2)]
            self._cache[M] = (ws,
                              mpmath.fsum(mpmath.loggamma(w) for w in ws),
                              mpmath.fsum(mpmath.psi(0, w) for w in ws),
                              mpmath.fsum(mpmath.psi(1, w) for w in ws),
                              poly)
        return self._cache[M]

    def _remainder(self, z):
        M = int(mpmath.ceil(max(self.w_min, _TAIL_RATIO * abs(z)) / self.tau)) + 1
        M = 16 * ((M + 15) // 16)
        ws, slg, spsi, spsi1, poly = self._sums(M)
        lg = mpmath.fsum(mpmath.loggamma(w + z) for w in ws)
        tail = mpmath.polyval(poly[::-1], -z)
        return lg - slg - z * spsi - z * z * spsi1 / 2 + tail

    def log(self, z):
        with mpmath.workdps(self.dps + 10):
            z = mpmath.mpmathify(z)
            return -mpmath.log(self.tau) - mpmath.loggamma(z) + self.lin * z + self.quad * z * z - self._remainder(z)


@functools.lru_cache(maxsize=32)
def mp_double_gamma(tau, dps=40):
    """Cached :class:`MpDoubleGamma` for (tau, dps)."""
    return MpDoubleGamma(tau, dps)
