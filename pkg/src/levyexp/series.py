"""Density of the exponential functional as a series over the poles of its
Mellin transform.

Closing the inversion contour to the left picks up the residues ``a_n`` at
``s = -n`` and ``b_{m,n}`` at ``s = z-_{m,n}``; closing it to the right picks
up ``-c_{m,n}`` at ``z+_{m,n}``.  One of the two expansions converges for all
``x > 0`` (left when ``gamma + gamma_hat < 1``, right when it is ``> 1``) and
the other is asymptotic.

The terms of the convergent series behave like ``y^k / Gamma(B k)`` with
``B = |1 - gamma - gamma_hat|``, so large arguments suffer catastrophic
cancellation.  Coefficients are therefore generated in mpmath and the sums are
carried out at a working precision chosen from the ratio between the largest
term and the result.  When that would need an excessive precision the
asymptotic expansion on the other side is used instead, provided its smallest
term is below the tolerance.
"""

from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import mpmath
import numpy as np
from mpmath.ctx_mp import MPContext

from .errors import (CancellationError, ConvergenceError, DomainError, RationalAlphaError,
                     ValidationError)
from .mellin import ExpFunctionalSpec, mellin_full, mellin_M_mp

__all__ = [
    "SignedLog",
    "Term",
    "CoefficientTable",
    "AlphaDiagnostic",
    "get_table",
    "coeff_a",
    "coeff_b",
    "coeff_c",
    "density",
    "density_asymptotic",
    "alpha_diagnostic",
    "contour_residue",
    "mellin_residue",
]

_POLE_TOL = 1e-10
_BASE_DPS = 30
_MAX_DPS = 100
_MP_LOCK = threading.RLock()      # guards the global mpmath context (seeds)


class SignedLog(NamedTuple):
    """A real number stored as ``sign * exp(log_abs)``."""

    log_abs: float
    sign: int

    @property
    def value(self):
        if self.sign == 0:
            return 0.0
        if self.log_abs > 709.0:
            return math.copysign(math.inf, self.sign)
        return self.sign * math.exp(self.log_abs)


# ---------------------------------------------------------------------------
# coefficient table
# ---------------------------------------------------------------------------

class CoefficientTable:
    """Lazily grown residue coefficients of the Mellin transform of one spec.

    Values are mpmath numbers at ``dps`` digits held in a private context.
    Growth is serialised by a lock; reads of already computed entries are
    lock free.
    """

    def __init__(self, spec, dps=_BASE_DPS):
        self.spec = spec
        self.dps = int(dps)
        self._lock = threading.RLock()
        ctx = self.ctx = MPContext()
        ctx.dps = self.dps + 10
        b, g, bh, gh = (ctx.mpf(v) for v in spec.params.as_tuple())
        self._p = (b, g, bh, gh)
        self._d = 1 / ctx.mpf(spec.alpha)
        self._alpha = ctx.mpf(spec.alpha)
        d = self._d
        self._pt = tuple(d * v for v in self._p)
        self.left_origin = (1 - b + g) * d          # b exponents: left_origin + m d + n
        self.right_origin = 1 + bh * d              # c exponents: right_origin + m d + n
        self.has_a = spec.params.beta < 1
        self._a = []
        self._b = []
        self._c = []
        self._log = {"a": [], "b": [], "c": []}
        # psi at the previous row of the same column, keyed by (family, n);
        # consecutive rows shift the psi argument by exactly +-1
        self._psi_col = {}

    # -- gamma-ratio helpers --------------------------------------------
    def _check_args(self, args):
        for w in args:
            wf = float(w)
            if wf <= 0.5 and abs(wf - round(wf)) < _POLE_TOL:
                raise RationalAlphaError(
                    f"coefficient recursion hits a gamma pole at {wf!r}; alpha={self.spec.alpha} "
                    "is (numerically) rational, perturb it slightly")

    def _psi(self, params, w):
        b, g, bh, gh = params
        num = [1 - b + g - w, bh + gh + w]
        self._check_args(num)
        return -self.ctx.gammaprod(num, [1 - b - w, bh + w])

    def _psi_shift(self, w, value, step):
        """psi(w + step) from psi(w) = value for step = +-1 (gamma recurrences)."""
        b, g, bh, gh = self._p
        A, B, C, D = 1 - b + g, 1 - b, bh + gh, bh
        if step == 1:
            den = (A - w - 1) * (D + w)
            if den == 0:
                return None
            return value * (C + w) * (B - w - 1) / den
        den = (C + w - 1) * (B - w)
        if den == 0:
            return None
        return value * (A - w) * (D + w - 1) / den

    def _psi_column(self, family, m, n, w, step):
        """psi(w) for row m, column n, reusing row m - 1 when available."""
        key = (family, n)
        prev = self._psi_col.get(key)
        val = None
        if prev is not None and prev[0] == m - 1:
            self._check_args([1 - self._p[0] + self._p[1] - w, self._p[2] + self._p[3] + w])
            val = self._psi_shift(prev[1], prev[2], step)
        if val is None:
            val = self._psi(self._p, w)
        self._psi_col[key] = (m, w, val)
        return val

    def _gamma_ratio(self, num, den):
        self._check_args(num)
        return self.ctx.gammaprod(num, den)

    def _log_abs(self, v):
        return float(self.ctx.log(abs(v))) if v != 0 else -math.inf

    # -- seeds --------------------------------------------------------------
    def _seed(self, family):
        spec = self.spec
        ctx = self.ctx
        b, g, bh, gh = self._p
        d = self._d
        eta = 1 - b + g + bh + gh
        if family == "b":
            e0 = self.left_origin
            pre = d * self._gamma_ratio([eta, -e0], [eta - gh, -g])
            s = 1 - e0
        else:
            pre = d * self._gamma_ratio([1 + bh * d, 1 - b + bh], [eta - gh, gh])
            s = bh * d
        with _MP_LOCK:
            m_val = mellin_M_mp(spec, s, self.dps + 5)
        return pre * ctx.mpf(m_val)

    # -- growth ---------------------------------------------------------------
    def _grow_a(self, n):
        with self._lock:
            ctx = self.ctx
            while len(self._a) <= n:
                k = len(self._a)
                if not self.has_a:
                    v = ctx.mpf(0)
                elif k == 0:
                    v = -self._psi(self._p, ctx.mpf(0))
                else:
                    v = self._a[-1] * self._psi(self._p, self._alpha * k) / k
                self._a.append(v)
                self._log["a"].append(self._log_abs(v))

    def _grow(self, family, m, n):
        rows = self._b if family == "b" else self._c
        logs = self._log[family]
        with self._lock:
            while len(rows) <= m:
                mm = len(rows)
                v = self._seed(family) if mm == 0 else self._m_step(family, mm, rows[mm - 1][0])
                rows.append([v])
                logs.append([self._log_abs(v)])
            row, lrow = rows[m], logs[m]
            while len(row) <= n:
                v = self._n_step(family, m, len(row), row[-1])
                row.append(v)
                lrow.append(self._log_abs(v))

    def z_minus(self, m, n):
        return -(self.left_origin + m * self._d + n)

    def z_plus(self, m, n):
        return self.right_origin + m * self._d + n

    def _n_step(self, family, m, n, prev):
        a = self._alpha
        if family == "b":
            z = self.z_minus(m, n)
            # argument alpha*(origin + n) + m: row m - 1 is one unit below
            return -self._psi_column("b", m, n, -a * z, 1) / z * prev
        z = self.z_plus(m, n - 1)
        psi = self._psi_column("c", m, n, -a * z, -1)
        if psi == 0:
            raise RationalAlphaError(f"psi vanishes at a right pole; alpha={self.spec.alpha} is rational")
        return -z / psi * prev

    def _m_step(self, family, m, prev):
        a, d = self._alpha, self._d
        g, gh = self._p[1], self._p[3]
        if family == "b":
            z = self.z_minus(m, 0)
            zp = self.z_minus(m - 1, 0)
            return (-a ** (d * (g + gh)) * self._psi(self._pt, 1 - d - z)
                    * self._gamma_ratio([z], [zp]) * prev)
        zp = self.z_plus(m - 1, 0)
        z = self.z_plus(m, 0)
        psi_t = self._psi(self._pt, 1 - d - zp)
        if psi_t == 0:
            raise RationalAlphaError(f"rescaled psi vanishes at a right pole; alpha={self.spec.alpha} is rational")
        return -a ** (-d * (g + gh)) / psi_t * self._gamma_ratio([z], [zp]) * prev

    # -- access -------------------------------------------------------------
    def a(self, n):
        if n >= len(self._a):
            self._grow_a(n)
        return self._a[n]

    def b(self, m, n):
        if m >= len(self._b) or n >= len(self._b[m]):
            self._grow("b", m, n)
        return self._b[m][n]

    def c(self, m, n):
        if m >= len(self._c) or n >= len(self._c[m]):
            self._grow("c", m, n)
        return self._c[m][n]

    def exponent(self, family, m, n):
        """Power of ``y`` carried by the coefficient (``y = x`` for a, b and
        ``y = 1/x`` for c)."""
        if family == "a":
            return self.ctx.mpf(n)
        origin = self.left_origin if family == "b" else self.right_origin
        return origin + m * self._d + n

    def terms(self, family, lo, hi):
        """All terms of ``family`` with exponent in [lo, hi), as :class:`Term`."""
        out = []
        if family == "a":
            if not self.has_a:
                return out
            for n in range(max(0, math.ceil(lo)), math.ceil(hi)):
                v = self.a(n)
                out.append(Term(v, "a", 0, n, self._log["a"][n], float(n)))
            return out
        origin = float(self.left_origin if family == "b" else self.right_origin)
        d = float(self._d)
        getter = self.b if family == "b" else self.c
        m = 0
        while origin + m * d < hi:
            base = origin + m * d
            n_lo = max(0, math.ceil(lo - base - 1e-12))
            n_hi = math.ceil(hi - base - 1e-12)
            if n_hi > n_lo:
                getter(m, n_hi - 1)
                logs = self._log[family][m]
                row = (self._b if family == "b" else self._c)[m]
                for n in range(n_lo, n_hi):
                    out.append(Term(row[n], family, m, n, logs[n], base + n))
            m += 1
        return out


class Term(NamedTuple):
    coef: object          # mpmath number in the table context
    family: str
    m: int
    n: int
    log_abs: float
    exponent: float


class _Powers:
    """``y^exponent`` for table terms in ``ctx``, built from cached products
    ``y^origin * (y^delta)^m * y^n`` instead of one exponential per term."""

    def __init__(self, table, ctx, y):
        self.ctx = ctx
        ly = ctx.log(ctx.mpf(y))
        self.base = {"a": ctx.mpf(1), "b": ctx.exp(ctx.mpf(table.left_origin) * ly),
                     "c": ctx.exp(ctx.mpf(table.right_origin) * ly)}
        self._step = {"m": ctx.exp(ctx.mpf(table._d) * ly), "n": ctx.mpf(y)}
        self._pow = {"m": [ctx.mpf(1)], "n": [ctx.mpf(1)]}

    def _get(self, axis, k):
        seq = self._pow[axis]
        while len(seq) <= k:
            seq.append(seq[-1] * self._step[axis])
        return seq[k]

    def term(self, t):
        ctx = self.ctx
        return ctx.mpf(t.coef) * self.base[t.family] * self._get("m", t.m) * self._get("n", t.n)


_TABLES = {}
_TABLES_LOCK = threading.Lock()


def get_table(spec, dps=_BASE_DPS):
    """Shared :class:`CoefficientTable` for ``spec`` with at least ``dps`` digits."""
    key = spec.key()
    with _TABLES_LOCK:
        tab = _TABLES.get(key)
        if tab is None or tab.dps < dps:
            dps = max(int(dps), _BASE_DPS)
            dps = 10 * math.ceil(dps / 10)
            tab = CoefficientTable(spec, dps)
            _TABLES[key] = tab
        return tab


def _signed_log(table, v):
    if v == 0:
        return SignedLog(-math.inf, 0)
    return SignedLog(float(table.ctx.log(abs(v))), 1 if v > 0 else -1)


def coeff_a(spec, n):
    """Residue of the Mellin transform at ``s = -n`` (zero when beta = 1)."""
    if n < 0:
        raise ValidationError("n must be non-negative")
    if spec.params.beta >= 1:
        return 0.0
    return float(get_table(spec).a(int(n)))


def coeff_b(spec, m, n):
    """Residue at ``z-_{m,n}`` as a :class:`SignedLog`."""
    if m < 0 or n < 0:
        raise ValidationError("indices must be non-negative")
    tab = get_table(spec)
    return _signed_log(tab, tab.b(int(m), int(n)))


def coeff_c(spec, m, n):
    """Minus the residue at ``z+_{m,n}`` as a :class:`SignedLog`."""
    if m < 0 or n < 0:
        raise ValidationError("indices must be non-negative")
    tab = get_table(spec)
    return _signed_log(tab, tab.c(int(m), int(n)))


# ---------------------------------------------------------------------------
# alpha diagnostic
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AlphaDiagnostic:
    alpha: float
    convergents: list
    liouville_score: float
    verdict: str
    message: str = ""


_RATIONAL_TOL = 1e-12
_RATIONAL_MAX_Q = 50
_NEAR_RATIONAL_TOL = 1e-8
_NEAR_RATIONAL_MAX_Q = 1000
_LIOUVILLE_MIN_Q = 10
_LIOUVILLE_THRESHOLD = 0.6


def alpha_diagnostic(alpha, n_quotients=25):
    """Continued-fraction screen of ``alpha`` for (near) rationality.

    ``rational``: a convergent with denominator <= 50 lies within 1e-12.
    ``suspect``: a convergent with denominator <= 1000 lies within 1e-8, or
    ``max_q -ln<q alpha>/q`` over convergents with ``q >= 10`` exceeds 0.6
    (``<.>`` is the distance to the nearest integer).  Only convergents that
    double precision resolves are used, so this is a heuristic.
    """
    alpha = float(alpha)
    if not alpha > 0:
        raise ValidationError("alpha must be positive")
    frac = Fraction(alpha)
    convergents = []
    h0, h1, k0, k1 = 0, 1, 1, 0
    x = frac
    for _ in range(n_quotients):
        a = math.floor(x)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        convergents.append((h1, k1))
        rem = x - a
        if rem == 0 or k1 > 1e8:
            break
        x = 1 / rem
    verdict, message, score = "safe", "", 0.0
    for p, q in convergents:
        err = abs(alpha - p / q)
        if q <= _RATIONAL_MAX_Q and err <= _RATIONAL_TOL:
            return AlphaDiagnostic(alpha, convergents, math.inf, "rational",
                                   f"alpha={alpha!r} is within {err:.1e} of {p}/{q}; perturb alpha")
        if q <= _NEAR_RATIONAL_MAX_Q and err <= _NEAR_RATIONAL_TOL and verdict == "safe":
            verdict, message = "suspect", f"alpha={alpha!r} is within {err:.1e} of {p}/{q}"
        # skip convergents whose error double precision cannot resolve
        if q >= _LIOUVILLE_MIN_Q and err > 1e-15 * alpha:
            score = max(score, -math.log(q * err) / q)
    if verdict == "safe" and score > _LIOUVILLE_THRESHOLD:
        verdict, message = "suspect", f"alpha={alpha!r} has unusually good rational approximations"
    return AlphaDiagnostic(alpha, convergents, score, verdict, message)


def _require_safe_alpha(spec):
    diag = alpha_diagnostic(spec.alpha)
    if diag.verdict != "safe":
        raise RationalAlphaError(f"series expansion unavailable: {diag.message} (verdict {diag.verdict})")
    return diag


# ---------------------------------------------------------------------------
# summation
# ---------------------------------------------------------------------------

def _families(spec, side):
    # side "left" is the expansion in powers of x, "right" in powers of 1/x
    return ("a", "b") if side == "left" else ("c",)


def _block(table, fams, j):
    out = []
    for fam in fams:
        out.extend(table.terms(fam, j, j + 1))
    return out


def _first_block(table, fams):
    lo = 0.0 if "a" in fams and table.has_a else float(table.left_origin if "b" in fams else table.right_origin)
    return int(math.floor(lo))


def _scan(table, fams, lny, max_blocks, max_loss_digits):
    """Float pass over block maxima of log|term|; returns (peak log, first log,
    peak block)."""
    j = _first_block(table, fams)
    lmax, first, peak, low = -math.inf, None, j, 0
    for _ in range(max_blocks):
        blk = _block(table, fams, j)
        if blk:
            bm = max(t.log_abs + t.exponent * lny for t in blk)
            if first is None:
                first = bm
            if bm > lmax:
                lmax, peak, low = bm, j, 0
                if lmax - first > max_loss_digits * math.log(10):
                    raise ConvergenceError(
                        f"convergent series loses more than {max_loss_digits} digits to cancellation")
            elif bm < lmax - 2 * math.log(10):
                low += 1
                if low >= 3:
                    return lmax, first, peak
        j += 1
    raise ConvergenceError(f"series terms do not decay after {max_blocks} unit blocks")


def _sum_convergent(table, fams, y, dps, rel_tol, max_blocks, peak):
    ctx = MPContext()
    ctx.dps = dps
    powers = _Powers(table, ctx, y)
    total = ctx.mpf(0)
    j = _first_block(table, fams)
    quiet = 0
    lmax = -math.inf
    for _ in range(max_blocks):
        blk = _block(table, fams, j)
        if blk:
            terms = [powers.term(t) for t in blk]
            total += ctx.fsum(terms)
            bmax = max(abs(t) for t in terms)
            lmax = max(lmax, float(ctx.log(bmax)) if bmax else -math.inf)
            if j > peak and bmax <= rel_tol * abs(total):
                quiet += 1
                if quiet >= 3:
                    return total, lmax
            else:
                quiet = 0
        j += 1
    raise ConvergenceError(f"series did not converge within {max_blocks} unit blocks")


_PATIENCE = 12     # blocks without a new minimum before an asymptotic sum stops


def _sum_asymptotic(table, fams, y, rel_tol, max_blocks, dps=_BASE_DPS):
    """Optimal truncation; returns (value, error estimate).

    Block maxima fluctuate, so the sum is cut after the block with the
    smallest maximum seen before ``_PATIENCE`` blocks pass without a new
    minimum (or a tenfold rise).
    """
    ctx = MPContext()
    ctx.dps = dps
    powers = _Powers(table, ctx, y)
    j = _first_block(table, fams)
    best, best_total, since = math.inf, 0.0, 0
    total = ctx.mpf(0)
    for _ in range(max_blocks):
        blk = _block(table, fams, j)
        j += 1
        if not blk:
            continue
        terms = [powers.term(t) for t in blk]
        bmax = float(max(abs(t) for t in terms))
        if bmax > 10 * best or since >= _PATIENCE:
            break
        if bmax < best:
            best, since = bmax, 0
            # the partial sum before this block, whose error is about bmax
            best_total = float(total)
        else:
            since += 1
        total += ctx.fsum(terms)
        if bmax <= 1e-3 * rel_tol * abs(float(total)):
            return float(total), bmax
    return best_total, best


def _asymptotic_estimate(table, fams, lny, max_blocks, target):
    """Float estimate of log(smallest block / first block) under optimal
    truncation; stops early once ``target`` is reached."""
    j = _first_block(table, fams)
    first, best, since = None, math.inf, 0
    for _ in range(max_blocks):
        blk = _block(table, fams, j)
        j += 1
        if not blk:
            continue
        bm = max(t.log_abs + t.exponent * lny for t in blk)
        if first is None:
            first = bm
        if bm > best + math.log(10) or since >= _PATIENCE:
            break
        if bm < best:
            best, since = bm, 0
        else:
            since += 1
        if best - first < target:
            break
    return best - first


def _density_point(spec, x, rel_tol, max_blocks, method="auto"):
    g_sum = spec.params.gamma + spec.params.gamma_hat
    conv = "left" if g_sum < 1 else "right"
    cf, af = _families(spec, conv), _families(spec, "right" if conv == "left" else "left")
    cy, ay = (x, 1 / x) if conv == "left" else (1 / x, x)
    base = get_table(spec)
    if ay < 1 and method == "auto":
        # the asymptotic side is accurate and cheap here; use it when it
        # reaches the tolerance
        target = math.log(rel_tol)
        if _asymptotic_estimate(base, af, math.log(ay), max_blocks, target) < target:
            val, err = _sum_asymptotic(base, af, ay, rel_tol, max_blocks)
            if val > 0 and err <= rel_tol * val:
                return val
    lmax, first, peak = _scan(base, cf, math.log(cy), max_blocks, _MAX_DPS - 25)
    loss = max(0.0, (lmax - first) / math.log(10))
    dps = int(25 + loss)
    for _ in range(3):
        if dps > _MAX_DPS:
            raise ConvergenceError(
                f"density at x={x}: the convergent series needs {dps} digits and the "
                "asymptotic expansion does not reach the tolerance")
        tab = get_table(spec, dps)
        total, lmax = _sum_convergent(tab, cf, cy, dps, rel_tol, max_blocks, peak)
        val = float(total)
        scale = math.exp(min(lmax, 700.0))
        lost = (lmax - math.log(abs(val))) / math.log(10) if val != 0 else math.inf
        need = int(22 + max(0.0, lost))
        if need <= dps:
            break
        dps = need
    if val < 0:
        if -val <= 1e-12 * scale:
            warnings.warn(f"density at x={x} clamped from {val:.3e} to 0", RuntimeWarning, stacklevel=3)
            return 0.0
        raise CancellationError(f"density at x={x} is negative ({val:.3e}) after summation")
    return val


def density(spec, x, rel_tol=1e-10, max_blocks=4000, method="auto"):
    """Density of I(alpha, X) at ``x > 0`` (scalar or array) from the pole expansion.

    ``method="auto"`` may switch to the asymptotic expansion where it is
    accurate and cheaper; ``"convergent"`` always sums the convergent series.
    """
    if method not in ("auto", "convergent"):
        raise ValidationError(f"method must be 'auto' or 'convergent', got {method!r}")
    g_sum = spec.params.gamma + spec.params.gamma_hat
    if abs(g_sum - 1) < 1e-12:
        raise DomainError("the series expansions exclude gamma + gamma_hat = 1")
    _require_safe_alpha(spec)
    xs = np.asarray(x, dtype=float)
    if np.any(~(xs > 0)):
        raise DomainError("density requires x > 0")
    out = np.array([_density_point(spec, float(v), rel_tol, max_blocks, method) for v in xs.ravel()])
    out = out.reshape(xs.shape)
    return out[()] if out.ndim == 0 else out


def density_asymptotic(spec, x, n_terms, side):
    """Partial sum of the first ``n_terms`` terms (by exponent) of the
    expansion at ``side`` ("zero" or "infinity")."""
    if n_terms < 1:
        raise ValidationError("n_terms must be >= 1")
    if side not in ("zero", "infinity"):
        raise ValidationError(f"side must be 'zero' or 'infinity', got {side!r}")
    x = float(x)
    if not x > 0:
        raise DomainError("x must be positive")
    tab = get_table(spec)
    fams = ("a", "b") if side == "zero" else ("c",)
    y = x if side == "zero" else 1 / x
    collected = []
    j = _first_block(tab, fams)
    while len(collected) < n_terms:
        blk = _block(tab, fams, j)
        collected.extend(blk)
        j += 1
        if j > 10_000:
            break
    collected = [t for t in collected if t.coef != 0]
    collected.sort(key=lambda t: t.exponent)
    ctx = tab.ctx
    total = ctx.fsum(t.coef * ctx.power(y, tab.exponent(t.family, t.m, t.n)) for t in collected[:n_terms])
    return float(total)


# ---------------------------------------------------------------------------
# residues by contour integration
# ---------------------------------------------------------------------------

def contour_residue(func, z0, radius=1e-3, n_points=64):
    """(1 / 2 pi i) times the integral of ``func`` around a circle about ``z0``
    (trapezoid rule; ``func`` must accept an array)."""
    theta = 2 * np.pi * np.arange(n_points) / n_points
    e = np.exp(1j * theta)
    return complex(radius * np.mean(func(z0 + radius * e) * e))


def mellin_residue(spec, z0, radius=1e-3, n_points=64):
    """Residue of Gamma(s) M(s) at ``z0`` by contour integration."""
    return contour_residue(lambda s: mellin_full(spec, s), z0, radius, n_points)
