"""Mellin transform of the exponential functional I(alpha, X).

For a hypergeometric process X with ``beta_hat > 0`` and ``alpha > 0`` the
Mellin transform ``E[I^(s-1)]`` equals ``Gamma(s) M(s)`` where, with
``delta = 1/alpha`` and ``G(.) = G(.; delta)``,

    M(s) = C G((1-b) d + s) G((bh+gh) d + 1 - s) / ( G((1-b+g) d + s) G(bh d + 1 - s) )

and ``C`` normalises ``M(1) = 1``.  ``M`` is meromorphic with zeros at
``-(1-b) d - m d - n`` and ``(bh+gh) d + 1 + m d + n`` and poles on the two
lattices held by :class:`PoleGrid`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy import special as sc

from .errors import AdmissibilityError, DomainError, NumericalError, PoleError, ValidationError
from .process import HypergeometricParams, laplace_exponent, validate
from .special import double_gamma_calibrate, double_gamma_log, mp_double_gamma

__all__ = [
    "ExpFunctionalSpec",
    "PoleGrid",
    "mellin_M",
    "mellin_log_M",
    "mellin_full",
    "mellin_log_full",
    "mellin_M_mp",
    "identity_residual",
    "distributional_identity_residual",
    "reflection_identity_residual",
]

POLE_TOL = 1e-10
_OVERFLOW_LOG = 700.0


@dataclass(frozen=True)
class PoleGrid:
    """Pole lattices of M: ``minus(m, n)`` to the left of the strip and
    ``plus(m, n)`` to the right."""

    left_origin: float
    right_origin: float
    delta: float

    def minus(self, m, n):
        return self.left_origin - m * self.delta - n

    def plus(self, m, n):
        return self.right_origin + m * self.delta + n

    def smallest(self, side, count):
        """The ``count`` lattice indices (m, n) closest to the strip."""
        size = count + 1
        idx = [(m, n) for m in range(size) for n in range(size)]
        idx.sort(key=lambda mn: mn[0] * self.delta + mn[1])
        return idx[:count]

    def contains(self, s, tol=POLE_TOL):
        """True when ``s`` is within ``tol * min(delta, 1)`` of a pole."""
        tol = tol * min(self.delta, 1.0)
        s = complex(s)
        if abs(s.imag) > tol:
            return False
        return (_on_half_lattice(self.left_origin - s.real, self.delta, tol)
                or _on_half_lattice(s.real - self.right_origin, self.delta, tol))


def _on_half_lattice(x, delta, tol):
    """Is x = m delta + n for some m, n >= 0 (within tol)?"""
    if x < -tol:
        return False
    for m in range(int(math.floor((x + tol) / delta)) + 1):
        r = x - m * delta
        if abs(r - round(r)) < tol and round(r) >= 0:
            return True
    return False


@dataclass(frozen=True)
class ExpFunctionalSpec:
    """Hypergeometric parameters together with the exponent ``alpha``.

    ``tilde_params`` holds ``(d beta, d gamma, d beta_hat, d gamma_hat)`` when
    that quadruple is admissible and is ``None`` otherwise.  The Mellin
    normalisation is computed at construction so evaluation is read-only.
    """

    params: HypergeometricParams
    alpha: float
    delta: float = field(init=False)
    tilde_params: HypergeometricParams | None = field(init=False)
    cramer_strip: tuple = field(init=False)
    poles: PoleGrid = field(init=False, repr=False)
    _log_norm: float = field(init=False, repr=False)

    def __post_init__(self):
        params = validate(self.params)
        alpha = float(self.alpha)
        if not (alpha > 0 and math.isfinite(alpha)):
            raise AdmissibilityError(f"alpha must be positive, got {alpha}")
        if not params.beta_hat > 0:
            raise AdmissibilityError("the Mellin transform needs beta_hat > 0 (Cramer condition)")
        delta = 1.0 / alpha
        b, g, bh, gh = params.as_tuple()
        try:
            tilde = HypergeometricParams(delta * b, delta * g, delta * bh, delta * gh)
        except AdmissibilityError:
            tilde = None
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "tilde_params", tilde)
        object.__setattr__(self, "cramer_strip", (0.0, 1.0 + bh * delta))
        object.__setattr__(self, "poles", PoleGrid(-(1 - b + g) * delta, 1 + bh * delta, delta))
        object.__setattr__(self, "_log_norm", 0.0)
        object.__setattr__(self, "_log_norm", -float(np.real(_log_M_raw(self, np.array(1.0 + 0j)))))

    @property
    def theta(self):
        """Cramer exponent beta_hat / alpha."""
        return self.params.beta_hat * self.delta

    @property
    def evaluator(self):
        return double_gamma_calibrate(self.delta)

    def tilde_spec(self):
        if self.tilde_params is None or self.tilde_params.beta_hat <= 0:
            raise DomainError("rescaled parameters are not admissible for this spec")
        return ExpFunctionalSpec(self.tilde_params, self.delta)

    def key(self):
        return (*self.params.as_tuple(), self.alpha)


def _arguments(spec, s):
    b, g, bh, gh = spec.params.as_tuple()
    d = spec.delta
    num = [(1 - b) * d + s, (bh + gh) * d + 1 - s]
    den = [(1 - b + g) * d + s, bh * d + 1 - s]
    return num, den


def _log_M_raw(spec, s):
    ev = spec.evaluator
    num, den = _arguments(spec, s)
    return (double_gamma_log(ev, num[0]) + double_gamma_log(ev, num[1])
            - double_gamma_log(ev, den[0]) - double_gamma_log(ev, den[1]))


def _check_poles(spec, s):
    for v in np.atleast_1d(s).ravel():
        if spec.poles.contains(v):
            raise PoleError(f"M(s): s={complex(v)} is at a pole")


def _zero_mask(spec, s):
    """Points where M vanishes (numerator double gamma on its zero lattice)."""
    b, g, bh, gh = spec.params.as_tuple()
    d = spec.delta
    tol = POLE_TOL * min(d, 1.0)
    flat = np.atleast_1d(s).ravel()
    mask = np.zeros(flat.shape, dtype=bool)
    for i, v in enumerate(flat):
        if abs(v.imag) <= tol:
            mask[i] = (_on_half_lattice(-(1 - b) * d - v.real, d, tol)
                       or _on_half_lattice(v.real - 1 - (bh + gh) * d, d, tol))
    return mask.reshape(np.shape(s))


def mellin_log_M(spec, s):
    """log M(s); ``-inf`` at zeros of M."""
    s = np.asarray(s, dtype=complex)
    _check_poles(spec, s)
    zero = _zero_mask(spec, s)
    out = np.full(s.shape, -np.inf + 0j, dtype=complex)
    if np.any(~zero):
        out[~zero] = _log_M_raw(spec, s[~zero]) + spec._log_norm
    return out[()] if out.ndim == 0 else out


def _to_linear(logv):
    if np.any(np.real(logv) > _OVERFLOW_LOG):
        raise NumericalError("Mellin transform overflows double precision")
    return np.exp(logv)


def mellin_M(spec, s):
    """M(s) for complex ``s`` (scalar or array)."""
    return _to_linear(mellin_log_M(spec, s))


def mellin_log_full(spec, s):
    """log of Gamma(s) M(s)."""
    s = np.asarray(s, dtype=complex)
    flat = s.ravel()
    near = (np.abs(flat.imag) < POLE_TOL) & (flat.real < 0.5) & (np.abs(flat.real - np.round(flat.real)) < POLE_TOL)
    if np.any(near):
        raise PoleError(f"Gamma(s) M(s): s at a pole of Gamma: {flat[near]}")
    return sc.loggamma(s) + mellin_log_M(spec, s)


def mellin_full(spec, s):
    """Gamma(s) M(s); equals E[I^(s-1)] for real ``s`` in the Cramer strip."""
    out = _to_linear(mellin_log_full(spec, s))
    return out


def mellin_M_mp(spec, s, dps=40):
    """M(s) in mpmath at ``dps`` digits (for high-precision series seeds)."""
    b, g, bh, gh = spec.params.as_tuple()
    with mpmath.workdps(dps + 10):
        # tau from alpha at full precision; the float delta is only 53 bits
        d = 1 / mpmath.mpf(spec.alpha)
        dg = mp_double_gamma(d, dps)
        b, g, bh, gh = (mpmath.mpf(v) for v in (b, g, bh, gh))

        def raw(x):
            return (dg.log((1 - b) * d + x) + dg.log((bh + gh) * d + 1 - x)
                    - dg.log((1 - b + g) * d + x) - dg.log(bh * d + 1 - x))

        s = mpmath.mpmathify(s)
        val = mpmath.exp(raw(s) - raw(mpmath.mpf(1)))
        if mpmath.im(val) == 0 or abs(mpmath.im(s)) == 0:
            val = mpmath.re(val)
        return val


def _rel(lhs, rhs):
    lhs, rhs = complex(lhs), complex(rhs)
    den = abs(lhs) + abs(rhs)
    return 0.0 if den == 0 else abs(lhs - rhs) / den


def _tilde_values(spec):
    d = spec.delta
    return tuple(d * v for v in spec.params.as_tuple())


def identity_residual(spec, s, which):
    """Relative residual of one functional identity of M at ``s``.

    ``which`` is ``"plus_one"`` (shift by 1), ``"plus_delta"`` (shift by
    delta) or ``"alpha_map"`` (exchange of alpha and delta).
    """
    s = complex(s)
    g, gh = spec.params.gamma, spec.params.gamma_hat
    a, d = spec.alpha, spec.delta
    if which == "plus_one":
        lhs = mellin_M(spec, s + 1)
        rhs = -mellin_M(spec, s) / laplace_exponent(spec.params, -a * s)
    elif which == "plus_delta":
        lhs = mellin_M(spec, s + d)
        psi_t = laplace_exponent(_tilde_values(spec), 1 - d - s)
        rhs = -a ** (-d * (g + gh)) * mellin_M(spec, s) / psi_t
    elif which == "alpha_map":
        if spec.tilde_params is None:
            raise DomainError("alpha_map identity needs admissible rescaled parameters")
        lhs = mellin_M(spec, s)
        rhs = a ** ((1 - s) * (g + gh)) * mellin_M(spec.tilde_spec(), 1 - a + a * s)
    else:
        raise ValidationError(f"unknown identity {which!r}")
    return _rel(lhs, rhs)


def distributional_identity_residual(spec, s):
    """Residual of Gamma(1-a+a s) Mf(s) = a^((1-s)(g+gh)) Gamma(s) Mf~(1-a+a s).

    This is the Mellin form of eps^a I(a, X) = a^-(g+gh) eps I(d, X~)^a in law,
    with eps ~ Exp(1) independent; it follows from the alpha_map identity.
    """
    if spec.tilde_params is None:
        raise DomainError("distributional identity needs admissible rescaled parameters")
    s = float(s)
    lo, hi = spec.cramer_strip
    if not lo < s < hi:
        raise DomainError(f"s={s} outside the Cramer strip {spec.cramer_strip}")
    a = spec.alpha
    g, gh = spec.params.gamma, spec.params.gamma_hat
    t = 1 - a + a * s
    lhs = math.gamma(t) * mellin_full(spec, s)
    rhs = a ** ((1 - s) * (g + gh)) * math.gamma(s) * mellin_full(spec.tilde_spec(), t)
    return _rel(lhs, rhs)


def _reflection_F(spec, w):
    b, g, bh, gh = spec.params.as_tuple()
    eta = spec.params.eta
    d = spec.delta
    ev = spec.evaluator
    return np.exp(sc.loggamma((1 - b + g) * d + d / 2 + w)
                  + double_gamma_log(ev, 1.5 * d + w) - double_gamma_log(ev, (g + 1.5) * d + w)
                  + double_gamma_log(ev, (eta - gh + 0.5) * d + w) - double_gamma_log(ev, (eta + 0.5) * d + w))


def reflection_identity_residual(spec, k, u):
    """Residual of the reflection-type identity relating Mf(c_k + iu) and
    Mf(c_k + k + iu), c_k = 1 - (1-b+g) d - d/2 - k."""
    k = int(k)
    if not 1 <= k <= 4:
        raise DomainError("reflection identity is checked for 1 <= k <= 4")
    b, g = spec.params.beta, spec.params.gamma
    a, d = spec.alpha, spec.delta
    ck = 1 - (1 - b + g) * d - d / 2 - k
    iu = 1j * float(u)
    lhs = mellin_full(spec, ck + iu)
    prod = 1.0 + 0j
    for j in range(k):
        prod *= np.cos(np.pi * a * (j - iu + g * d)) / np.cos(np.pi * a * (j - iu))
    rhs = (-1) ** k * mellin_full(spec, ck + k + iu) * prod * _reflection_F(spec, -iu) / _reflection_F(spec, -iu + k)
    return _rel(lhs, rhs)
