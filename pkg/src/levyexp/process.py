"""Hypergeometric Levy processes.

A process is given by four parameters ``(beta, gamma, beta_hat, gamma_hat)``;
its Laplace exponent ``psi(z) = log E[exp(z X_1)]`` is the gamma ratio

    psi(z) = - G(1-b+g-z) G(bh+gh+z) / ( G(1-b-z) G(bh+z) )

with ``G`` the gamma function.  This module validates parameters, evaluates
psi, the Levy density, the Wiener-Hopf factors, classifies path behaviour and
maps the three Lamperti-stable processes onto the family.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import special as sc

from .errors import AdmissibilityError, PoleError, ValidationError
from .special import digamma, gamma_ratio, gauss_2f1

__all__ = [
    "HypergeometricParams",
    "StableParams",
    "Longtime",
    "Variation",
    "ProcessClassification",
    "validate",
    "laplace_exponent",
    "laplace_exponent_mp",
    "laplace_exponent_derivative_at_zero",
    "levy_density",
    "classify",
    "wiener_hopf_factors",
    "lamperti_stable",
    "dual",
]


@dataclass(frozen=True)
class HypergeometricParams:
    beta: float
    gamma: float
    beta_hat: float
    gamma_hat: float

    def __post_init__(self):
        for name in ("beta", "gamma", "beta_hat", "gamma_hat"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise AdmissibilityError(f"{name} must be finite, got {v}")
        if not self.beta <= 1:
            raise AdmissibilityError(f"beta must be <= 1, got {self.beta}")
        if not 0 < self.gamma < 1:
            raise AdmissibilityError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not self.beta_hat >= 0:
            raise AdmissibilityError(f"beta_hat must be >= 0, got {self.beta_hat}")
        if not 0 < self.gamma_hat < 1:
            raise AdmissibilityError(f"gamma_hat must lie in (0, 1), got {self.gamma_hat}")

    @property
    def eta(self):
        return 1.0 - self.beta + self.gamma + self.beta_hat + self.gamma_hat

    def as_tuple(self):
        return (self.beta, self.gamma, self.beta_hat, self.gamma_hat)


@dataclass(frozen=True)
class StableParams:
    """Strictly stable process with index ``alpha`` and positivity parameter
    ``rho = P(Y_1 > 0)``."""

    alpha: float
    rho: float

    def __post_init__(self):
        if not 0 < self.alpha < 2:
            raise AdmissibilityError(f"alpha must lie in (0, 2), got {self.alpha}")
        if not 0 < self.rho < 1:
            raise AdmissibilityError(f"rho must lie in (0, 1), got {self.rho}")
        ar, arc = self.alpha * self.rho, self.alpha * (1 - self.rho)
        if not (0 < ar < 1 and 0 < arc < 1):
            raise AdmissibilityError(
                f"need alpha*rho and alpha*(1-rho) in (0, 1), got {ar} and {arc}")

    @property
    def c_plus(self):
        return math.gamma(1 + self.alpha) * math.sin(math.pi * self.alpha * self.rho) / math.pi

    @property
    def c_minus(self):
        return math.gamma(1 + self.alpha) * math.sin(math.pi * self.alpha * (1 - self.rho)) / math.pi


class Longtime(str, enum.Enum):
    KILLED = "killed"
    DRIFTS_PLUS = "drifts_plus"
    DRIFTS_MINUS = "drifts_minus"
    OSCILLATES = "oscillates"


class Variation(str, enum.Enum):
    BOUNDED_NO_DRIFT = "bounded_no_drift"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class ProcessClassification:
    kill_rate: float
    mean: float
    longtime: Longtime
    variation: Variation
    mean_conditional_on_survival: bool = False


def validate(params):
    """Return ``params`` as a validated :class:`HypergeometricParams`.

    Accepts an existing instance, a 4-sequence or a mapping with the field
    names.  Raises :class:`AdmissibilityError` naming the violated bound.
    """
    if isinstance(params, HypergeometricParams):
        return HypergeometricParams(*params.as_tuple())
    if isinstance(params, dict):
        return HypergeometricParams(**{k: float(v) for k, v in params.items()})
    try:
        values = [float(v) for v in params]
    except TypeError as exc:
        raise ValidationError(f"cannot interpret {params!r} as hypergeometric parameters") from exc
    if len(values) != 4:
        raise ValidationError(f"expected 4 parameters, got {len(values)}")
    return HypergeometricParams(*values)


def _values(params):
    if isinstance(params, HypergeometricParams):
        return params.as_tuple()
    return tuple(float(v) for v in params)


def _psi_args(p, z):
    b, g, bh, gh = _values(p)
    return [1 - b + g - z, bh + gh + z], [1 - b - z, bh + z]


def laplace_exponent(params, z):
    """psi(z) for complex ``z`` (scalar or array).

    ``params`` may also be a raw 4-tuple, which skips the admissibility check;
    the Mellin identities need psi at rescaled parameters that can leave the
    admissible set.
    """
    z = np.asarray(z, dtype=complex)
    num, den = _psi_args(params, z)
    try:
        out = -gamma_ratio(num, den)
    except PoleError as exc:
        raise PoleError(f"laplace_exponent: z at a pole of psi ({exc})") from None
    return out


def laplace_exponent_mp(params, z):
    """psi(z) in mpmath arithmetic at the current working precision."""
    b, g, bh, gh = (mpmath.mpf(v) for v in _values(params))
    return -mpmath.gammaprod([1 - b + g - z, bh + gh + z], [1 - b - z, bh + z])


def laplace_exponent_derivative_at_zero(params):
    """psi'(0), i.e. E[X_1] for the unkilled process (finite for all admissible params)."""
    b, g, bh, gh = params.as_tuple()
    # psi(z) = -P(z) * R1(z) * R2(z) with R1 = 1/G(1-b-z), R2 = 1/G(bh+z)
    P0 = math.gamma(1 - b + g) * math.gamma(bh + gh)
    dlogP0 = -sc.psi(1 - b + g) + sc.psi(bh + gh)

    def rg_and_derivative(w, dw_dz):
        # returns (1/G(w), d/dz 1/G(w))
        if abs(w) < 1e-15:
            return 0.0, dw_dz * 1.0
        r = sc.rgamma(w)
        return r, -dw_dz * sc.psi(w) * r

    r1, dr1 = rg_and_derivative(1 - b, -1.0)
    r2, dr2 = rg_and_derivative(bh, 1.0)
    return float(-(P0 * dlogP0 * r1 * r2 + P0 * dr1 * r2 + P0 * r1 * dr2))


def levy_density(params, x):
    """Density of the Levy measure at real ``x != 0`` (scalar or array)."""
    x = np.asarray(x, dtype=float)
    if np.any(x == 0):
        raise ValidationError("levy_density: x must be non-zero")
    b, g, bh, gh = params.as_tuple()
    eta = params.eta
    out = np.empty_like(x)
    pos = x > 0
    if np.any(pos):
        xp = x[pos]
        k = -math.exp(sc.gammaln(eta) - sc.gammaln(eta - gh)) / sc.gamma(-g)
        out[pos] = k * np.exp(-(1 - b + g) * xp) * gauss_2f1(1 + g, eta, eta - gh, np.exp(-xp))
    if np.any(~pos):
        xn = x[~pos]
        k = -math.exp(sc.gammaln(eta) - sc.gammaln(eta - g)) / sc.gamma(-gh)
        out[~pos] = k * np.exp((bh + gh) * xn) * gauss_2f1(1 + gh, eta, eta - g, np.exp(xn))
    return out[()] if out.ndim == 0 else out


def classify(params):
    """Kill rate, mean, long-time behaviour and path variation."""
    b, g, bh, gh = params.as_tuple()
    killed = b < 1 and bh > 0
    q = 0.0
    if killed:
        q = math.exp(sc.gammaln(1 - b + g) + sc.gammaln(bh + gh) - sc.gammaln(1 - b) - sc.gammaln(bh))
        q *= sc.gammasgn(1 - b) * sc.gammasgn(1 - b + g)
    if b == 1 and bh == 0:
        longtime, mean = Longtime.OSCILLATES, 0.0
    elif b == 1:
        longtime = Longtime.DRIFTS_PLUS
        mean = math.gamma(g) * math.gamma(bh + gh) / math.gamma(bh)
    elif bh == 0:
        longtime = Longtime.DRIFTS_MINUS
        mean = -math.gamma(gh) * math.gamma(1 - b + g) / math.gamma(1 - b)
    else:
        longtime = Longtime.KILLED
        mean = laplace_exponent_derivative_at_zero(params)
    variation = Variation.BOUNDED_NO_DRIFT if g + gh < 1 else Variation.UNBOUNDED
    return ProcessClassification(float(q), float(mean), longtime, variation,
                                 mean_conditional_on_survival=killed)


def wiener_hopf_factors(params, z):
    """(kappa(q, z), kappa_hat(q, z)) with -psi(z) = kappa(q, -z) kappa_hat(q, z)."""
    b, g, bh, gh = params.as_tuple()
    z = np.asarray(z, dtype=complex)
    kappa = gamma_ratio([1 - b + g + z], [1 - b + z])
    kappa_hat = gamma_ratio([bh + gh + z], [bh + z])
    return kappa, kappa_hat


def lamperti_stable(kind, stable):
    """Hypergeometric parameters of the Lamperti-stable process ``kind``.

    ``kind`` is ``"star"`` (stable process killed on leaving (0, inf)),
    ``"up"`` (conditioned to stay positive) or ``"down"`` (conditioned to hit
    zero continuously).
    """
    a, r = stable.alpha, stable.rho
    kind = str(kind).lower()
    if kind == "star":
        return HypergeometricParams(1 - a * (1 - r), a * r, 1 - a * (1 - r), a * (1 - r))
    if kind == "up":
        return HypergeometricParams(1.0, a * r, 1.0, a * (1 - r))
    if kind == "down":
        return HypergeometricParams(0.0, a * r, 0.0, a * (1 - r))
    raise ValidationError(f"unknown Lamperti-stable kind {kind!r}")


def dual(params):
    """Parameters of -X."""
    b, g, bh, gh = params.as_tuple()
    return HypergeometricParams(1 - bh, gh, 1 - b, g)


def digamma_reflection_residual(alpha):
    """|Psi(2-a) - Psi(a) - pi cot(pi a) - 1/(1-a)| (used by the Lamperti check)."""
    return abs(digamma(2 - alpha) - digamma(alpha) - math.pi / math.tan(math.pi * alpha) - 1 / (1 - alpha))
