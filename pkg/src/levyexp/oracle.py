"""Independent checks: numerical Mellin inversion and Monte Carlo simulation.

Nothing here uses the series coefficients, so agreement with :mod:`series`
is a genuine cross-check.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats

from .errors import ConvergenceError, DomainError, ValidationError
from .mellin import ExpFunctionalSpec, mellin_full
from .process import (HypergeometricParams, Longtime, StableParams, classify,
                      laplace_exponent_derivative_at_zero, levy_density)

__all__ = [
    "HorizonPolicy",
    "SimulationConfig",
    "McEstimate",
    "InversionResult",
    "mellin_invert_density",
    "mellin_invert",
    "JumpSampler",
    "simulate_exponential_functional",
    "simulate_cutoff_refinement",
    "stable_sample",
    "simulate_stable_supremum",
    "mc_moment",
]


# ---------------------------------------------------------------------------
# Mellin inversion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InversionResult:
    value: np.ndarray
    imag: np.ndarray
    truncation: float
    step: float


def _as_evaluator(obj):
    if isinstance(obj, ExpFunctionalSpec):
        return lambda s: mellin_full(obj, s), obj.cramer_strip
    return obj, None


def _find_truncation(f, c, log_scale, tol, start=5.0, step=5.0, limit=4000.0):
    """Smallest T (on a coarse ladder) with |f(c + iu)| x^-c / rate < tol for u >= T."""
    us = np.arange(start, limit + step, step)
    prev = None
    for u in us:
        val = abs(f(np.array([c + 1j * u]))[0])
        lv = math.log(val) if val > 0 else -math.inf
        if prev is not None:
            rate = max((prev - lv) / step, 1e-3)
            if lv + log_scale - math.log(rate) < math.log(tol):
                return float(u)
        prev = lv
    raise ConvergenceError(
        f"Mellin transform decays too slowly on Re(s)={c}: |M| still above tolerance at |Im s|={limit}")


def mellin_invert(mellin_evaluator, x, contour_re=1.0, truncation=None, tol=1e-13,
                  rel_tol=1e-11, max_halvings=14):
    """Invert a Mellin transform on the vertical line Re(s) = ``contour_re``.

    ``mellin_evaluator`` is an :class:`ExpFunctionalSpec` or a vectorised
    callable.  The integral is truncated at ``|Im s| = truncation`` (chosen
    from the observed decay when not given) and computed with the trapezoid
    rule, halving the step until two successive estimates agree.
    """
    f, strip = _as_evaluator(mellin_evaluator)
    c = float(contour_re)
    if strip is not None:
        lo, hi = strip
        if not lo < c < hi:
            raise DomainError(f"contour Re(s)={c} outside the strip {strip}")
        if min(c - lo, hi - c) < 1e-3:
            raise DomainError(f"contour Re(s)={c} too close to a pole")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs <= 0):
        raise DomainError("inversion requires x > 0")
    lnx = np.log(xs)
    log_scale = float(np.max(-c * lnx))
    T = float(truncation) if truncation is not None else _find_truncation(f, c, log_scale, tol)
    h = min(0.5, T / 16)
    n = int(math.ceil(T / h))
    h = T / n
    u = h * np.arange(-n, n + 1)
    vals = f(c + 1j * u)
    w = np.full(u.size, h)
    w[0] = w[-1] = h / 2

    def integrate_grid(u, vals, w):
        phase = np.exp(-np.outer(lnx, c + 1j * u))
        return (phase * (vals * w)).sum(axis=1) / (2 * np.pi)

    est = integrate_grid(u, vals, w)
    for _ in range(max_halvings):
        mid = u[:-1] + h / 2
        mvals = f(c + 1j * mid)
        # refined trapezoid = half old + midpoints
        new = 0.5 * est + integrate_grid(mid, mvals, np.full(mid.size, h / 2))
        u = np.sort(np.concatenate([u, mid]))
        h = h / 2
        diff = np.abs(new - est)
        est = new
        if np.all(diff <= rel_tol * np.abs(est.real) + tol * np.exp(-c * lnx)):
            break
    else:
        raise ConvergenceError("Mellin inversion did not converge under step halving")
    shape = np.shape(x)
    return InversionResult(est.real.reshape(shape), est.imag.reshape(shape), T, h)


def mellin_invert_density(mellin_evaluator, x, contour_re=1.0, truncation=None, **kw):
    """Density at ``x`` by numerical Mellin inversion (real part; see
    :func:`mellin_invert` for the imaginary-part health metric)."""
    res = mellin_invert(mellin_evaluator, x, contour_re, truncation, **kw)
    v = res.value
    return v[()] if np.ndim(v) == 0 else v


# ---------------------------------------------------------------------------
# Monte Carlo: exponential functionals
# ---------------------------------------------------------------------------

class HorizonPolicy(str, enum.Enum):
    """When a simulated path stops contributing to the integral.

    ``UNTIL_KILLED`` runs until the exponential killing clock rings (needs a
    positive kill rate).  ``UNTIL_DRIFT_DOMINATES`` also stops once the
    remaining-integral scale ``exp(-alpha X_t) / (alpha * E[X_1])`` drops
    below ``drift_threshold`` times the accumulated value.
    """

    UNTIL_KILLED = "until_killed"
    UNTIL_DRIFT_DOMINATES = "until_drift_dominates"


@dataclass(frozen=True)
class SimulationConfig:
    jump_cutoff: float = 1e-3
    n_paths: int = 100_000
    horizon_policy: HorizonPolicy | None = None
    drift_threshold: float = 1e-12
    rng_seed: int = 0
    chunk_size: int = 1 << 15
    max_events: int = 1_000_000
    workers: int = 1

    def __post_init__(self):
        if not self.jump_cutoff > 0:
            raise ValidationError("jump_cutoff must be positive")
        if int(self.n_paths) < 1:
            raise ValidationError("n_paths must be >= 1")
        if int(self.chunk_size) < 1:
            raise ValidationError("chunk_size must be >= 1")
        if not 0 < self.drift_threshold < 1:
            raise ValidationError("drift_threshold must lie in (0, 1)")
        if self.horizon_policy is not None:
            object.__setattr__(self, "horizon_policy", HorizonPolicy(self.horizon_policy))


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_effective: int


class _SideTable:
    """Inverse-CDF table for the jumps of one sign with size >= eps."""

    def __init__(self, params, sign, eps, tail_start, n_grid):
        b, g, bh, gh = params.as_tuple()
        self.rate = (1 - b + g) if sign > 0 else (bh + gh)
        self.tail_start = tail_start
        u = np.linspace(math.log(eps), math.log(tail_start), n_grid)
        x = np.exp(u)
        dens = levy_density(params, sign * x) * x
        self.u = u
        self.cdf = integrate.cumulative_trapezoid(dens, u, initial=0.0)
        first_moment = integrate.trapezoid(dens * x, u)
        # beyond tail_start the hypergeometric factor is 1 to double precision,
        # so the density is an exact exponential there
        k_tail = float(levy_density(params, sign * tail_start))
        self.tail_mass = k_tail / self.rate
        self.body_mass = float(self.cdf[-1])
        self.mass = self.body_mass + self.tail_mass
        self.first_moment = sign * (first_moment + k_tail * (tail_start / self.rate + 1 / self.rate ** 2))

    def sample(self, uniforms, exponentials):
        """Jump sizes (positive) from uniforms on (0, 1) and unit exponentials."""
        target = uniforms * self.mass
        body = target < self.body_mass
        out = np.empty_like(target)
        out[body] = np.exp(np.interp(target[body], self.cdf, self.u))
        out[~body] = self.tail_start + exponentials[~body] / self.rate
        return out


class JumpSampler:
    """Compound Poisson approximation of a hypergeometric process.

    Jumps of size at least ``eps`` are kept exactly (inverse CDF on a
    log-spaced table plus an exponential tail).  The smaller jumps are
    replaced by their mean, so the linear drift is
    ``psi'(0) - int_{|x|>=eps} x pi(x) dx``.
    """

    def __init__(self, params, eps=1e-3, n_grid=8192, tail_start=36.0):
        self.params = params
        self.eps = float(eps)
        self.plus = _SideTable(params, 1, eps, tail_start, n_grid)
        self.minus = _SideTable(params, -1, eps, tail_start, n_grid)
        info = classify(params)
        self.kill_rate = info.kill_rate
        self.mean = laplace_exponent_derivative_at_zero(params)
        self.drift = self.mean - self.plus.first_moment - self.minus.first_moment

    @property
    def intensity(self):
        return self.plus.mass + self.minus.mass

    def sample(self, rng, size):
        up = rng.random(size) < self.plus.mass / self.intensity
        u = rng.random(size)
        e = rng.standard_exponential(size)
        out = np.empty(size)
        out[up] = self.plus.sample(u[up], e[up])
        out[~up] = -self.minus.sample(u[~up], e[~up])
        return out


def _segment_integral(x, drift, alpha, dt):
    """int_0^dt exp(-alpha (x + drift s)) ds, vectorised."""
    y = alpha * drift * dt
    small = np.abs(y) < 1e-12
    ratio = np.where(small, 1.0, -np.expm1(-y) / np.where(small, 1.0, y))
    return np.exp(-alpha * x) * dt * ratio


def _resolve_policy(config, sampler, longtime):
    policy = config.horizon_policy
    if policy is None:
        policy = HorizonPolicy.UNTIL_KILLED if sampler.kill_rate > 0 else HorizonPolicy.UNTIL_DRIFT_DOMINATES
    if sampler.kill_rate <= 0:
        if longtime is not Longtime.DRIFTS_PLUS:
            raise ConvergenceError(
                f"the process is not killed and does not drift to +inf ({longtime.value}); "
                "the exponential functional is infinite")
        if policy is HorizonPolicy.UNTIL_KILLED:
            raise ConvergenceError("horizon policy until_killed cannot terminate without killing")
    return policy


def _first_true(mask):
    """Index of the first True along the last axis (size of that axis if none)."""
    k = mask.shape[-1]
    return np.where(mask.any(axis=-1), mask.argmax(axis=-1), k)


def _simulate_chunk(sampler, alpha, policy, config, seed_words, n, levels, work=1 << 16):
    """Simulate ``n`` paths; ``levels`` is a list of ``(cutoff, drift)``.

    All levels share the event times, killing and jumps of the finest level;
    level ``l`` ignores jumps smaller than its cutoff and uses its own drift.
    Each round advances every live path by a block of events.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed_words)))
    total = sampler.intensity + sampler.kill_rate
    p_kill = sampler.kill_rate / total
    cutoffs = np.array([c for c, _ in levels])[:, None, None]
    drifts = np.array([d for _, d in levels])[:, None, None]
    truncate = policy is HorizonPolicy.UNTIL_DRIFT_DOMINATES and sampler.mean > 0
    scale = 1.0 / (alpha * sampler.mean) if truncate else 0.0
    x = np.zeros((len(levels), n))
    acc = np.zeros((len(levels), n))
    jumps = np.zeros(n, dtype=np.int64)
    killed_first = np.zeros(n, dtype=bool)
    active = np.arange(n)
    events = 0
    while active.size:
        m = active.size
        k = max(1, min(1024, work // m))
        events += k
        if events > config.max_events + k:
            raise ConvergenceError(f"paths still running after {config.max_events} events")
        dt = rng.standard_exponential((m, k)) / total
        kill = rng.random((m, k)) < p_kill
        j = sampler.sample(rng, m * k).reshape(m, k)
        j[kill] = 0.0
        step = drifts * dt + np.where(np.abs(j) >= cutoffs, j, 0.0)
        after = x[:, active, None] + np.cumsum(step, axis=-1)
        before = np.concatenate([x[:, active, None], after[..., :-1]], axis=-1)
        seg = _segment_integral(before, drifts, alpha, dt)
        acc_path = acc[:, active, None] + np.cumsum(seg, axis=-1)
        stop = kill.copy()
        if truncate:
            stop |= (np.exp(-alpha * after) * scale < config.drift_threshold * acc_path).all(axis=0)
        end = _first_true(stop)
        finished = end < k
        last = np.minimum(end, k - 1)
        idx = np.arange(m)
        acc[:, active] = acc_path[:, idx, last]
        x[:, active] = after[:, idx, last]
        first_kill = _first_true(kill)
        killed_first[active[(first_kill == 0) & (jumps[active] == 0)]] = True
        jumps[active] += np.minimum(first_kill, last + 1)
        active = active[~finished]
    return acc, killed_first


def _run_chunks(spec, config, sampler, levels):
    policy = _resolve_policy(config, sampler, classify(spec.params).longtime)
    n = int(config.n_paths)
    size = int(config.chunk_size)
    jobs = [(k, min(size, n - k * size)) for k in range((n + size - 1) // size)]
    seed = int(config.rng_seed) & ((1 << 64) - 1)

    def run(job):
        k, m = job
        return _simulate_chunk(sampler, spec.alpha, policy, config, [seed, k], m, levels)

    if config.workers > 1 and len(jobs) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(config.workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]
    samples = np.concatenate([r[0] for r in results], axis=1)
    if not np.all(np.isfinite(samples)):
        raise ConvergenceError("non-finite exponential functional sample; the path went too far negative")
    killed_first = int(sum(int(r[1].sum()) for r in results))
    return samples, killed_first, policy


def simulate_exponential_functional(spec, config=None, return_info=False):
    """Approximate i.i.d. samples of ``int_0^zeta exp(-alpha X_t) dt``.

    Paths are piecewise linear between the jumps of size at least
    ``config.jump_cutoff``; each linear piece is integrated in closed form.
    Paths are simulated in chunks, chunk ``k`` drawing from a Philox stream
    seeded by ``(rng_seed, k)``, so the output only depends on the seed,
    ``n_paths`` and ``chunk_size``.

    With ``return_info`` a dict with the sampler and the number of paths
    killed before their first jump is returned as well.
    """
    config = config or SimulationConfig()
    sampler = JumpSampler(spec.params, config.jump_cutoff)
    samples, killed_first, policy = _run_chunks(
        spec, config, sampler, [(sampler.eps, sampler.drift)])
    if return_info:
        return samples[0], {"sampler": sampler, "killed_before_jump": killed_first, "policy": policy}
    return samples[0]


def simulate_cutoff_refinement(spec, config=None, factor=4.0):
    """Coupled samples at cutoffs ``eps`` and ``eps / factor`` (``eps = config.jump_cutoff``).

    Both use the same random events: the coarse path is the fine one with
    jumps in ``[eps / factor, eps)`` replaced by their mean.  Returns
    ``(coarse, fine)``; their difference isolates the cutoff bias.
    """
    config = config or SimulationConfig()
    if not factor > 1:
        raise ValidationError("factor must exceed 1")
    fine = JumpSampler(spec.params, config.jump_cutoff / factor)
    coarse = JumpSampler(spec.params, config.jump_cutoff)
    samples, _, _ = _run_chunks(
        spec, config, fine, [(coarse.eps, coarse.drift), (fine.eps, fine.drift)])
    return samples[0], samples[1]


def mc_moment(samples, s):
    """Estimate ``E[I^(s-1)]`` from samples, with its standard error.

    Warns when the sample excess kurtosis of ``I^(s-1)`` is huge, which
    signals that ``s`` is close to the edge of the moment strip and the
    standard error is unreliable.
    """
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    if n < 2:
        raise ValidationError("need at least two samples")
    if s == 1:
        return McEstimate(1.0, 0.0, n)
    y = samples ** (s - 1)
    mean = float(y.mean())
    sd = float(y.std(ddof=1))
    if sd > 0:
        kurt = float(stats.kurtosis(y))
        if kurt > 0.1 * n:
            warnings.warn(f"heavy-tailed moment estimate (sample excess kurtosis {kurt:.3g}); "
                          "the standard error is unreliable", RuntimeWarning, stacklevel=2)
    return McEstimate(mean, sd / math.sqrt(n), n)


# ---------------------------------------------------------------------------
# Monte Carlo: stable processes
# ---------------------------------------------------------------------------

def _stable_s1(stable):
    """(skewness, scale) of the S1 parametrisation for exponent
    ``exp(pi i alpha (1 - 2 rho) / 2 sgn(z)) |z|^alpha``."""
    a, r = stable.alpha, stable.rho
    skew = math.tan(math.pi * a * (r - 0.5)) / math.tan(math.pi * a / 2)
    scale = math.cos(math.pi * a * (r - 0.5)) ** (1 / a)
    return skew, scale


def stable_sample(stable, size, rng=None):
    """Draws of ``Y_1`` with ``P(Y_1 > 0) = rho`` (Chambers-Mallows-Stuck via scipy)."""
    if abs(stable.alpha - 1) < 1e-12:
        raise DomainError("alpha = 1 is not supported")
    rng = rng if rng is not None else np.random.default_rng()
    skew, scale = _stable_s1(stable)
    return stats.levy_stable.rvs(stable.alpha, skew, scale=scale, size=size, random_state=rng)


def simulate_stable_supremum(stable, n_steps, config=None, block_paths=256):
    """Maxima of the random-walk skeleton of ``Y`` on ``[0, 1]`` with ``n_steps`` steps.

    The skeleton misses excursions between grid points, so the samples are
    stochastically smaller than ``sup_{t<=1} Y_t``.
    """
    if int(n_steps) < 1000:
        raise ValidationError("n_steps must be >= 1000")
    config = config or SimulationConfig()
    n_steps = int(n_steps)
    n = int(config.n_paths)
    step_scale = (1.0 / n_steps) ** (1 / stable.alpha)
    seed = int(config.rng_seed) & ((1 << 64) - 1)
    out = np.empty(n)
    for k, start in enumerate(range(0, n, block_paths)):
        m = min(block_paths, n - start)
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, k])))
        walk = np.cumsum(step_scale * stable_sample(stable, (m, n_steps), rng), axis=1)
        out[start:start + m] = np.maximum(walk.max(axis=1), 0.0)
    return out
