"""Monte Carlo oracle: dependent uniforms, wrapped log-products and digit counts.

Random numbers come from Philox4x64-10, a counter-based generator with
published known-answer vectors.  Block ``b`` of a run with seed ``s`` is drawn
from ``Philox(key=s)`` advanced by ``b`` jumps, so any block can be replayed
on its own and merged in any order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .copulas import CopulaSpec, conditional_cdf
from .marginals import LogMarginal

BLOCK_SIZE = 1 << 16
BRACKET = (1e-12, 1.0 - 1e-12)
INVERSION_TOL = 1e-10
_BISECTION_WIDTH = 1e-4
_MAX_SECANT = 60
# smallest and largest doubles strictly inside (0, 1)
_U_MIN = np.finfo(float).tiny
_U_MAX = 1.0 - np.finfo(float).epsneg


class SamplerUnavailable(NotImplementedError):
    """No validated sampler exists for this (family, alpha, n) combination."""


@dataclass(frozen=True)
class SampleBatch:
    uniforms: np.ndarray
    seed: int
    copula: CopulaSpec
    converged: np.ndarray

    @property
    def count(self) -> int:
        return self.uniforms.shape[0]


def block_generator(seed: int, block: int) -> np.random.Generator:
    """Deterministic substream for ``(seed, block)``."""
    if not 0 <= int(seed) < 1 << 64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.Generator(np.random.Philox(key=int(seed)).jumped(int(block)))


def supports(spec: CopulaSpec) -> bool:
    if spec.family == "independence":
        return True
    if spec.family == "clayton":
        return spec.alpha > 0
    return spec.n == 2


def _clayton_block(rng, alpha, rows, n):
    frailty = rng.standard_gamma(1.0 / alpha, size=rows)
    expo = rng.standard_exponential(size=(rows, n))
    # psi(E / V) with psi(t) = (1 + t)^(-1/alpha) for a unit-scale Gamma(1/alpha) frailty
    u = np.exp(-np.log1p(expo / frailty[:, None]) / alpha)
    return u, np.ones(rows, dtype=bool)


def invert_conditional(spec: CopulaSpec, u1: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Solve ``P(U2 <= v | U1 = u1) = w`` for ``v`` by bisection then secant steps.

    Targets below (above) the conditional CDF at the lower (upper) bracket end
    are mapped to that end.  Returns the roots and a per-row convergence flag.
    """
    u1 = np.asarray(u1, dtype=float)
    w = np.asarray(w, dtype=float)

    def resid(v):
        return conditional_cdf(spec, np.stack([u1, v], axis=-1)) - w

    lo = np.full(u1.shape, BRACKET[0])
    hi = np.full(u1.shape, BRACKET[1])
    f_lo = resid(lo)
    f_hi = resid(hi)
    below = f_lo >= 0
    above = f_hi <= 0
    while np.max(hi - lo) > _BISECTION_WIDTH:
        mid = 0.5 * (lo + hi)
        f_mid = resid(mid)
        left = f_mid < 0
        lo = np.where(left, mid, lo)
        f_lo = np.where(left, f_mid, f_lo)
        hi = np.where(left, hi, mid)
        f_hi = np.where(left, f_hi, f_mid)

    root = 0.5 * (lo + hi)
    done = (hi - lo) <= INVERSION_TOL
    for _ in range(_MAX_SECANT):
        if np.all(done):
            break
        denom = f_hi - f_lo
        with np.errstate(divide="ignore", invalid="ignore"):
            step = lo - f_lo * (hi - lo) / denom
        # fall back to bisection when the secant point leaves the bracket
        bad = ~np.isfinite(step) | (step <= lo) | (step >= hi)
        trial = np.where(bad, 0.5 * (lo + hi), step)
        f_trial = resid(trial)
        left = f_trial < 0
        moved = np.abs(trial - root)
        root = np.where(done, root, trial)
        lo = np.where(done | ~left, lo, trial)
        f_lo = np.where(done | ~left, f_lo, f_trial)
        hi = np.where(done | left, hi, trial)
        f_hi = np.where(done | left, f_hi, f_trial)
        done = done | (moved <= INVERSION_TOL) | (f_trial == 0)
    root = np.where(below, BRACKET[0], np.where(above, BRACKET[1], root))
    return root, done | below | above


def _conditional_block(rng, spec, rows):
    base = rng.random((rows, 2))
    u1 = np.clip(base[:, 0], *BRACKET)
    v, ok = invert_conditional(spec, u1, base[:, 1])
    return np.stack([u1, v], axis=1), ok


def sample_copula(spec: CopulaSpec, count: int, seed: int = 0, method: str = "auto") -> SampleBatch:
    """``count`` draws from the copula, reproducible from ``seed``.

    Clayton with ``alpha > 0`` uses the Gamma frailty construction in any
    dimension; bivariate AMH and Gumbel-Barnett use conditional inversion.
    ``method="conditional"`` forces inversion for a bivariate Clayton copula,
    which gives a second, independent sampler to compare against.
    """
    count = int(count)
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    if not supports(spec):
        raise SamplerUnavailable(f"no sampler for {spec.family} with alpha={spec.alpha}, n={spec.n}")
    if method not in ("auto", "conditional"):
        raise ValueError(f"unknown sampling method {method!r}")
    if method == "conditional" and spec.n != 2:
        raise SamplerUnavailable("conditional inversion is implemented for bivariate copulas")
    inverted = method == "conditional" or spec.family in ("amh", "gumbel_barnett")
    parts, flags = [], []
    for block, start in enumerate(range(0, count, BLOCK_SIZE)):
        rows = min(BLOCK_SIZE, count - start)
        rng = block_generator(seed, block)
        if inverted:
            u, ok = _conditional_block(rng, spec, rows)
        elif spec.family == "independence":
            u, ok = rng.random((rows, spec.n)), np.ones(rows, dtype=bool)
        else:
            u, ok = _clayton_block(rng, spec.alpha, rows, spec.n)
        parts.append(np.clip(u, _U_MIN, _U_MAX))
        flags.append(ok)
    uniforms = np.concatenate(parts) if parts else np.empty((0, spec.n))
    converged = np.concatenate(flags) if flags else np.empty(0, dtype=bool)
    return SampleBatch(uniforms, int(seed), spec, converged)


def sample_products(
    spec: CopulaSpec, marginals: Sequence[LogMarginal], count: int, seed: int = 0
) -> tuple[np.ndarray, int]:
    """Wrapped log-products ``(sum_i F_i^{-1}(u_i)) mod 1`` and the number of rows dropped.

    Rows whose conditional inversion did not converge are excluded.
    """
    if len(marginals) != spec.n:
        raise ValueError(f"copula has dimension {spec.n} but {len(marginals)} marginals were given")
    batch = sample_copula(spec, count, seed)
    u = batch.uniforms[batch.converged]
    total = np.zeros(u.shape[0])
    for i, m in enumerate(marginals):
        total += m.ppf(u[:, i])
    return np.mod(total, 1.0), int(batch.count - u.shape[0])


def sample_marginal(marginal: LogMarginal, count: int, seed: int = 0) -> np.ndarray:
    """Draws of a single log-marginal by inversion."""
    batch = sample_copula(CopulaSpec("independence", 2), count, seed)
    return marginal.ppf(batch.uniforms[:, 0])


@dataclass(frozen=True)
class Histogram:
    heights: np.ndarray
    edges: np.ndarray
    stderr: np.ndarray
    count: int

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])


def empirical_wrapped_pdf(samples, bins: int = 50) -> Histogram:
    """Density histogram of values in [0, 1) with binomial standard errors."""
    if int(bins) != bins or bins < 2:
        raise ValueError(f"bins must be an integer >= 2, got {bins}")
    samples = np.asarray(samples, dtype=float)
    edges = np.linspace(0.0, 1.0, int(bins) + 1)
    counts, _ = np.histogram(samples, bins=edges)
    total = samples.size
    if total == 0:
        zeros = np.zeros(int(bins))
        return Histogram(zeros, edges, zeros, 0)
    width = 1.0 / bins
    frac = counts / total
    return Histogram(frac / width, edges, np.sqrt(frac * (1.0 - frac) / total) / width, int(total))


def digit_counts(wrapped, base: int = 10) -> np.ndarray:
    """Leading-digit counts ``d = 1..B-1`` from wrapped log-significands."""
    wrapped = np.mod(np.asarray(wrapped, dtype=float), 1.0)
    digits = np.floor(np.exp(wrapped * math.log(base))).astype(int)
    digits = np.clip(digits, 1, base - 1)
    return np.bincount(digits, minlength=base)[1:base]
