"""Distances from Benford behavior, copula-norm bounds and chi-square diagnostics."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .copulas import CopulaSpec, copula_density
from .quadrature import sobol_rqmc
from .wrapped import WrappedPdfEstimate

# Critical values quoted alongside the standard chi-square ones, keyed by dof.
FIXED_THRESHOLDS = {11: 2.6, 8: 1.3}
SIGNIFICANCE = 0.005


def benford_digit_prob(d: int, base: int = 10) -> float:
    """``log_B((d + 1) / d)``, the Benford probability of leading digit ``d``."""
    if int(base) != base or base < 2:
        raise ValueError(f"base must be an integer >= 2, got {base}")
    if int(d) != d or not 1 <= d <= base - 1:
        raise ValueError(f"digit must be an integer in [1, {base - 1}], got {d}")
    return math.log1p(1.0 / d) / math.log(base)


def benford_digit_probs(base: int = 10) -> np.ndarray:
    return np.array([benford_digit_prob(d, base) for d in range(1, base)])


# -- pointwise and L1 distances ------------------------------------------------


def epsilon_at(estimate: WrappedPdfEstimate, index: int) -> float:
    """``|1 - pdf(s)|`` at one grid point."""
    return float(abs(1.0 - estimate.values[index]))


def epsilon_grid(estimate: WrappedPdfEstimate) -> np.ndarray:
    return np.abs(1.0 - estimate.values)


def epsilon_w_grid(estimate: WrappedPdfEstimate, reference: WrappedPdfEstimate) -> np.ndarray:
    """Pointwise gap between the coupled density and the independent one with the same marginals."""
    if not np.array_equal(estimate.s_grid, reference.s_grid):
        raise ValueError("estimate and reference must share the s grid")
    return np.abs(reference.values - estimate.values)


def l1_benford_distance(estimate: WrappedPdfEstimate) -> float:
    """Periodic trapezoid integral of ``|1 - pdf(s)|`` over [0, 1)."""
    return float(np.mean(epsilon_grid(estimate)))


def l1_w_distance(estimate: WrappedPdfEstimate, reference: WrappedPdfEstimate) -> float:
    return float(np.mean(epsilon_w_grid(estimate, reference)))


# -- copula norm -------------------------------------------------------------------


@dataclass(frozen=True)
class NormEstimate:
    value: float
    stderr: float
    method: str
    points: int
    converged: bool


def l1_copula_norm(
    copula: CopulaSpec, log2_points: int = 16, scrambles: int = 8, seed: int = 0, rel_target: float = 0.05
) -> NormEstimate:
    """``integral over (0,1)^n of |1 - c(u)|`` by randomized Sobol QMC."""
    if copula.family == "independence":
        return NormEstimate(0.0, 0.0, "exact", 0, True)

    def func(p):
        p = np.clip(p, 1e-300, 1.0 - 1e-16)
        return np.abs(1.0 - copula_density(copula, p))[:, None]

    mean, err = sobol_rqmc(func, copula.n, log2_points, scrambles=scrambles, seed=seed)
    value, stderr = float(mean[0]), float(err[0])
    return NormEstimate(value, stderr, "rqmc", scrambles << log2_points, stderr <= rel_target * value + 1e-6)


def l1_copula_norm_mc(copula: CopulaSpec, count: int = 10**7, seed: int = 0, chunk: int = 1 << 20) -> NormEstimate:
    """Plain Monte Carlo estimate of the same integral, an independent second route."""
    if copula.family == "independence":
        return NormEstimate(0.0, 0.0, "exact", 0, True)
    rng = np.random.Generator(np.random.Philox(seed))
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < count:
        take = min(chunk, count - done)
        u = rng.random((take, copula.n))
        u = np.clip(u, 1e-300, 1.0 - 1e-16)
        v = np.abs(1.0 - copula_density(copula, u))
        total += float(v.sum())
        total_sq += float(np.dot(v, v))
        done += take
    mean = total / count
    var = max(total_sq / count - mean * mean, 0.0)
    return NormEstimate(mean, math.sqrt(var / count), "mc", count, True)


def markov_bound(norm, eps: float) -> float:
    """Upper bound ``min(1, norm / eps)`` on the measure of ``{s : eps_s >= eps}``.

    ``norm`` is a copula L1 norm value, a :class:`NormEstimate`, or a
    :class:`CopulaSpec` (whose norm is then computed).
    """
    if not eps > 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    if isinstance(norm, CopulaSpec):
        norm = l1_copula_norm(norm)
    if isinstance(norm, NormEstimate):
        norm = norm.value
    return min(1.0, float(norm) / eps)


def superlevel_measure(eps_values, eps: float) -> float:
    """Grid measure of ``{s_j : eps_j >= eps}`` (each point carries weight 1/m)."""
    eps_values = np.asarray(eps_values, dtype=float)
    return float(np.count_nonzero(eps_values >= eps)) / eps_values.size


# -- chi-square ------------------------------------------------------------------------


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    dof: int
    p_value: float
    per_dof: float
    per_point: float
    fixed_threshold: float | None
    standard_threshold: float
    reject_fixed: bool | None
    reject_standard: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _chi_result(stat: float, dof: int, points: int) -> ChiSquareResult:
    fixed = FIXED_THRESHOLDS.get(dof)
    standard = float(stats.chi2.ppf(1.0 - SIGNIFICANCE, dof))
    return ChiSquareResult(
        statistic=float(stat),
        dof=dof,
        p_value=float(stats.chi2.sf(stat, dof)),
        per_dof=float(stat) / dof,
        per_point=float(stat) / points,
        fixed_threshold=fixed,
        standard_threshold=standard,
        reject_fixed=None if fixed is None else bool(stat > fixed),
        reject_standard=bool(stat > standard),
    )


def chi_square_grid(estimate) -> ChiSquareResult:
    """``sum_j (pdf(s_j) - 1)^2`` with ``m - 1`` degrees of freedom.

    Accepts a :class:`WrappedPdfEstimate` or a plain array of grid values.
    """
    values = np.asarray(estimate.values if isinstance(estimate, WrappedPdfEstimate) else estimate, dtype=float)
    if values.size < 2:
        raise ValueError("grid chi-square needs at least two grid points")
    return _chi_result(float(np.sum((values - 1.0) ** 2)), values.size - 1, values.size)


def chi_square_digits(observed, base: int = 10) -> ChiSquareResult:
    """Pearson statistic against Benford digit expectations, ``B - 2`` dof.

    ``observed`` holds either digit probabilities (summing to about 1) or
    integer digit counts; counts are compared with ``N * p_d``.
    """
    observed = np.asarray(observed, dtype=float)
    if observed.size != base - 1:
        raise ValueError(f"expected {base - 1} digit entries, got {observed.size}")
    if base < 3:
        raise ValueError("digit chi-square needs at least two digits (base >= 3)")
    expected = benford_digit_probs(base)
    total = observed.sum()
    if total <= 0:
        raise ValueError("empty digit distribution")
    is_counts = np.all(observed == np.round(observed)) and total > 1.5
    scale = total if is_counts else 1.0
    stat = np.sum((observed - scale * expected) ** 2 / (scale * expected))
    return _chi_result(float(stat), base - 2, base - 1)


def chi_square_digits_error(probs, errors, base: int = 10) -> float:
    """First-order bound on how far the digit statistic can move when each
    probability is only known to within ``errors``."""
    probs = np.asarray(probs, dtype=float)
    errors = np.abs(np.asarray(errors, dtype=float))
    expected = benford_digit_probs(base)
    return float(np.sum((2.0 * np.abs(probs - expected) * errors + errors**2) / expected))


# -- digits from the density grid --------------------------------------------------


def _fourier_bin_integrals(values: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Integrals of the trigonometric interpolant of a periodic grid over consecutive bins."""
    m = values.size
    coef = np.fft.fft(values) / m
    freqs = np.fft.fftfreq(m, d=1.0 / m)
    antider = np.zeros(edges.size)
    antider += coef[0].real * edges
    for j in range(1, m):
        k = freqs[j]
        if m % 2 == 0 and j == m // 2:
            # Nyquist term taken as a real cosine
            antider += coef[j].real * np.sin(np.pi * m * edges) / (np.pi * m)
            continue
        antider += (coef[j] * (np.exp(2j * np.pi * k * edges) - 1.0) / (2j * np.pi * k)).real
    return np.diff(antider)


def digit_probs_from_pdf(estimate: WrappedPdfEstimate, base: int | None = None) -> np.ndarray:
    """``P(digit = d) = integral of pdf over [log_B d, log_B(d+1))``, from the grid.

    The grid must be uniform on [0, 1) and the estimate must have been built
    with log-marginals in the same base.
    """
    base = estimate.base if base is None else base
    if base != estimate.base:
        raise ValueError(f"estimate is in base {estimate.base}, cannot read digits in base {base}")
    m = estimate.values.size
    if not np.allclose(estimate.s_grid, np.arange(m) / m):
        raise ValueError("digit probabilities need the uniform grid s_j = j/m")
    edges = np.log(np.arange(1, base + 1)) / math.log(base)
    return _fourier_bin_integrals(estimate.values, edges)


# -- report ------------------------------------------------------------------------------


@dataclass
class BenfordReport:
    eps_grid: list
    l1_distance: float
    l1_copula_norm: float
    l1_copula_norm_stderr: float
    digit_probs: list
    chi2_grid: ChiSquareResult
    chi2_digit: ChiSquareResult
    tol_total: float
    benford_marginal: bool
    l1_w_distance: float | None = None
    markov: list = field(default_factory=list)

    @property
    def theorem_slack(self) -> float | None:
        """``norm + tol_total - d_W``; nonnegative when the L1 bound holds."""
        if self.l1_w_distance is None:
            return None
        return self.l1_copula_norm + self.tol_total - self.l1_w_distance

    @property
    def benford_slack(self) -> float:
        return self.l1_copula_norm + self.tol_total - self.l1_distance

    def to_dict(self) -> dict:
        return {
            "eps_grid": [[float(s), float(e)] for s, e in self.eps_grid],
            "l1_distance": self.l1_distance,
            "l1_copula_norm": self.l1_copula_norm,
            "l1_copula_norm_stderr": self.l1_copula_norm_stderr,
            "l1_w_distance": self.l1_w_distance,
            "theorem_slack": self.theorem_slack,
            "benford_slack": self.benford_slack,
            "benford_marginal": self.benford_marginal,
            "digit_probs": [float(p) for p in self.digit_probs],
            "chi2_grid": self.chi2_grid.to_dict(),
            "chi2_digit": self.chi2_digit.to_dict(),
            "tol_total": self.tol_total,
            "markov": self.markov,
        }


MARKOV_LEVELS = (0.01, 0.05, 0.1)


def build_report(
    estimate: WrappedPdfEstimate,
    norm: NormEstimate,
    *,
    reference: WrappedPdfEstimate | None = None,
    benford_marginal: bool = False,
    base: int | None = None,
    digit_probs=None,
) -> BenfordReport:
    """Assemble all distances and statistics for one analysis.

    ``reference`` is the same analysis under the independence copula; when
    given, the L1 bound and Markov levels are evaluated on the gap between
    the two densities, which is what the copula norm controls.  Digit
    probabilities integrated directly over the digit bins can be passed in;
    otherwise they are read off the density grid.
    """
    eps = epsilon_grid(estimate)
    probs = digit_probs_from_pdf(estimate, base) if digit_probs is None else np.asarray(digit_probs, dtype=float)
    tol_total = estimate.tol_total + (reference.tol_total if reference is not None else 0.0)
    gap = epsilon_w_grid(estimate, reference) if reference is not None else eps
    markov = [
        {"eps": lvl, "measured": superlevel_measure(gap, lvl), "bound": markov_bound(norm.value, lvl)}
        for lvl in MARKOV_LEVELS
    ]
    return BenfordReport(
        eps_grid=list(zip(estimate.s_grid.tolist(), eps.tolist())),
        l1_distance=l1_benford_distance(estimate),
        l1_copula_norm=norm.value,
        l1_copula_norm_stderr=norm.stderr,
        digit_probs=probs.tolist(),
        chi2_grid=chi_square_grid(estimate),
        chi2_digit=chi_square_digits(probs, estimate.base),
        tol_total=tol_total,
        benford_marginal=benford_marginal,
        l1_w_distance=None if reference is None else l1_w_distance(estimate, reference),
        markov=markov,
    )
