"""Self-checks run by ``copula-benford validate``.

Each check records a measured quantity, the limit it is held to and the
slack between them, so a failing build shows how far off it is.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from .copulas import CopulaSpec, clayton_density_closed_form, copula_cdf, copula_density
from .marginals import Exponential, LogMarginal, Normal, Uniform01
from .metrics import (
    MARKOV_LEVELS,
    l1_benford_distance,
    l1_copula_norm,
    l1_w_distance,
    markov_bound,
    superlevel_measure,
    epsilon_w_grid,
)
from .presets import pairing
from .sampler import empirical_wrapped_pdf, sample_products
from .wrapped import bin_probs_direct, wrapped_pdf_grid

AXIOM_TOL = 1e-10
VOLUME_TOL = 1e-12
FD_REL_TOL = 1e-5
PROBE = np.linspace(0.0, 1.0, 17)

AXIOM_CASES = (
    ("clayton", 2, -0.5),
    ("clayton", 2, 2.0),
    ("clayton", 3, 1.0),
    ("amh", 2, -0.9),
    ("amh", 2, 0.5),
    ("amh", 3, 0.5),
    ("gumbel_barnett", 2, 0.5),
    ("gumbel_barnett", 2, 1.0),
    ("gumbel_barnett", 3, 0.1),
)


@dataclass
class Check:
    name: str
    passed: bool
    measured: float
    limit: float
    detail: str = ""

    @property
    def slack(self) -> float:
        return self.limit - self.measured

    def to_dict(self) -> dict:
        out = asdict(self)
        out["slack"] = self.slack
        return out


def printed_clayton_cdf(alpha: float, u) -> np.ndarray:
    """Clayton CDF with the outer ``-1/alpha`` power left out; not a copula."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore"):
        return np.sum(u ** (-alpha), axis=-1) - (u.shape[-1] - 1)


def _cdf_for(spec: CopulaSpec, corrupt_clayton: bool) -> Callable:
    if corrupt_clayton and spec.family == "clayton":
        return lambda u: printed_clayton_cdf(spec.alpha, u)
    return lambda u: copula_cdf(spec, u)


# -- copula axioms ---------------------------------------------------------------------


def margin_error(cdf: Callable, n: int) -> float:
    """Largest ``|C(1,..,u_k,..,1) - u_k|`` over the probe values and coordinates."""
    worst = 0.0
    for k in range(n):
        pts = np.ones((PROBE.size, n))
        pts[:, k] = PROBE
        worst = max(worst, float(np.max(np.abs(cdf(pts) - PROBE))))
    return worst


def groundedness_error(cdf: Callable, n: int) -> float:
    """Largest ``|C(u)|`` with one coordinate at 0 and the others on the probe grid."""
    others = np.array(np.meshgrid(*([PROBE[1:]] * (n - 1)), indexing="ij")).reshape(n - 1, -1).T
    worst = 0.0
    for k in range(n):
        pts = np.insert(others, k, 0.0, axis=1)
        with np.errstate(invalid="ignore"):
            vals = np.nan_to_num(cdf(pts), nan=np.inf)
        worst = max(worst, float(np.max(np.abs(vals))))
    return worst


def min_rectangle_volume(cdf: Callable, count: int = 1000, seed: int = 0) -> float:
    rng = np.random.Generator(np.random.Philox(seed))
    a = rng.random((count, 2))
    b = rng.random((count, 2))
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    vol = (
        cdf(hi)
        - cdf(np.stack([lo[:, 0], hi[:, 1]], axis=1))
        - cdf(np.stack([hi[:, 0], lo[:, 1]], axis=1))
        + cdf(lo)
    )
    return float(np.min(vol))


def density_cdf_mismatch(spec: CopulaSpec, step: float = 1e-4) -> float:
    """Max relative gap between the density and a central mixed difference of the CDF."""
    grid = np.linspace(0.1, 0.9, 9)
    pts = np.array(np.meshgrid(grid, grid, indexing="ij")).reshape(2, -1).T
    dx = np.array([step, 0.0])
    dy = np.array([0.0, step])
    fd = (
        copula_cdf(spec, pts + dx + dy)
        - copula_cdf(spec, pts + dx - dy)
        - copula_cdf(spec, pts - dx + dy)
        + copula_cdf(spec, pts - dx - dy)
    ) / (4 * step * step)
    dens = copula_density(spec, pts)
    return float(np.max(np.abs(fd - dens) / np.maximum(np.abs(dens), 1e-300)))


def axiom_checks(corrupt_clayton: bool = False) -> list[Check]:
    checks = []
    for family, n, alpha in AXIOM_CASES:
        spec = CopulaSpec(family, n, alpha)
        cdf = _cdf_for(spec, corrupt_clayton)
        tag = f"{family}(n={n},alpha={alpha:g})"
        err = margin_error(cdf, n)
        checks.append(Check(f"margins {tag}", err <= AXIOM_TOL, err, AXIOM_TOL))
        err = groundedness_error(cdf, n)
        checks.append(Check(f"grounded {tag}", err <= AXIOM_TOL, err, AXIOM_TOL))
        if n == 2:
            vol = min_rectangle_volume(cdf)
            checks.append(Check(f"2-increasing {tag}", vol >= -VOLUME_TOL, -vol, VOLUME_TOL))
            if not corrupt_clayton or family != "clayton":
                gap = density_cdf_mismatch(spec)
                checks.append(Check(f"density vs cdf {tag}", gap <= FD_REL_TOL, gap, FD_REL_TOL))
    probe = np.array([[0.2, 0.7], [0.5, 0.5], [0.9, 0.3]])
    for family, alpha in (("clayton", 1e-6), ("amh", 0.0), ("gumbel_barnett", 1e-6)):
        gap = float(np.max(np.abs(copula_density(CopulaSpec(family, 2, alpha), probe) - 1.0)))
        checks.append(Check(f"independence limit {family}", gap <= 1e-3, gap, 1e-3))
    pts = np.random.Generator(np.random.Philox(1)).uniform(0.01, 0.99, size=(200, 3))
    for alpha in (0.5, 2.0, 5.0):
        spec = CopulaSpec("clayton", 3, alpha)
        rel = float(np.max(np.abs(copula_density(spec, pts) / clayton_density_closed_form(alpha, pts) - 1.0)))
        checks.append(Check(f"clayton closed form alpha={alpha:g}", rel <= 1e-10, rel, 1e-10))
    return checks


# -- engine checks ----------------------------------------------------------------------


def analysis_checks(
    cases: Sequence[tuple[str, CopulaSpec, Sequence[LogMarginal]]], grid: int = 12
) -> list[Check]:
    """Normalization, the L1 bound and the Markov levels for each case."""
    checks = []
    for label, spec, marginals in cases:
        est = wrapped_pdf_grid(spec, marginals, m=grid)
        ref = wrapped_pdf_grid(CopulaSpec("independence", spec.n), marginals, m=grid)
        total, ok = est.check_normalization()
        checks.append(Check(f"normalization {label}", ok, abs(total - 1.0), est.tol_total))
        norm = l1_copula_norm(spec)
        tol_total = est.tol_total + ref.tol_total
        dist = l1_w_distance(est, ref)
        bound = norm.value + tol_total
        checks.append(Check(f"l1 bound {label}", dist <= bound, dist, bound))
        if any(isinstance(m, Uniform01) for m in marginals):
            dist = l1_benford_distance(est)
            checks.append(Check(f"l1 benford bound {label}", dist <= bound, dist, bound))
        eps_w = epsilon_w_grid(est, ref)
        for level in MARKOV_LEVELS:
            measured = superlevel_measure(eps_w, level)
            limit = markov_bound(norm.value, level)
            checks.append(Check(f"markov eps={level:g} {label}", measured <= limit, measured, limit))
    return checks


def oracle_check(
    spec: CopulaSpec, marginals: Sequence[LogMarginal], label: str, count: int = 200_000, bins: int = 50, seed: int = 0
) -> Check:
    """Engine bin probabilities against a sampled histogram: bins within 3 standard errors."""
    edges = np.linspace(0.0, 1.0, bins + 1)
    probs, _ = bin_probs_direct(spec, marginals, edges)
    samples, _ = sample_products(spec, marginals, count, seed)
    hist = empirical_wrapped_pdf(samples, bins)
    observed = hist.heights / bins
    stderr = np.sqrt(probs * (1.0 - probs) / hist.count)
    inside = int(np.count_nonzero(np.abs(observed - probs) <= 3.0 * stderr))
    need = int(np.ceil(0.94 * bins))
    return Check(f"oracle {label}", inside >= need, float(bins - inside), float(bins - need), f"{inside}/{bins} bins")


def default_cases() -> list[tuple[str, CopulaSpec, Sequence[LogMarginal]]]:
    clayton = CopulaSpec("clayton", 2, 2.0)
    return [
        ("clayton normal x normal", clayton, (Normal(), Normal())),
        ("clayton exp x exp", clayton, (Exponential(), Exponential())),
        ("amh pairing A", CopulaSpec("amh", 2, 0.5), pairing("A")),
        ("gumbel_barnett pairing C", CopulaSpec("gumbel_barnett", 2, 0.5), pairing("C")),
        ("clayton uniform x normal", clayton, (Uniform01(), Normal())),
    ]


def run_suite(corrupt_clayton: bool = False, seed: int = 0, oracle_samples: int = 200_000) -> list[Check]:
    checks = axiom_checks(corrupt_clayton)
    checks += analysis_checks(default_cases())
    checks.append(oracle_check(CopulaSpec("clayton", 2, 2.0), (Normal(), Normal()), "clayton normal x normal", oracle_samples, seed=seed))
    return checks
