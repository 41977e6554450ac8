"""Log-domain marginals: the law of ``U = log_B X`` for each factor ``X``.

Every marginal exposes a CDF, a log-CDF (accurate deep in the lower tail,
which the copula density needs), a PDF, an inverse CDF and a tail window
used to truncate the integration domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np
from scipy import special
from scipy.interpolate import PchipInterpolator


class LogMarginal:
    """Base class; subclasses are frozen dataclasses carrying the parameters."""

    kind: str = "abstract"
    base: int

    def cdf(self, u):
        raise NotImplementedError

    def logcdf(self, u):
        with np.errstate(divide="ignore"):
            return np.log(self.cdf(u))

    def pdf(self, u):
        raise NotImplementedError

    def ppf(self, q):
        raise NotImplementedError

    def sf(self, u):
        """Survival function ``1 - F(u)``, accurate in the upper tail."""
        return 1.0 - self.cdf(u)

    def isf(self, q):
        """Inverse survival function: ``u`` with ``1 - F(u) = q``."""
        return self.ppf(1.0 - np.asarray(q, dtype=float))

    def support(self) -> tuple[float, float]:
        return (-math.inf, math.inf)

    def breakpoints(self) -> tuple[float, ...]:
        """Points where the PDF may jump; quadrature splits intervals there."""
        return tuple(x for x in self.support() if math.isfinite(x))

    def pdf_max(self) -> float:
        raise NotImplementedError

    def _tail_quantiles(self, eps: float) -> tuple[float, float]:
        raise NotImplementedError

    def to_config(self) -> dict[str, Any]:
        raise NotImplementedError

    def _check_base(self) -> None:
        if int(self.base) != self.base or self.base < 2:
            raise ValueError(f"base must be an integer >= 2, got {self.base!r}")


@dataclass(frozen=True)
class Normal(LogMarginal):
    mu: float = 0.0
    sigma: float = 1.0
    base: int = 10
    kind: str = field(default="normal", init=False, repr=False)

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"normal sigma must be > 0, got {self.sigma}")
        self._check_base()

    def cdf(self, u):
        return special.ndtr((np.asarray(u, dtype=float) - self.mu) / self.sigma)

    def logcdf(self, u):
        return special.log_ndtr((np.asarray(u, dtype=float) - self.mu) / self.sigma)

    def pdf(self, u):
        z = (np.asarray(u, dtype=float) - self.mu) / self.sigma
        return np.exp(-0.5 * z * z) / (self.sigma * math.sqrt(2.0 * math.pi))

    def ppf(self, q):
        return self.mu + self.sigma * special.ndtri(np.asarray(q, dtype=float))

    def sf(self, u):
        return special.ndtr(-(np.asarray(u, dtype=float) - self.mu) / self.sigma)

    def isf(self, q):
        return self.mu - self.sigma * special.ndtri(np.asarray(q, dtype=float))

    def pdf_max(self) -> float:
        return 1.0 / (self.sigma * math.sqrt(2.0 * math.pi))

    def _tail_quantiles(self, eps):
        # round outward to whole standard deviations
        z = float(special.ndtri(eps))
        lo = self.mu + self.sigma * math.floor(z)
        hi = self.mu + self.sigma * math.ceil(-z)
        return lo, hi

    def rebase(self, new_base: int) -> "Normal":
        scale = math.log(self.base) / math.log(new_base)
        return Normal(self.mu * scale, self.sigma * scale, new_base)

    def to_config(self):
        return {"kind": "normal", "mu": self.mu, "sigma": self.sigma}


@dataclass(frozen=True)
class Exponential(LogMarginal):
    lam: float = 1.0
    base: int = 10
    kind: str = field(default="exponential", init=False, repr=False)

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"exponential lambda must be > 0, got {self.lam}")
        self._check_base()

    def support(self):
        return (0.0, math.inf)

    def cdf(self, u):
        u = np.asarray(u, dtype=float)
        return np.where(u > 0, -np.expm1(-self.lam * np.maximum(u, 0.0)), 0.0)

    def logcdf(self, u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(u > 0, np.log(-np.expm1(-self.lam * np.maximum(u, 0.0))), -np.inf)

    def pdf(self, u):
        u = np.asarray(u, dtype=float)
        return np.where(u >= 0, self.lam * np.exp(-self.lam * np.maximum(u, 0.0)), 0.0)

    def ppf(self, q):
        return -np.log1p(-np.asarray(q, dtype=float)) / self.lam

    def sf(self, u):
        return np.exp(-self.lam * np.maximum(np.asarray(u, dtype=float), 0.0))

    def isf(self, q):
        return np.maximum(-np.log(np.asarray(q, dtype=float)) / self.lam, 0.0)

    def pdf_max(self):
        return self.lam

    def _tail_quantiles(self, eps):
        return 0.0, math.ceil(-math.log(eps)) / self.lam

    def rebase(self, new_base: int) -> "Exponential":
        scale = math.log(self.base) / math.log(new_base)
        return Exponential(self.lam / scale, new_base)

    def to_config(self):
        return {"kind": "exponential", "lambda": self.lam}


@dataclass(frozen=True)
class ParetoLog(LogMarginal):
    """``U = log_B X`` with ``X ~ Pareto(xm, shape)``: a shifted exponential in ``u``."""

    xm: float = 1.0
    shape: float = 2.0
    base: int = 10
    kind: str = field(default="pareto_log", init=False, repr=False)

    def __post_init__(self):
        if not (self.xm > 0 and self.shape > 0):
            raise ValueError(f"pareto_log needs xm > 0 and shape > 0, got {self.xm}, {self.shape}")
        self._check_base()

    @property
    def edge(self) -> float:
        return math.log(self.xm) / math.log(self.base)

    @property
    def rate(self) -> float:
        return self.shape * math.log(self.base)

    def support(self):
        return (self.edge, math.inf)

    def cdf(self, u):
        x = np.asarray(u, dtype=float) - self.edge
        return np.where(x > 0, -np.expm1(-self.rate * np.maximum(x, 0.0)), 0.0)

    def logcdf(self, u):
        x = np.asarray(u, dtype=float) - self.edge
        with np.errstate(divide="ignore"):
            return np.where(x > 0, np.log(-np.expm1(-self.rate * np.maximum(x, 0.0))), -np.inf)

    def pdf(self, u):
        x = np.asarray(u, dtype=float) - self.edge
        return np.where(x >= 0, self.rate * np.exp(-self.rate * np.maximum(x, 0.0)), 0.0)

    def ppf(self, q):
        return self.edge - np.log1p(-np.asarray(q, dtype=float)) / self.rate

    def sf(self, u):
        return np.exp(-self.rate * np.maximum(np.asarray(u, dtype=float) - self.edge, 0.0))

    def isf(self, q):
        return self.edge + np.maximum(-np.log(np.asarray(q, dtype=float)) / self.rate, 0.0)

    def pdf_max(self):
        return self.rate

    def _tail_quantiles(self, eps):
        return self.edge, self.edge + math.ceil(-math.log(eps)) / self.rate

    def rebase(self, new_base: int) -> "ParetoLog":
        return ParetoLog(self.xm, self.shape, new_base)

    def to_config(self):
        return {"kind": "pareto_log", "xm": self.xm, "shape": self.shape}


@dataclass(frozen=True)
class Uniform01(LogMarginal):
    """``U`` uniform on [0, 1): the exactly Benford log-marginal."""

    base: int = 10
    kind: str = field(default="uniform01", init=False, repr=False)

    def __post_init__(self):
        self._check_base()

    def support(self):
        return (0.0, 1.0)

    def cdf(self, u):
        return np.clip(np.asarray(u, dtype=float), 0.0, 1.0)

    def pdf(self, u):
        u = np.asarray(u, dtype=float)
        return np.where((u >= 0) & (u < 1), 1.0, 0.0)

    def ppf(self, q):
        return np.asarray(q, dtype=float) + 0.0

    def pdf_max(self):
        return 1.0

    def _tail_quantiles(self, eps):
        return 0.0, 1.0

    def to_config(self):
        return {"kind": "uniform01"}


@dataclass(frozen=True, eq=False)
class Custom(LogMarginal):
    """Tabulated CDF, interpolated by a monotone piecewise cubic."""

    grid: tuple[float, ...] = ()
    cdf_values: tuple[float, ...] = ()
    base: int = 10
    kind: str = field(default="custom", init=False, repr=False)

    def __post_init__(self):
        self._check_base()
        x = np.asarray(self.grid, dtype=float)
        y = np.asarray(self.cdf_values, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or x.size < 2:
            raise ValueError("custom marginal needs matching 1-d grid and cdf arrays of length >= 2")
        if np.any(np.diff(x) <= 0):
            raise ValueError("custom grid must be strictly increasing")
        if np.any(np.diff(y) < 0):
            raise ValueError("custom cdf values must be nondecreasing")
        if abs(y[0]) > 1e-12 or abs(y[-1] - 1.0) > 1e-12:
            raise ValueError("custom cdf must run from 0 at the first grid point to 1 at the last")
        y = y.copy()
        y[0], y[-1] = 0.0, 1.0
        interp = PchipInterpolator(x, y, extrapolate=False)
        object.__setattr__(self, "_x", x)
        object.__setattr__(self, "_y", y)
        object.__setattr__(self, "_interp", interp)
        object.__setattr__(self, "_deriv", interp.derivative())

    def support(self):
        return (float(self._x[0]), float(self._x[-1]))

    def breakpoints(self):
        return tuple(float(v) for v in self._x)

    def cdf(self, u):
        u = np.asarray(u, dtype=float)
        inside = np.clip(np.nan_to_num(self._interp(u), nan=0.0), 0.0, 1.0)
        return np.where(u <= self._x[0], 0.0, np.where(u >= self._x[-1], 1.0, inside))

    def pdf(self, u):
        u = np.asarray(u, dtype=float)
        d = np.nan_to_num(self._deriv(u), nan=0.0)
        return np.where((u >= self._x[0]) & (u < self._x[-1]), np.maximum(d, 0.0), 0.0)

    def ppf(self, q, tol: float = 1e-10, max_iter: int = 200):
        q = np.asarray(q, dtype=float)
        lo = np.full(q.shape, self._x[0])
        hi = np.full(q.shape, self._x[-1])
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            below = self.cdf(mid) < q
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= tol * (1.0 + np.abs(hi))):
                break
        return 0.5 * (lo + hi)

    def pdf_max(self):
        fine = np.linspace(self._x[0], self._x[-1], 64 * self._x.size)
        return float(np.max(self.pdf(fine)))

    def _tail_quantiles(self, eps):
        x, y = self._x, self._y
        lo = x[np.nonzero(y <= eps)[0][-1]]
        hi = x[np.nonzero(1.0 - y <= eps)[0][0]]
        return float(lo), float(hi)

    def to_config(self):
        return {"kind": "custom", "grid": list(self.grid), "cdf": list(self.cdf_values)}


def log_cdf(m: LogMarginal, u):
    """CDF ``F(u)`` of the log-marginal (not the logarithm of the CDF)."""
    return m.cdf(u)


def log_pdf(m: LogMarginal, u):
    """PDF ``f(u)`` of the log-marginal."""
    return m.pdf(u)


def tail_window(m: LogMarginal, eps: float) -> tuple[float, float]:
    """Interval ``(lo, hi)`` with ``F(lo) <= eps`` and ``1 - F(hi) <= eps``.

    Edges of a bounded support are returned as is; unbounded sides are rounded
    outward to the marginal's natural scale, so the window is never tighter
    than the exact quantile.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    lo, hi = m._tail_quantiles(eps)
    s_lo, s_hi = m.support()
    return max(lo, s_lo), min(hi, s_hi)


def tail_mass(m: LogMarginal, lo: float, hi: float) -> float:
    """Probability that ``U`` falls outside ``[lo, hi]``."""
    lower = float(m.cdf(lo)) if math.isfinite(lo) else 0.0
    upper = float(m.sf(hi)) if math.isfinite(hi) else 0.0
    return max(lower, 0.0) + max(upper, 0.0)


_PARSERS = {
    "normal": lambda c, b: Normal(float(c.get("mu", 0.0)), float(c.get("sigma", 1.0)), b),
    "exponential": lambda c, b: Exponential(float(c.get("lambda", 1.0)), b),
    "pareto_log": lambda c, b: ParetoLog(float(c.get("xm", 1.0)), float(c.get("shape", 2.0)), int(c.get("base", b))),
    "uniform01": lambda c, b: Uniform01(b),
    "custom": lambda c, b: Custom(tuple(c["grid"]), tuple(c["cdf"]), b),
}


def from_config(cfg: Mapping[str, Any], base: int = 10) -> LogMarginal:
    """Build a marginal from its JSON grammar, e.g. ``{"kind": "normal", "mu": 0, "sigma": 1}``."""
    try:
        kind = cfg["kind"]
    except (KeyError, TypeError):
        raise ValueError("marginal spec needs a 'kind' field") from None
    if kind not in _PARSERS:
        raise ValueError(f"unknown marginal kind {kind!r}; expected one of {sorted(_PARSERS)}")
    try:
        return _PARSERS[kind](cfg, int(base))
    except KeyError as exc:
        raise ValueError(f"marginal kind {kind!r} is missing field {exc.args[0]!r}") from None
