"""Density of ``(U_1 + ... + U_n) mod 1`` for copula-coupled log-marginals.

For a point ``s`` in [0, 1) the density is

    sum_k  integral  c(F_1(u_1), ..., F_n(u_n)) f_1(u_1) ... f_n(u_n)  du_1 ... du_{n-1}

with ``u_n = s + k - (u_1 + ... + u_{n-1})``.  The sum over the wrap index
``k`` and the integration box are truncated by a :class:`TruncationWindow`
that carries a certified bound on the neglected mass.  The remaining
``(n-1)``-dimensional integral is done by batched adaptive Gauss-Kronrod
(one or two nested levels) or by randomized Sobol QMC in probability
coordinates for three or more integration dimensions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import qmc

from .copulas import CopulaBoundaryError, CopulaSpec, copula_density, mixed_partial
from .marginals import LogMarginal, tail_mass, tail_window
from .quadrature import gauss_kronrod_batch, sobol_rqmc

PROBE_STEPS = 18
SUP_INFLATION = 10.0
QMC_ERROR_MULTIPLIER = 3.0
GRID_SAFETY = 2.0
# log of the smallest subnormal: stands in for log F = -inf at an isolated
# node sitting exactly on a support edge, where the integrand takes its limit
_LOG_FLOOR = math.log(math.ulp(0.0))


class CertificateError(RuntimeError):
    """No truncation window meets the requested error bound."""


@dataclass(frozen=True)
class TruncationWindow:
    a: tuple[float, ...]
    b: tuple[float, ...]
    c1: int
    c2: int
    err_bound: float
    last: tuple[float, float]
    density_sup: float
    neglected_mass: float

    def __post_init__(self):
        if len(self.a) != len(self.b):
            raise ValueError("window bounds a and b must have the same length")
        if any(not lo < hi for lo, hi in zip(self.a, self.b)):
            raise ValueError(f"window needs a_i < b_i, got a={self.a}, b={self.b}")
        if not self.c1 < self.c2:
            raise ValueError(f"wrap range needs c1 < c2, got [{self.c1}, {self.c2}]")
        if not self.last[0] < self.last[1]:
            raise ValueError(f"last-coordinate window is empty: {self.last}")
        if not self.err_bound >= 0:
            raise ValueError("err_bound must be nonnegative")

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.c1, self.c2 + 1)

    def to_dict(self) -> dict:
        return {
            "a": list(self.a),
            "b": list(self.b),
            "c1": self.c1,
            "c2": self.c2,
            "last": list(self.last),
            "err_bound": self.err_bound,
            "density_sup": self.density_sup,
        }


@dataclass
class WrappedPdfEstimate:
    s_grid: np.ndarray
    values: np.ndarray
    quad_err: np.ndarray
    window: TruncationWindow
    base: int = 10
    converged: np.ndarray = field(default=None)
    mode: str = "adaptive"
    raw_min: float = 0.0
    mid_values: np.ndarray | None = None

    def __post_init__(self):
        if self.converged is None:
            self.converged = np.ones(self.values.shape, dtype=bool)

    @property
    def grid_allowance(self) -> float:
        return grid_discretization_allowance(self.values, self.mid_values)

    @property
    def tol_total(self) -> float:
        return float(self.window.err_bound + np.max(self.quad_err) + self.grid_allowance)

    def integral(self) -> float:
        """Trapezoid integral over the periodic grid (the mean of the values)."""
        return float(np.mean(self.values))

    def check_normalization(self) -> tuple[float, bool]:
        total = self.integral()
        return total, abs(total - 1.0) <= self.tol_total


def grid_discretization_allowance(values, mid_values=None) -> float:
    """Error allowance for the periodic trapezoid rule on ``m`` points.

    Compares the mean over all ``m`` points with the mean over every ``p``-th
    point, ``p`` the smallest prime factor of ``m``.  When the density is also
    known at the cell midpoints, the trapezoid/midpoint gap is used too; the
    two rules err in opposite directions near kinks and jumps.  The larger gap
    is doubled as a safety factor.
    """
    values = np.asarray(values, dtype=float)
    m = values.size
    p = next(d for d in range(2, m + 1) if m % d == 0)
    gap = abs(values.mean() - values[::p].mean())
    if mid_values is not None:
        gap = max(gap, abs(values.mean() - float(np.mean(mid_values))))
    return float(GRID_SAFETY * gap)


# -- integrand ---------------------------------------------------------------


def _check_dims(copula: CopulaSpec, marginals: Sequence[LogMarginal]):
    if len(marginals) != copula.n:
        raise ValueError(f"copula has dimension {copula.n} but {len(marginals)} marginals were given")


def _joint_density(copula: CopulaSpec, marginals: Sequence[LogMarginal], points: np.ndarray) -> np.ndarray:
    """``c(F(u)) * prod f_i(u_i)`` for rows of ``points``; zero where a marginal density vanishes."""
    points = np.atleast_2d(points)
    dens = np.stack([m.pdf(points[:, i]) for i, m in enumerate(marginals)], axis=1)
    weight = np.prod(dens, axis=1)
    out = np.zeros(points.shape[0])
    live = weight > 0
    if not np.any(live):
        return out
    ell = np.stack([m.logcdf(points[live, i]) for i, m in enumerate(marginals)], axis=1)
    if np.any(np.isneginf(ell)):
        raise CopulaBoundaryError("marginal CDF is 0 where its density is positive")
    out[live] = mixed_partial(copula, ell, copula.n) * weight[live]
    return out


def integrand(copula: CopulaSpec, marginals: Sequence[LogMarginal], uvec, s: float, k: int) -> float:
    """Integrand of the wrapped density at ``u_1..u_{n-1} = uvec`` for wrap index ``k``."""
    _check_dims(copula, marginals)
    uvec = np.asarray(uvec, dtype=float).reshape(-1)
    if uvec.size != copula.n - 1:
        raise ValueError(f"expected {copula.n - 1} free coordinates, got {uvec.size}")
    last = s + k - uvec.sum()
    return float(_joint_density(copula, marginals, np.append(uvec, last)[None, :])[0])


# -- truncation window ---------------------------------------------------------


def probe_points(n: int) -> np.ndarray:
    """Interior probe set: tensor grid ``j/18`` for n <= 3, scrambled Sobol otherwise."""
    if n <= 3:
        axis = np.arange(1, PROBE_STEPS) / PROBE_STEPS
        mesh = np.meshgrid(*([axis] * n), indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=1)
    lo, hi = 1.0 / PROBE_STEPS, 1.0 - 1.0 / PROBE_STEPS
    pts = qmc.Sobol(n, scramble=True, seed=np.random.Generator(np.random.Philox(PROBE_STEPS))).random(1 << 12)
    return lo + (hi - lo) * pts


def density_sup(copula: CopulaSpec) -> float:
    """Sampled supremum of the copula density on the probe set, inflated x10."""
    vals = copula_density(copula, probe_points(copula.n))
    top = float(np.max(vals))
    if not math.isfinite(top):
        raise CertificateError(f"no certificate: copula density is unbounded on the probe grid ({copula})")
    return SUP_INFLATION * top


def sum_tail_bound(marginals: Sequence[LogMarginal], lower: float, upper: float) -> float:
    """Union bound on ``P(sum U_i < lower) + P(sum U_i > upper)`` without using dependence.

    The thresholds are split across coordinates at a common tail level
    ``q``: if ``sum_i Q_i(q) >= lower`` for lower quantiles ``Q_i`` then
    ``P(sum U < lower) <= sum_i F_i(Q_i(q))``; the upper side is symmetric.
    """

    def side(quantile: Callable, mass: Callable, edge_sum: float, target: float, below: bool) -> float:
        if below and target <= edge_sum:
            return 0.0
        if not below and target >= edge_sum:
            return 0.0

        def total(logq):
            return sum(float(quantile(m, math.exp(logq))) for m in marginals)

        lo, hi = -700.0, math.log(0.5)
        covers = (lambda v: v >= target) if below else (lambda v: v <= target)
        if not covers(total(hi)):
            return 1.0
        if covers(total(lo)):
            hi = lo
        else:
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if covers(total(mid)):
                    hi = mid
                else:
                    lo = mid
        q = math.exp(hi)
        return min(1.0, sum(float(mass(m, quantile(m, q))) for m in marginals))

    low_edge = sum(m.support()[0] for m in marginals)
    high_edge = sum(m.support()[1] for m in marginals)
    below = side(lambda m, q: m.ppf(q), lambda m, x: m.cdf(x), low_edge, lower, True)
    above = side(lambda m, q: m.isf(q), lambda m, x: m.sf(x), high_edge, upper, False)
    return below + above


def _reachable(m: LogMarginal, lo: float, hi: float) -> tuple[float, float]:
    s_lo, s_hi = m.support()
    return max(lo, s_lo), min(hi, s_hi)


def make_window(
    copula: CopulaSpec,
    marginals: Sequence[LogMarginal],
    tol: float | None = 1e-12,
    *,
    a: Sequence[float] | None = None,
    b: Sequence[float] | None = None,
    k_range: tuple[int, int] | None = None,
    last: tuple[float, float] | None = None,
) -> TruncationWindow:
    """Truncation window whose neglected contribution is bounded by ``err_bound``.

    Without explicit bounds the per-marginal windows come from
    :func:`tail_window` at a common level chosen so that ``err_bound <= tol``.
    Explicit ``a``/``b`` (free coordinates), ``k_range`` and ``last`` (window
    of ``u_n``) override the automatic choice; the bound is then computed for
    the given window and checked against ``tol`` if one is supplied.
    """
    _check_dims(copula, marginals)
    n = copula.n
    if tol is not None and not 0.0 < tol < 1.0:
        raise ValueError(f"tol must lie in (0, 1), got {tol}")
    if tol is None and a is None:
        raise ValueError("need either a tolerance or explicit window bounds")
    sup = density_sup(copula)

    if a is None:
        eps = tol / (4.0 * n * sup)
        windows = [tail_window(m, eps) for m in marginals]
        a = [w[0] for w in windows[:-1]]
        b = [w[1] for w in windows[:-1]]
        if last is None:
            last = windows[-1]
        if k_range is None:
            k_range = (math.floor(sum(w[0] for w in windows)), math.ceil(sum(w[1] for w in windows)))
    else:
        if b is None or len(a) != n - 1 or len(b) != n - 1:
            raise ValueError(f"explicit windows need {n - 1} lower and upper bounds")
        a = [float(x) for x in a]
        b = [float(x) for x in b]
        if k_range is None:
            level = max(
                max(float(m.cdf(lo)), float(m.sf(hi))) for m, lo, hi in zip(marginals[:-1], a, b)
            )
            level = min(max(level, 1e-300), 0.25)
            lo_n, hi_n = last if last is not None else tail_window(marginals[-1], level)
            k_range = (math.floor(sum(a) + lo_n), math.ceil(sum(b) + hi_n))
        if last is None:
            last = _reachable(marginals[-1], k_range[0] - sum(b), k_range[1] + 1 - sum(a))
    c1, c2 = int(k_range[0]), int(k_range[1])
    a = [max(lo, m.support()[0]) for lo, m in zip(a, marginals)]
    b = [min(hi, m.support()[1]) for hi, m in zip(b, marginals)]
    last = _reachable(marginals[-1], *last)

    mass = sum(tail_mass(m, lo, hi) for m, lo, hi in zip(marginals[:-1], a, b))
    mass += tail_mass(marginals[-1], *last)
    mass += sum_tail_bound(marginals, c1, c2 + 1)
    bound = sup * mass
    if tol is not None and bound > tol:
        raise CertificateError(f"no certificate: truncation bound {bound:.3g} exceeds tol {tol:.3g}")
    return TruncationWindow(tuple(a), tuple(b), c1, c2, bound, tuple(last), sup, mass)


# -- line kernels --------------------------------------------------------------
#
# A kernel receives log-CDFs of the free coordinates (N, n-1), their sum and a
# per-row target, and returns the sum over wrap indices of the contribution
# of the last coordinate.  Weights from the free coordinates are applied by
# the driver.


def _last_edges(window: TruncationWindow, marginal: LogMarginal) -> np.ndarray:
    inner = [x for x in marginal.breakpoints() if window.last[0] < x < window.last[1]]
    return np.array(sorted(set(window.last) | set(inner)))


class _PdfKernel:
    def __init__(self, copula, marginals, window, s_values):
        self.copula = copula
        self.last_m = marginals[-1]
        self.window = window
        self.targets = np.asarray(s_values, dtype=float)
        self.shifts = [np.array([s]) for s in self.targets]

    def __call__(self, ell, sumu, target):
        lo, hi = self.window.last
        ks = self.window.ks
        y = self.targets[target][:, None] + ks[None, :] - sumu[:, None]
        rows, cols = np.nonzero((y >= lo) & (y <= hi))
        out = np.zeros(ell.shape[0])
        if rows.size == 0:
            return out
        yy = y[rows, cols]
        fy = self.last_m.pdf(yy)
        live = fy > 0
        rows, yy, fy = rows[live], yy[live], fy[live]
        if rows.size == 0:
            return out
        ly = np.maximum(self.last_m.logcdf(yy), _LOG_FLOOR)
        pts = np.concatenate([ell[rows], ly[:, None]], axis=1)
        vals = mixed_partial(self.copula, pts, self.copula.n) * fy
        return np.bincount(rows, weights=vals, minlength=ell.shape[0])


class _BinKernel:
    """Probability that the last coordinate puts the wrapped sum in ``[x1, x2)``."""

    def __init__(self, copula, marginals, window, bins):
        self.copula = copula
        self.last_m = marginals[-1]
        self.window = window
        self.targets = np.asarray(bins, dtype=float)
        self.shifts = [np.array(bin_) for bin_ in self.targets]

    def _partial(self, ell, y):
        lo, hi = self.window.last
        y = np.clip(y, lo, hi)
        with np.errstate(divide="ignore"):
            ly = self.last_m.logcdf(y)
        ly = np.where(self.last_m.pdf(y) > 0, np.maximum(ly, _LOG_FLOOR), ly)
        pts = np.concatenate([ell, ly[:, None]], axis=1)
        return mixed_partial(self.copula, pts, self.copula.n - 1)

    def __call__(self, ell, sumu, target):
        lo, hi = self.window.last
        ks = self.window.ks
        x1 = self.targets[target, 0]
        x2 = self.targets[target, 1]
        y1 = x1[:, None] + ks[None, :] - sumu[:, None]
        y2 = x2[:, None] + ks[None, :] - sumu[:, None]
        rows, cols = np.nonzero((y2 > lo) & (y1 < hi))
        out = np.zeros(ell.shape[0])
        if rows.size == 0:
            return out
        e = ell[rows]
        vals = self._partial(e, y2[rows, cols]) - self._partial(e, y1[rows, cols])
        return np.bincount(rows, weights=vals, minlength=ell.shape[0])


# -- drivers -------------------------------------------------------------------


def _free_terms(marginals, cols):
    """Log-CDFs and product of densities for free coordinates given as columns."""
    dens = np.prod(np.stack([m.pdf(c) for m, c in zip(marginals, cols)], axis=1), axis=1)
    live = dens > 0
    with np.errstate(divide="ignore"):
        ell = np.stack([m.logcdf(c) for m, c in zip(marginals, cols)], axis=1)
    return np.maximum(ell, _LOG_FLOOR), dens, live


def _kink_points(shifts, ks, edges, lo, hi):
    pts = (shifts[:, None, None] + ks[None, :, None] - edges[None, None, :]).ravel()
    return pts[(pts > lo) & (pts < hi)]


def _seed_breaks(lo, hi, marginal, extra):
    inner = [x for x in marginal.breakpoints() if lo < x < hi]
    return np.unique(np.concatenate([[lo, hi], inner, extra]))


# Offsets of a geometric mesh toward support-edge kinks.  Copulas with tail
# dependence concentrate mass in a ridge along which F_i(u_i) are all equal;
# where one marginal starts at a finite edge that ridge can be narrower than
# any Gauss-Kronrod node spacing, so the initial mesh is refined toward it.
_GRADING = np.concatenate([-(10.0 ** -np.arange(1, 15)), 10.0 ** -np.arange(1, 15)])


def _support_edges(marginal: LogMarginal) -> np.ndarray:
    return np.array([x for x in marginal.support() if math.isfinite(x)])


def _tail_kinks(marginal: LogMarginal, points, level: float = 1e-2) -> np.ndarray:
    """Kinks where the free coordinate is itself in a tail; only there can the ridge be thin."""
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        return points
    return points[(marginal.cdf(points) < level) | (marginal.sf(points) < level)]


def _graded(points, lo, hi):
    pts = np.concatenate([np.asarray(points, dtype=float), [lo, hi]])
    near = (pts[:, None] + _GRADING[None, :]).ravel()
    return near[(near > lo) & (near < hi)]


def _support_boundary_1d(copula, m1, mn, a1, b1, shift, ks, scan=4001):
    """Crossings of the line ``u_1 + u_n = shift + k`` with the edge of a bounded copula support.

    Only clayton with negative alpha has such an edge, ``sum t_i^(-alpha) = n - 1``;
    the density is singular along it, so quadrature is refined toward it.
    """
    if copula.family != "clayton" or copula.alpha > 0:
        return np.empty(0)
    a = copula.alpha
    x = np.linspace(a1, b1, scan)

    def g(u1, k):
        with np.errstate(divide="ignore"):
            return np.exp(-a * m1.logcdf(u1)) + np.exp(-a * mn.logcdf(shift + k - u1)) - 1.0

    vals = g(x[None, :], ks[:, None])
    kk, jj = np.nonzero(np.sign(vals[:, :-1]) * np.sign(vals[:, 1:]) < 0)
    if kk.size == 0:
        return np.empty(0)
    lo, hi = x[jj], x[jj + 1]
    k_sel = ks[kk]
    g_lo = g(lo, k_sel)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        g_mid = g(mid, k_sel)
        same = np.sign(g_mid) == np.sign(g_lo)
        lo = np.where(same, mid, lo)
        g_lo = np.where(same, g_mid, g_lo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


def _adaptive_1d(copula, marginals, window, kernel, quad_tol, limit):
    m1 = marginals[0]
    a1, b1 = window.a[0], window.b[0]
    edges_n = _last_edges(window, marginals[-1])
    ks = window.ks.astype(float)
    grade = copula.family != "independence"
    sup_n = _support_edges(marginals[-1])
    sup_1 = [x for x in _support_edges(m1) if a1 <= x <= b1]
    breaks = []
    for sh in kernel.shifts:
        extra = [_kink_points(sh, ks, edges_n, a1, b1)]
        if grade:
            curve = [_support_boundary_1d(copula, m1, marginals[-1], a1, b1, x, ks) for x in sh]
            edge_kinks = np.concatenate([_tail_kinks(m1, _kink_points(sh, ks, sup_n, a1, b1)), sup_1, *curve])
            extra.append(_graded(edge_kinks, a1, b1))
        breaks.append(_seed_breaks(a1, b1, m1, np.concatenate(extra)))

    def func(x, owner):
        shape = x.shape
        u = x.ravel()
        tgt = np.repeat(owner, shape[1])
        ell, dens, live = _free_terms(marginals[:1], [u])
        out = np.zeros(u.size)
        if np.any(live):
            out[live] = kernel(ell[live], u[live], tgt[live]) * dens[live]
        return out.reshape(shape)

    res = gauss_kronrod_batch(func, breaks, epsabs=quad_tol, epsrel=1e-10, limit=limit)
    return res.value, res.error, res.converged


def _adaptive_2d(copula, marginals, window, kernel, quad_tol, limit):
    m1, m2 = marginals[0], marginals[1]
    a1, b1 = window.a[0], window.b[0]
    a2, b2 = window.a[1], window.b[1]
    edges_n = _last_edges(window, marginals[-1])
    edges_2 = np.unique(np.concatenate([[a2, b2], [x for x in m2.breakpoints() if a2 < x < b2]]))
    pair_edges = (edges_2[:, None] + edges_n[None, :]).ravel()
    ks = window.ks.astype(float)
    grade = copula.family != "independence"
    sup_n = _support_edges(marginals[-1])
    sup_2 = _support_edges(m2)
    sup_pairs = (np.concatenate([sup_2, [a2, b2]])[:, None] + np.concatenate([sup_n, window.last])[None, :]).ravel()
    sup_pairs = np.concatenate([sup_pairs, sup_n + a2, sup_n + b2])
    sup_1 = [x for x in _support_edges(m1) if a1 <= x <= b1]
    outer_breaks = []
    for sh in kernel.shifts:
        extra = [_kink_points(sh, ks, pair_edges, a1, b1)]
        if grade and (sup_n.size or sup_2.size or sup_1):
            extra.append(_graded(np.concatenate([_kink_points(sh, ks, sup_pairs, a1, b1), sup_1]), a1, b1))
        outer_breaks.append(_seed_breaks(a1, b1, m1, np.concatenate(extra)))
    sup_2_in = [x for x in sup_2 if a2 <= x <= b2]
    inner_tol = quad_tol / (4.0 * (b1 - a1))
    inner_ok = [True]

    def outer(x, owner):
        shape = x.shape
        u1 = x.ravel()
        tgt = np.repeat(owner, shape[1])
        ell1, dens1, live1 = _free_terms(marginals[:1], [u1])
        values = np.zeros(u1.size)
        errors = np.zeros(u1.size)
        idx = np.nonzero(live1)[0]
        if idx.size == 0:
            return values.reshape(shape), errors.reshape(shape)
        breaks = []
        for i in idx:
            shifts = kernel.shifts[tgt[i]] - u1[i]
            extra = [_kink_points(shifts, ks, edges_n, a2, b2)]
            if grade and (sup_n.size or sup_2_in):
                edge_kinks = np.concatenate([_tail_kinks(m2, _kink_points(shifts, ks, sup_n, a2, b2)), sup_2_in])
                extra.append(_graded(edge_kinks, a2, b2))
            breaks.append(_seed_breaks(a2, b2, m2, np.concatenate(extra)))

        def inner(x2, o2):
            shp = x2.shape
            u2 = x2.ravel()
            rows = np.repeat(idx[o2], shp[1])
            ell2, dens2, live2 = _free_terms(marginals[1:2], [u2])
            out = np.zeros(u2.size)
            if np.any(live2):
                r = rows[live2]
                ell = np.concatenate([ell1[r], ell2[live2]], axis=1)
                out[live2] = kernel(ell, u1[r] + u2[live2], tgt[r]) * dens1[r] * dens2[live2]
            return out.reshape(shp)

        res = gauss_kronrod_batch(inner, breaks, epsabs=inner_tol, epsrel=1e-10, limit=limit)
        inner_ok[0] = inner_ok[0] and bool(np.all(res.converged))
        values[idx] = res.value
        errors[idx] = res.error
        return values.reshape(shape), errors.reshape(shape)

    res = gauss_kronrod_batch(outer, outer_breaks, epsabs=quad_tol, epsrel=1e-10, limit=limit)
    return res.value, res.error, res.converged & inner_ok[0]


def _qmc(copula, marginals, window, kernel, log2_points, scrambles, seed):
    free = marginals[:-1]
    t_lo = np.array([float(m.cdf(lo)) for m, lo in zip(free, window.a)])
    t_hi = np.array([float(m.cdf(hi)) for m, hi in zip(free, window.b)])
    volume = float(np.prod(t_hi - t_lo))
    n_targets = kernel.targets.shape[0]

    def func(p):
        t = t_lo + p * (t_hi - t_lo)
        u = np.stack([m.ppf(t[:, i]) for i, m in enumerate(free)], axis=1)
        ell = np.log(t)
        sumu = u.sum(axis=1)
        out = np.empty((p.shape[0], n_targets))
        for j in range(n_targets):
            out[:, j] = kernel(ell, sumu, np.full(p.shape[0], j))
        return out * volume

    mean, stderr = sobol_rqmc(func, len(free), log2_points, scrambles=scrambles, seed=seed)
    return mean, QMC_ERROR_MULTIPLIER * stderr, np.ones(n_targets, dtype=bool)


def _integrate(copula, marginals, window, kernel, mode, quad_tol, limit, qmc_log2, scrambles, seed):
    free_dims = copula.n - 1
    if mode == "auto":
        mode = "adaptive" if free_dims <= 2 else "qmc"
    if mode == "adaptive":
        if free_dims == 1:
            return mode, *_adaptive_1d(copula, marginals, window, kernel, quad_tol, limit)
        if free_dims == 2:
            return mode, *_adaptive_2d(copula, marginals, window, kernel, quad_tol, limit)
        raise ValueError("adaptive quadrature supports at most two integration dimensions")
    if mode == "qmc":
        return mode, *_qmc(copula, marginals, window, kernel, qmc_log2, scrambles, seed)
    raise ValueError(f"unknown quadrature mode {mode!r}")


def _default_quad_tol(n: int) -> float:
    return 1e-10 if n == 2 else 1e-8


def wrapped_pdf_grid(
    copula: CopulaSpec,
    marginals: Sequence[LogMarginal],
    m: int = 12,
    tol: float = 1e-12,
    *,
    window: TruncationWindow | None = None,
    s_values: Sequence[float] | None = None,
    mode: str = "auto",
    quad_tol: float | None = None,
    limit: int = 400,
    qmc_log2: int = 15,
    scrambles: int = 8,
    seed: int = 0,
    midpoints: bool = True,
) -> WrappedPdfEstimate:
    """Wrapped density on the grid ``s_j = j/m`` (or on explicit ``s_values``).

    On the uniform grid the density is also evaluated at the cell midpoints
    (in the same quadrature pass) to calibrate the discretization allowance.
    """
    _check_dims(copula, marginals)
    n_mid = 0
    if s_values is None:
        if int(m) != m or m < 2:
            raise ValueError(f"grid size must be an integer >= 2, got {m}")
        s_values = np.arange(m) / m
        if midpoints:
            s_values = np.concatenate([s_values, (np.arange(m) + 0.5) / m])
            n_mid = int(m)
    s_values = np.asarray(s_values, dtype=float)
    if s_values.size == 0:
        raise ValueError("empty s grid")
    if np.any((s_values < 0) | (s_values >= 1)):
        raise ValueError("s values must lie in [0, 1)")
    if window is None:
        window = make_window(copula, marginals, tol)
    quad_tol = _default_quad_tol(copula.n) if quad_tol is None else quad_tol
    kernel = _PdfKernel(copula, marginals, window, s_values)
    used, values, errors, ok = _integrate(
        copula, marginals, window, kernel, mode, quad_tol, limit, qmc_log2, scrambles, seed
    )
    values = np.asarray(values, dtype=float)
    errors = np.asarray(errors, dtype=float)
    ok = np.asarray(ok, dtype=bool)
    keep = values.size - n_mid
    mid = np.maximum(values[keep:], 0.0) if n_mid else None
    return WrappedPdfEstimate(
        s_values[:keep],
        np.maximum(values[:keep], 0.0),
        errors[:keep],
        window,
        base=marginals[0].base,
        converged=ok[:keep],
        mode=used,
        raw_min=float(np.min(values)),
        mid_values=mid,
    )


def wrapped_pdf_at(copula, marginals, s: float, window: TruncationWindow, **kw) -> tuple[float, float]:
    est = wrapped_pdf_grid(copula, marginals, window=window, s_values=[s], **kw)
    return float(est.values[0]), float(est.quad_err[0])


def bin_probs_direct(
    copula: CopulaSpec,
    marginals: Sequence[LogMarginal],
    edges,
    tol: float = 1e-12,
    *,
    window: TruncationWindow | None = None,
    mode: str = "auto",
    quad_tol: float | None = None,
    limit: int = 400,
    qmc_log2: int = 15,
    scrambles: int = 8,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Probability that the wrapped sum falls in each ``[edges[j], edges[j+1])``.

    Integrated from conditional CDFs of the last coordinate, so no PDF grid
    is involved.  Returns probabilities and error bounds (quadrature plus
    truncation).
    """
    _check_dims(copula, marginals)
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("bin edges must be a strictly increasing vector")
    if edges[0] < 0 or edges[-1] > 1:
        raise ValueError("bin edges must lie in [0, 1]")
    if window is None:
        window = make_window(copula, marginals, tol)
    bins = np.stack([edges[:-1], edges[1:]], axis=1)
    quad_tol = _default_quad_tol(copula.n) if quad_tol is None else quad_tol
    kernel = _BinKernel(copula, marginals, window, bins)
    _, values, errors, _ = _integrate(
        copula, marginals, window, kernel, mode, quad_tol, limit, qmc_log2, scrambles, seed
    )
    return np.asarray(values), np.asarray(errors) + window.err_bound


def digit_probs_direct(
    copula: CopulaSpec, marginals: Sequence[LogMarginal], base: int = 10, tol: float = 1e-12, **kw
) -> tuple[np.ndarray, np.ndarray]:
    """Leading-digit probabilities: bins ``[log_B d, log_B (d+1))`` of the wrapped sum."""
    if marginals[0].base != base:
        raise ValueError(f"marginals are in base {marginals[0].base}, cannot read digits in base {base}")
    edges = np.log(np.arange(1, base + 1)) / math.log(base)
    return bin_probs_direct(copula, marginals, edges, tol, **kw)


def k_term_profile(
    copula: CopulaSpec,
    marginals: Sequence[LogMarginal],
    s: float,
    window: TruncationWindow,
    extra: int = 3,
    rel_tol: float = 1e-8,
) -> tuple[np.ndarray, np.ndarray]:
    """Contribution of each wrap index ``k`` (bivariate case) around the window's range.

    Terms are integrated over the full support of both marginals, to relative
    accuracy, so the values just outside ``[c1, c2]`` measure what the
    truncation drops.
    """
    if copula.n != 2:
        raise ValueError("k-term profiles are computed for bivariate copulas")
    ks = np.arange(window.c1 - extra, window.c2 + extra + 1)
    m1, m2 = marginals
    lo1, hi1 = tail_window(m1, 1e-300)
    lo2, hi2 = tail_window(m2, 1e-300)
    breaks = []
    for k in ks:
        kinks = [s + k - e for e in (lo2, hi2, *m2.breakpoints())]
        breaks.append(_seed_breaks(lo1, hi1, m1, np.array([x for x in kinks if lo1 < x < hi1])))

    def func(x, owner):
        shape = x.shape
        u1 = x.ravel()
        u2 = s + ks[np.repeat(owner, shape[1])] - u1
        return _joint_density(copula, marginals, np.stack([u1, u2], axis=1)).reshape(shape)

    res = gauss_kronrod_batch(func, breaks, epsabs=0.0, epsrel=rel_tol, limit=1000)
    return ks, res.value
