"""Archimedean copulas: CDF, generator calculus and mixed partial derivatives.

Densities are computed as ``psi^(n)(sum phi(u_i)) * prod phi'(u_i)`` where the
n-th derivative of the inverse generator ``psi`` comes from Taylor-mode jet
arithmetic.  To keep the far tails finite, the jet is expanded in a scaled
form ``psi(S + e) = exp(log_scale) * J(e)`` whose coefficients stay O(1)
even when ``S`` or ``1/u_i`` overflow double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np
from scipy.special import logsumexp

from .jet import Jet

FAMILIES = ("independence", "clayton", "amh", "gumbel_barnett")

NEGATIVE_DENSITY_CLAMP = 1e-10


class CopulaBoundaryError(ValueError):
    """Density requested at a coordinate equal to 0 or 1."""


class CopulaConsistencyError(ArithmeticError):
    """A computed density came out clearly negative."""


@dataclass(frozen=True)
class CopulaSpec:
    family: str
    n: int = 2
    alpha: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown copula family {self.family!r}; expected one of {FAMILIES}")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"copula dimension must be an integer >= 2, got {self.n!r}")
        if self.family == "independence":
            if self.alpha not in (None, 0, 0.0):
                raise ValueError("the independence copula takes no alpha")
            object.__setattr__(self, "alpha", None)
            return
        if self.alpha is None:
            raise ValueError(f"{self.family} copula needs a dependence parameter alpha")
        a = float(self.alpha)
        object.__setattr__(self, "alpha", a)
        if not math.isfinite(a):
            raise ValueError(f"alpha must be finite, got {a}")
        if self.family == "clayton":
            if a == 0 or a < -1:
                raise ValueError(f"clayton alpha must lie in [-1, inf) without 0, got {a}")
            if a == -1:
                raise ValueError("clayton alpha = -1 is the singular lower Frechet bound; it has no density")
            if self.n > 2 and a < -1.0 / (self.n - 1):
                raise ValueError(
                    f"clayton alpha={a} is not an {self.n}-copula; need alpha >= {-1.0 / (self.n - 1):.6g}"
                )
        elif self.family == "amh":
            if not -1 <= a < 1:
                raise ValueError(f"amh alpha must lie in [-1, 1), got {a}")
        elif self.family == "gumbel_barnett":
            if not 0 < a <= 1:
                raise ValueError(f"gumbel_barnett alpha must lie in (0, 1], got {a}")
        if self.n >= 3:
            bad = _monotonicity_violation(self)
            if bad is not None:
                raise ValueError(
                    f"{self.family}(alpha={a}) is not a valid {self.n}-copula: "
                    f"(-1)^{bad[0]} psi^({bad[0]}) < 0 at s={bad[1]:.4g}"
                )

    def to_config(self) -> dict[str, Any]:
        cfg: dict[str, Any] = {"family": self.family, "n": self.n}
        if self.alpha is not None:
            cfg["alpha"] = self.alpha
        return cfg


def from_config(cfg: Mapping[str, Any]) -> CopulaSpec:
    if "family" not in cfg:
        raise ValueError("copula spec needs a 'family' field")
    return CopulaSpec(cfg["family"], int(cfg.get("n", 2)), cfg.get("alpha"))


# -- generator and its inverse ---------------------------------------------


def generator(spec: CopulaSpec, t):
    """Generator ``phi(t)`` for ``t`` in (0, 1]; ``phi(1) = 0``."""
    t = np.asarray(t, dtype=float)
    a = spec.alpha
    with np.errstate(divide="ignore"):
        if spec.family == "independence":
            return -np.log(t)
        if spec.family == "clayton":
            return np.expm1(-a * np.log(t)) / a
        if spec.family == "amh":
            return np.log1p(-a * (1.0 - t)) - np.log(t)
        return np.log1p(-a * np.log(t))


def generator_deriv(spec: CopulaSpec, t):
    t = np.asarray(t, dtype=float)
    a = spec.alpha
    if spec.family == "independence":
        return -1.0 / t
    if spec.family == "clayton":
        return -(t ** (-a - 1.0))
    if spec.family == "amh":
        return -(1.0 - a) / (t * (1.0 - a * (1.0 - t)))
    return -a / (t * (1.0 - a * np.log(t)))


def generator_limit(spec: CopulaSpec) -> float:
    """``phi(0+)``; finite only for clayton with negative alpha."""
    if spec.family == "clayton" and spec.alpha < 0:
        return -1.0 / spec.alpha
    return math.inf


def inverse_generator_jet(spec: CopulaSpec, s, order: int) -> Jet:
    """Jet of ``psi = phi^{-1}`` at ``s``: ``psi(s), psi'(s), ..., psi^(order)(s)``.

    >>> inverse_generator_jet(CopulaSpec("clayton", 2, 2.0), 0.0, 1).derivative(1)
    array(-1.)
    """
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("inverse generator is defined for s >= 0")
    if np.any(s >= generator_limit(spec)):
        raise ValueError(f"s must lie below phi(0+) = {generator_limit(spec):.6g} for this copula")
    a = spec.alpha
    x = Jet.variable(s, order)
    if spec.family == "independence":
        return (-x).exp()
    if spec.family == "clayton":
        return (1.0 + a * x) ** (-1.0 / a)
    if spec.family == "amh":
        return (1.0 - a) / (x.exp() - a)
    return ((1.0 - x.exp()) / a).exp()


def inverse_generator(spec: CopulaSpec, s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    ok = s < generator_limit(spec)
    if np.any(ok):
        out[ok] = inverse_generator_jet(spec, s[ok], 0).value
    return out


# -- scaled inverse-generator jets -----------------------------------------
#
# Each family maps its "state" (a per-point scalar summarizing S) to a unit
# jet J with psi(S + e) = exp(log_scale) * J(rate * e):
#   clayton:        state = 1 + alpha*S,   rate = |alpha|/state,  J = (1 +- d)^(-1/alpha)
#   amh:            state = exp(-S),       rate = 1,  J = (1-alpha) e^-d / (1 - alpha state e^-d)
#   gumbel_barnett: state = exp(S),        rate = 1,  J = exp(state (1 - e^d) / alpha)
# The k-th derivative then carries a factor rate^k, folded into the log magnitude.


def _unit_jet(spec: CopulaSpec, state, order: int) -> Jet:
    a = spec.alpha
    d = Jet.variable(np.zeros_like(state), order)
    if spec.family == "clayton":
        return (1.0 + math.copysign(1.0, a) * d) ** (-1.0 / a)
    if spec.family == "amh":
        em = (-d).exp()
        return (1.0 - a) * em / (1.0 - em * (a * state))
    return ((1.0 - d.exp()) * (state / a)).exp()


def _log_rate(spec: CopulaSpec, log_scale):
    if spec.family == "clayton":
        return math.log(abs(spec.alpha)) + spec.alpha * log_scale
    return np.zeros_like(log_scale)


# Reductions over the short coordinate axis, column by column: numpy's strided
# last-axis reduce is several times slower for the tall (N, n) arrays used here.


def _colsum(x: np.ndarray) -> np.ndarray:
    out = x[..., 0].copy()
    for i in range(1, x.shape[-1]):
        out += x[..., i]
    return out


def _colmax(x: np.ndarray) -> np.ndarray:
    out = x[..., 0].copy()
    for i in range(1, x.shape[-1]):
        np.maximum(out, x[..., i], out=out)
    return out


def _logsumexp_last(x: np.ndarray) -> np.ndarray:
    top = _colmax(x)
    top = np.where(np.isfinite(top), top, 0.0)
    return top + np.log(_colsum(np.exp(x - top[..., None])))


def _state_from_log(spec: CopulaSpec, logu: np.ndarray):
    """State and log-scale from log-coordinates ``logu`` (last axis = coordinates)."""
    a = spec.alpha
    if spec.family == "clayton":
        if a > 0:
            lse = _logsumexp_last(-a * logu)
            m = logu.shape[-1]
            log_state = lse + np.log1p(-(m - 1) * np.exp(-lse))
            state = np.exp(log_state)
        else:
            state = _colsum(np.exp(-a * logu)) - (logu.shape[-1] - 1)
            with np.errstate(divide="ignore", invalid="ignore"):
                log_state = np.where(state > 0, np.log(np.where(state > 0, state, 1.0)), -np.inf)
        return state, -log_state / a
    if spec.family == "amh":
        one_minus_t = -np.expm1(logu)
        log_w = _colsum(logu - np.log1p(-a * one_minus_t))
        return np.exp(log_w), log_w
    p = np.prod(1.0 - a * logu, axis=-1)
    return p, (1.0 - p) / a


def _state_from_sum(spec: CopulaSpec, s):
    a = spec.alpha
    s = np.asarray(s, dtype=float)
    if spec.family == "clayton":
        state = 1.0 + a * s
        return state, -np.log(state) / a
    if spec.family == "amh":
        return np.exp(-s), -s
    p = np.exp(s)
    return p, (1.0 - p) / a


def _log_abs_generator_deriv(spec: CopulaSpec, logu: np.ndarray) -> np.ndarray:
    a = spec.alpha
    if spec.family == "clayton":
        return -(a + 1.0) * logu
    if spec.family == "amh":
        return math.log1p(-a) - logu - np.log1p(-a * -np.expm1(logu))
    return math.log(a) - logu - np.log1p(-a * logu)


def mixed_partial(spec: CopulaSpec, logu, k: int) -> np.ndarray:
    """``d^k C / du_1..du_k`` at the point whose log-coordinates are ``logu``.

    ``logu`` has shape ``(..., m)`` with ``m <= n`` coordinates (the copula
    restricted to its first ``m`` margins, which is the same Archimedean
    family).  ``k = m`` gives the density of that margin.  Working from
    ``log u`` keeps points deep in the lower tail representable.
    """
    logu = np.asarray(logu, dtype=float)
    m = logu.shape[-1]
    if not 0 <= k <= m:
        raise ValueError(f"order k={k} must lie in [0, {m}]")
    neg_inf = logu == -np.inf
    zero = _colmax(neg_inf)
    safe = np.where(neg_inf, -1.0, logu)
    if spec.family == "independence":
        out = np.exp(np.sum(safe[..., k:], axis=-1))
        return np.where(zero, 0.0, out)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
        state, log_scale = _state_from_log(spec, safe)
        support = np.isfinite(log_scale) & ~zero
        state = np.where(support, state, 1.0)
        jet = _unit_jet(spec, state, k)
        signed = jet.derivative(k) * (-1.0) ** k
        log_mag = log_scale + k * _log_rate(spec, log_scale)
        if k:
            log_mag = log_mag + _colsum(_log_abs_generator_deriv(spec, safe[..., :k]))
        out = signed * np.exp(np.where(support, log_mag, -np.inf))
    out = np.where(support, out, 0.0)
    if np.any(np.isnan(out)):
        raise CopulaConsistencyError(f"{spec.family} partial derivative evaluated to NaN")
    if np.any(out < -NEGATIVE_DENSITY_CLAMP):
        worst = float(np.min(out))
        raise CopulaConsistencyError(f"{spec.family}(alpha={spec.alpha}) produced a negative density {worst:.3g}")
    return np.maximum(out, 0.0)


def _as_points(spec: CopulaSpec, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape[-1:] != (spec.n,):
        raise ValueError(f"expected points with {spec.n} coordinates, got shape {u.shape}")
    return u


# -- public evaluators -------------------------------------------------------


def copula_cdf(spec: CopulaSpec, u) -> np.ndarray:
    """``C(u)`` for points in the closed unit cube (last axis = coordinates)."""
    u = _as_points(spec, u)
    if np.any((u < 0) | (u > 1)):
        raise ValueError("copula arguments must lie in [0, 1]")
    a = spec.alpha
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if spec.family == "independence":
            return np.prod(u, axis=-1)
        if spec.family == "clayton":
            base = np.sum(u ** (-a), axis=-1) - (spec.n - 1)
            if a > 0:
                return np.where(np.any(u == 0, axis=-1), 0.0, base ** (-1.0 / a))
            return np.maximum(base, 0.0) ** (-1.0 / a)
        if spec.family == "amh":
            ratio = np.prod((1.0 - a * (1.0 - u)) / u, axis=-1)
            return np.where(np.any(u == 0, axis=-1), 0.0, (1.0 - a) / (ratio - a))
        prod = np.prod(1.0 - a * np.log(u), axis=-1)
        return np.where(np.any(u == 0, axis=-1), 0.0, np.exp((1.0 - prod) / a))


def copula_density(spec: CopulaSpec, u) -> np.ndarray:
    """Copula density ``c(u) = d^n C / du_1...du_n`` on the open cube."""
    u = _as_points(spec, u)
    if np.any((u <= 0) | (u >= 1)):
        raise CopulaBoundaryError("copula density is only evaluated strictly inside (0, 1)^n")
    if spec.family == "independence":
        return np.ones(u.shape[:-1])
    return mixed_partial(spec, np.log(u), spec.n)


def clayton_density_closed_form(alpha: float, u) -> np.ndarray:
    """Closed-form Clayton density, evaluated in log space."""
    u = np.asarray(u, dtype=float)
    n = u.shape[-1]
    logu = np.log(u)
    log_const = sum(math.log1p(k * alpha) for k in range(n))
    if alpha > 0:
        lse = logsumexp(-alpha * logu, axis=-1)
        log_base = lse + np.log1p(-(n - 1) * np.exp(-lse))
    else:
        base = np.sum(u ** (-alpha), axis=-1) - (n - 1)
        with np.errstate(divide="ignore"):
            log_base = np.log(np.maximum(base, 0.0))
    log_c = log_const + (-alpha - 1.0) * np.sum(logu, axis=-1) + (-n - 1.0 / alpha) * log_base
    with np.errstate(invalid="ignore"):
        return np.where(np.isfinite(log_base), np.exp(log_c), 0.0)


def conditional_cdf(spec: CopulaSpec, u, j: int = 1) -> np.ndarray:
    """``P(U_{j+1} <= u_{j+1} | U_1 = u_1, ..., U_j = u_j)``.

    Only the first ``j + 1`` coordinates of ``u`` are used.  For ``j = 1`` this
    is ``dC(u_1, u_2)/du_1``.  Bivariate copulas of every family are
    supported; higher dimensions only for clayton.
    """
    u = np.asarray(u, dtype=float)
    if spec.n > 2 and spec.family not in ("clayton", "independence"):
        raise NotImplementedError(f"conditional CDF for {spec.family} is only available for n = 2")
    if not 1 <= j < spec.n:
        raise ValueError(f"conditioning count j must lie in [1, {spec.n - 1}], got {j}")
    if u.shape[-1] < j + 1:
        raise ValueError(f"need at least {j + 1} coordinates, got {u.shape[-1]}")
    cond = u[..., :j]
    last = u[..., j]
    if np.any((cond <= 0) | (cond >= 1)):
        raise CopulaBoundaryError("conditioning coordinates must lie strictly inside (0, 1)")
    if np.any((last < 0) | (last > 1)):
        raise ValueError("conditional CDF argument must lie in [0, 1]")
    if spec.family == "independence":
        return last.copy()
    with np.errstate(divide="ignore"):
        logu = np.log(u[..., : j + 1])
    num = mixed_partial(spec, logu, j)
    den = 1.0 if j == 1 else mixed_partial(spec, logu[..., :j], j)
    return np.clip(num / den, 0.0, 1.0)


def _monotonicity_violation(spec: CopulaSpec):
    """First ``(k, s)`` where ``(-1)^k psi^(k)(s) < 0`` for ``k <= n``, or None."""
    s = np.concatenate([np.linspace(0.0, 2.0, 401), np.geomspace(2.0, 60.0, 400)])
    if spec.family == "clayton" and spec.alpha < 0:
        s = s[s < generator_limit(spec)]
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        state, _ = _state_from_sum(spec, s)
        jet = _unit_jet(spec, state, spec.n)
        signed = jet.derivatives() * ((-1.0) ** np.arange(spec.n + 1))[:, None]
    scale = np.abs(signed).max(axis=0)
    for k in range(1, spec.n + 1):
        bad = np.nonzero(signed[k] < -1e-12 * scale)[0]
        if bad.size:
            return k, float(s[bad[0]])
    return None
