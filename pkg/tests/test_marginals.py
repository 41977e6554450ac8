import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from copula_benford.marginals import (
    Custom,
    Exponential,
    Normal,
    ParetoLog,
    Uniform01,
    from_config,
    log_cdf,
    log_pdf,
    tail_mass,
    tail_window,
)
from copula_benford.sampler import sample_marginal

# (u, Phi(u), log Phi(u), phi(u)) from mpmath at 50 digits
NORMAL_VECTORS = [
    (-38, 2.8854283600687843e-316, -726.55721601882013, 1.097221052007593e-314),
    (-20, 2.7536241186062337e-89, -203.91715537109726, 5.5209483621597632e-88),
    (-10, 7.6198530241605261e-24, -53.231285150512471, 7.6945986267064193e-23),
    (-5, 2.8665157187919391e-7, -15.064998393988726, 1.4867195147342977e-6),
    (-1.5, 0.066807201268858066, -2.7059444008238898, 0.12951759566589173),
    (0, 0.5, -0.69314718055994531, 0.39894228040143268),
    (0.5, 0.6914624612740131, -0.36894641528865639, 0.35206532676429948),
    (3, 0.99865010196836991, -0.0013508099647481938, 0.0044318484119380072),
    (8, 0.99999999999999938, -6.2209605742717861e-16, 5.0522710835368923e-15),
]

SUITE = [
    Normal(),
    Normal(0.3, 0.7),
    Exponential(),
    Exponential(2.5),
    ParetoLog(),
    ParetoLog(3.0, 1.5),
    Uniform01(),
    Custom((0.0, 0.5, 1.0, 2.0), (0.0, 0.2, 0.7, 1.0)),
]


@pytest.mark.parametrize("u, cdf, logcdf, pdf", NORMAL_VECTORS)
def test_normal_against_high_precision_vectors(u, cdf, logcdf, pdf):
    m = Normal()
    assert abs(float(m.cdf(u)) - cdf) <= 1e-15
    if cdf > 1e-300:
        assert float(m.cdf(u)) == pytest.approx(cdf, rel=1e-13)
    assert float(m.logcdf(u)) == pytest.approx(logcdf, rel=1e-13)
    assert float(m.pdf(u)) == pytest.approx(pdf, rel=1e-13)


def test_spec_examples():
    assert log_cdf(Normal(), 0.0) == 0.5
    assert log_cdf(Uniform01(), 0.25) == 0.25
    assert float(log_cdf(ParetoLog(1.0, 2.0, 10), 0.5)) == pytest.approx(0.9, rel=1e-14)
    assert float(log_pdf(Normal(), 0.0)) == pytest.approx(1.0 / math.sqrt(2 * math.pi), rel=1e-15)
    assert log_pdf(Uniform01(), 0.5) == 1.0
    assert log_pdf(Exponential(1.0), -0.1) == 0.0


def test_pareto_log_matches_sampled_pareto():
    # X ~ Pareto(1, 2) drawn directly, then the fraction with log10 X <= 0.5
    rng = np.random.Generator(np.random.Philox(7))
    x = (1.0 - rng.random(400_000)) ** (-1.0 / 2.0)
    frac = np.mean(np.log10(x) <= 0.5)
    se = math.sqrt(0.9 * 0.1 / x.size)
    assert abs(frac - 0.9) < 4 * se
    u = sample_marginal(ParetoLog(), 400_000, seed=3)
    assert abs(np.mean(u <= 0.5) - 0.9) < 4 * se


@pytest.mark.parametrize("m", SUITE, ids=lambda m: m.kind)
def test_cdf_monotone_with_limits(m):
    u = np.linspace(-40, 40, 4001)
    f = m.cdf(u)
    assert np.all(np.diff(f) >= 0)
    assert f[0] == pytest.approx(0.0, abs=1e-300)
    assert f[-1] == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("m", SUITE, ids=lambda m: m.kind)
def test_pdf_matches_cdf_finite_differences(m):
    kinks = np.array(m.breakpoints())
    u = np.linspace(-3, 4, 141) + 1e-3
    if kinks.size:
        u = u[np.min(np.abs(u[:, None] - kinks[None, :]), axis=1) > 1e-3]
    h = 1e-5
    fd = (m.cdf(u + h) - m.cdf(u - h)) / (2 * h)
    pdf = m.pdf(u)
    big = pdf > 1e-6
    # cancellation in cdf differences near 1 costs about eps / h absolute
    np.testing.assert_allclose(fd[big], pdf[big], rtol=1e-6, atol=1e-10)
    assert np.all(pdf >= 0)


@pytest.mark.parametrize("m", SUITE, ids=lambda m: m.kind)
def test_pdf_integrates_to_one_over_window(m):
    from copula_benford.quadrature import integrate

    lo, hi = tail_window(m, 1e-12)
    total, _, ok = integrate(m.pdf, lo, hi, points=m.breakpoints(), epsabs=1e-14, epsrel=1e-13)
    assert ok
    assert 1 - 1e-9 <= total <= 1 + 1e-12


@pytest.mark.parametrize("m", SUITE, ids=lambda m: m.kind)
@given(eps=st.floats(min_value=1e-300, max_value=0.49))
@settings(max_examples=40, deadline=None)
def test_tail_window_contract(m, eps):
    lo, hi = tail_window(m, eps)
    assert lo <= hi
    assert float(m.cdf(lo)) <= eps
    assert float(m.sf(hi)) <= eps
    s_lo, s_hi = m.support()
    assert s_lo <= lo and hi <= s_hi


def test_tail_window_examples():
    lo, hi = tail_window(Exponential(1.0), 1e-10)
    assert lo == 0.0 and hi >= 23.02
    assert float(Exponential(1.0).cdf(hi)) >= 1 - 1e-10
    assert tail_window(Uniform01(), 0.3) == (0.0, 1.0)
    lo, hi = tail_window(Normal(), 1e-22)
    assert lo <= -10 and hi >= 10


@pytest.mark.parametrize("eps", [0.0, 1.0, -1e-3, 2.0])
def test_tail_window_rejects_bad_eps(eps):
    with pytest.raises(ValueError):
        tail_window(Normal(), eps)


@given(st.floats(-30, 30), st.floats(-30, 30))
def test_cdf_monotone_property(u1, u2):
    lo, hi = min(u1, u2), max(u1, u2)
    for m in SUITE:
        assert m.cdf(lo) <= m.cdf(hi)


@pytest.mark.parametrize("m", SUITE, ids=lambda m: m.kind)
def test_ppf_inverts_cdf(m):
    q = np.linspace(0.001, 0.999, 101)
    np.testing.assert_allclose(m.cdf(m.ppf(q)), q, atol=1e-9)


@pytest.mark.parametrize("m", [Normal(), Exponential(), ParetoLog()], ids=lambda m: m.kind)
def test_isf_inverts_sf_deep_in_tail(m):
    q = np.array([1e-300, 1e-100, 1e-20, 1e-5])
    np.testing.assert_allclose(m.sf(m.isf(q)), q, rtol=1e-10)


def test_tail_mass_adds_both_sides():
    m = Normal()
    assert tail_mass(m, -2.0, 3.0) == pytest.approx(float(m.cdf(-2.0) + m.sf(3.0)), rel=1e-15)
    assert tail_mass(Exponential(), 0.0, math.inf) == 0.0


def test_rebase_preserves_law_of_product():
    # X = 10^U with U ~ N(0,1) is 100^(U/2); the base-100 marginal is N(0, 1/2)
    m100 = Normal().rebase(100)
    assert m100.sigma == pytest.approx(0.5)
    assert float(m100.cdf(0.25)) == pytest.approx(float(Normal().cdf(0.5)), rel=1e-15)
    p100 = ParetoLog().rebase(100)
    assert float(p100.cdf(0.25)) == pytest.approx(float(ParetoLog().cdf(0.5)), rel=1e-14)


def test_from_config_grammar():
    assert from_config({"kind": "normal", "mu": 0, "sigma": 1}) == Normal()
    assert from_config({"kind": "exponential", "lambda": 2}) == Exponential(2.0)
    assert from_config({"kind": "pareto_log", "xm": 1, "shape": 2}) == ParetoLog()
    assert from_config({"kind": "uniform01"}) == Uniform01()
    c = from_config({"kind": "custom", "grid": [0, 1, 2], "cdf": [0, 0.4, 1]})
    assert float(c.cdf(1.0)) == pytest.approx(0.4)
    for cfg in ({"kind": "gamma"}, {"mu": 0}, {"kind": "custom", "grid": [0, 1]}, {"kind": "normal", "sigma": -1}):
        with pytest.raises(ValueError):
            from_config(cfg)


def test_invalid_parameters_rejected():
    for make in (lambda: Normal(0, 0), lambda: Exponential(0), lambda: ParetoLog(0, 2), lambda: Uniform01(1)):
        with pytest.raises(ValueError):
            make()
    with pytest.raises(ValueError):
        Custom((0.0, 1.0, 0.5), (0.0, 0.5, 1.0))
    with pytest.raises(ValueError):
        Custom((0.0, 1.0, 2.0), (0.0, 0.6, 0.5))


def test_custom_is_monotone_cubic_through_nodes():
    grid = (0.0, 0.5, 1.0, 2.0)
    vals = (0.0, 0.2, 0.7, 1.0)
    c = Custom(grid, vals)
    np.testing.assert_allclose(c.cdf(np.array(grid[1:-1])), vals[1:-1], atol=1e-15)
    u = np.linspace(-0.5, 2.5, 3001)
    assert np.all(np.diff(c.cdf(u)) >= -1e-15)
