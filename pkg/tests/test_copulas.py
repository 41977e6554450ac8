import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from copula_benford.copulas import (
    CopulaBoundaryError,
    CopulaSpec,
    clayton_density_closed_form,
    conditional_cdf,
    copula_cdf,
    copula_density,
    from_config,
    generator,
    generator_deriv,
    inverse_generator,
    inverse_generator_jet,
    mixed_partial,
)
from copula_benford.quadrature import sobol_rqmc
from copula_benford.sampler import sample_copula

mp.mp.dps = 50

SPECS = [
    CopulaSpec("independence", 2),
    CopulaSpec("clayton", 2, -0.5),
    CopulaSpec("clayton", 2, 0.5),
    CopulaSpec("clayton", 2, 2.0),
    CopulaSpec("clayton", 3, 1.0),
    CopulaSpec("amh", 2, -0.9),
    CopulaSpec("amh", 2, 0.5),
    CopulaSpec("amh", 3, 0.5),
    CopulaSpec("gumbel_barnett", 2, 0.1),
    CopulaSpec("gumbel_barnett", 2, 1.0),
    CopulaSpec("gumbel_barnett", 3, 0.1),
]


def _tag(spec):
    return f"{spec.family}-n{spec.n}-{spec.alpha}"


def mp_psi(family, alpha):
    a = mp.mpf(alpha) if alpha is not None else None
    if family == "independence":
        return lambda s: mp.exp(-s)
    if family == "clayton":
        return lambda s: (1 + a * s) ** (-1 / a)
    if family == "amh":
        return lambda s: (1 - a) / (mp.exp(s) - a)
    return lambda s: mp.exp((1 - mp.exp(s)) / a)


def richardson_derivative(func, x, order, step=mp.mpf("1e-3")):
    """k-th central difference, two levels of Richardson extrapolation in h^2."""
    x = mp.mpf(x)

    def central(h):
        total = mp.mpf(0)
        for j in range(order + 1):
            total += (-1) ** j * mp.binomial(order, j) * func(x + (order / mp.mpf(2) - j) * h)
        return total / h**order

    d1, d2, d3 = central(step), central(step / 2), central(step / 4)
    r1 = (4 * d2 - d1) / 3
    r2 = (4 * d3 - d2) / 3
    return (16 * r2 - r1) / 15


JET_CASES = [
    ("independence", None, (0.0, 0.4, 2.5)),
    ("clayton", -0.5, (0.0, 0.3, 1.5)),
    ("clayton", 0.5, (0.0, 0.7, 4.0)),
    ("clayton", 2.0, (0.0, 0.4, 3.0)),
    ("amh", -0.9, (0.0, 0.5, 3.0)),
    ("amh", 0.5, (0.0, 0.5, 3.0)),
    ("gumbel_barnett", 0.1, (0.0, 0.5, 2.0)),
    ("gumbel_barnett", 1.0, (0.0, 0.5, 2.0)),
]


@pytest.mark.parametrize("family, alpha, points", JET_CASES)
@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_jet_derivatives_match_richardson_differences(family, alpha, points, order):
    spec = CopulaSpec(family, 2, alpha)
    jet = inverse_generator_jet(spec, np.array(points), order)
    psi = mp_psi(family, alpha)
    for idx, s in enumerate(points):
        expected = float(richardson_derivative(psi, s, order))
        assert float(jet.derivative(order)[idx]) == pytest.approx(expected, rel=1e-6)


def test_inverse_generator_examples():
    jet = inverse_generator_jet(CopulaSpec("clayton", 2, 2.0), np.array([0.0, 1.0]), 1)
    assert jet.derivative(1)[0] == -1.0
    assert jet.derivative(1)[1] == pytest.approx(-(3.0 ** -1.5), rel=1e-15)
    assert float(inverse_generator_jet(CopulaSpec("amh", 2, 0.5), 0.0, 0).value) == 1.0
    # float64 central difference with step 1e-4 for the second derivative
    spec = CopulaSpec("gumbel_barnett", 2, 0.1)
    h = 1e-4
    psi = lambda s: math.exp((1 - math.exp(s)) / 0.1)
    fd = (psi(h) - 2 * psi(0.0) + psi(-h)) / h**2
    assert float(inverse_generator_jet(spec, 0.0, 2).derivative(2)) == pytest.approx(fd, rel=1e-6)


@pytest.mark.parametrize("spec", SPECS, ids=_tag)
def test_generator_round_trip(spec):
    t = np.linspace(0.01, 1.0, 100)
    np.testing.assert_allclose(inverse_generator(spec, generator(spec, t)), t, rtol=1e-10, atol=1e-12)
    assert generator(spec, 1.0) == 0.0
    assert np.all(np.diff(generator(spec, t)) < 0)


@pytest.mark.parametrize("spec", SPECS[1:], ids=_tag)
def test_generator_derivative_matches_difference(spec):
    t = np.linspace(0.05, 0.95, 19)
    h = 1e-6
    fd = (generator(spec, t + h) - generator(spec, t - h)) / (2 * h)
    np.testing.assert_allclose(generator_deriv(spec, t), fd, rtol=1e-7)


def test_cdf_examples():
    assert copula_cdf(CopulaSpec("independence", 2), [0.3, 0.5]) == pytest.approx(0.15, abs=1e-16)
    e1 = math.exp(-1.0)
    gb = CopulaSpec("gumbel_barnett", 2, 1.0)
    assert copula_cdf(gb, [e1, e1]) == pytest.approx(math.exp(-3.0), rel=1e-14)
    s = generator(gb, e1) * 2
    assert float(inverse_generator(gb, s)) == pytest.approx(math.exp(-3.0), rel=1e-14)
    for spec in SPECS:
        for k in range(spec.n):
            u = np.ones(spec.n)
            u[k] = 0.37
            assert copula_cdf(spec, u) == pytest.approx(0.37, abs=1e-12)


def test_clayton_density_example_against_cdf_differences():
    expected = 3 * 0.25**-3 * 7**-2.5
    spec = CopulaSpec("clayton", 2, 2.0)
    assert float(copula_density(spec, [0.5, 0.5])) == pytest.approx(expected, rel=1e-13)
    assert expected == pytest.approx(1.4810, abs=5e-5)

    def cdf(x, y):
        return (x**-2 + y**-2 - 1) ** mp.mpf(-0.5)

    def mixed(h):
        x = y = mp.mpf("0.5")
        return (cdf(x + h, y + h) - cdf(x + h, y - h) - cdf(x - h, y + h) + cdf(x - h, y - h)) / (4 * h * h)

    h = mp.mpf("1e-3")
    d1, d2 = mixed(h), mixed(h / 2)
    assert float((4 * d2 - d1) / 3) == pytest.approx(expected, rel=1e-6)


CLOSED_FORM_CASES = [(a, n) for n in (2, 3, 4) for a in (-0.4, -0.3, 0.5, 2.0, 5.0) if a >= -1.0 / (n - 1)]


@pytest.mark.parametrize("alpha, n", CLOSED_FORM_CASES)
def test_clayton_closed_form_matches_jet_path(alpha, n):
    spec = CopulaSpec("clayton", n, alpha)
    pts = np.random.Generator(np.random.Philox(n)).uniform(0.02, 0.98, size=(500, n))
    jet = copula_density(spec, pts)
    closed = clayton_density_closed_form(alpha, pts)
    keep = closed > 1e-200
    np.testing.assert_allclose(jet[keep], closed[keep], rtol=1e-10)


@pytest.mark.parametrize("spec", SPECS, ids=_tag)
def test_density_integrates_to_one(spec):
    def func(p):
        return copula_density(spec, np.clip(p, 1e-15, 1 - 1e-15))[:, None]

    mean, err = sobol_rqmc(func, spec.n, 14, scrambles=8, seed=1)
    assert abs(mean[0] - 1.0) <= max(4 * err[0], 2e-3)


@pytest.mark.parametrize("spec", SPECS, ids=_tag)
def test_axioms_on_probe_grid(spec):
    probe = np.linspace(0, 1, 17)
    for k in range(spec.n):
        pts = np.ones((17, spec.n))
        pts[:, k] = probe
        np.testing.assert_allclose(copula_cdf(spec, pts), probe, atol=1e-10)
        pts = np.full((16, spec.n), 0.5)
        pts[:, (k + 1) % spec.n] = probe[1:]
        pts[:, k] = 0.0
        np.testing.assert_allclose(copula_cdf(spec, pts), 0.0, atol=1e-10)
    inner = np.random.Generator(np.random.Philox(3)).uniform(1e-6, 1 - 1e-6, size=(2000, spec.n))
    assert np.all(copula_density(spec, inner) >= 0)


@pytest.mark.parametrize("spec", [s for s in SPECS if s.n == 2], ids=_tag)
def test_rectangle_volumes_nonnegative(spec):
    rng = np.random.Generator(np.random.Philox(11))
    a, b = rng.random((1000, 2)), rng.random((1000, 2))
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    vol = (
        copula_cdf(spec, hi)
        - copula_cdf(spec, np.c_[lo[:, 0], hi[:, 1]])
        - copula_cdf(spec, np.c_[hi[:, 0], lo[:, 1]])
        + copula_cdf(spec, lo)
    )
    assert vol.min() >= -1e-12


@pytest.mark.parametrize("spec", [s for s in SPECS if s.n == 2 and s.family != "independence"], ids=_tag)
def test_density_matches_cdf_mixed_differences(spec):
    g = np.linspace(0.1, 0.9, 9)
    pts = np.array(np.meshgrid(g, g, indexing="ij")).reshape(2, -1).T
    h = 1e-4
    dx, dy = np.array([h, 0]), np.array([0, h])
    fd = (
        copula_cdf(spec, pts + dx + dy)
        - copula_cdf(spec, pts + dx - dy)
        - copula_cdf(spec, pts - dx + dy)
        + copula_cdf(spec, pts - dx - dy)
    ) / (4 * h * h)
    np.testing.assert_allclose(fd, copula_density(spec, pts), rtol=1e-5)


@pytest.mark.parametrize("family, alpha", [("clayton", 1e-6), ("amh", 0.0), ("gumbel_barnett", 1e-6)])
def test_independence_limit(family, alpha):
    pts = np.random.Generator(np.random.Philox(5)).uniform(0.05, 0.95, size=(200, 2))
    assert np.max(np.abs(copula_density(CopulaSpec(family, 2, alpha), pts) - 1.0)) <= 1e-3


@given(
    st.sampled_from([s for s in SPECS[1:] if s.n == 2 or s.family == "clayton"]),
    st.floats(0.01, 0.99),
    st.floats(0.0, 1.0),
    st.floats(0.0, 1.0),
)
@settings(max_examples=200, deadline=None)
def test_conditional_cdf_is_monotone_distribution(spec, u1, v1, v2):
    lo, hi = min(v1, v2), max(v1, v2)
    c_lo = conditional_cdf(spec, np.array([u1, lo] + [0.5] * (spec.n - 2)))
    c_hi = conditional_cdf(spec, np.array([u1, hi] + [0.5] * (spec.n - 2)))
    assert 0.0 <= c_lo <= c_hi + 1e-12 <= 1.0 + 1e-12


def test_conditional_cdf_examples():
    assert conditional_cdf(CopulaSpec("independence", 2), [0.4, 0.7]) == pytest.approx(0.7)
    clayton = CopulaSpec("clayton", 2, 2.0)
    assert conditional_cdf(clayton, [0.5, 1.0]) == pytest.approx(1.0, abs=1e-14)
    assert conditional_cdf(clayton, [0.5, 0.5]) == pytest.approx(8 * 7**-1.5, rel=1e-13)


def test_conditional_cdf_against_frailty_sampler():
    spec = CopulaSpec("clayton", 2, 2.0)
    u = sample_copula(spec, 2_000_000, seed=9).uniforms
    near = np.abs(u[:, 0] - 0.5) < 0.005
    frac = np.mean(u[near, 1] <= 0.5)
    target = float(conditional_cdf(spec, [0.5, 0.5]))
    assert 0 < target < 1
    assert abs(frac - target) <= 3 * math.sqrt(target * (1 - target) / near.sum())


def test_mixed_partial_handles_deep_tail():
    spec = CopulaSpec("clayton", 2, 2.0)
    # on the diagonal the density behaves like 3 / (2^2.5 u)
    logu = np.array([[-300.0, -300.0], [-1.0, -np.inf]])
    out = mixed_partial(spec, logu, 2)
    assert out[0] == pytest.approx(3 * 2**-2.5 * math.exp(300.0), rel=1e-10)
    assert out[1] == 0.0


def test_density_rejects_boundary_points():
    with pytest.raises(CopulaBoundaryError):
        copula_density(CopulaSpec("clayton", 2, 2.0), [0.0, 0.5])
    with pytest.raises(CopulaBoundaryError):
        copula_density(CopulaSpec("amh", 2, 0.5), [0.5, 1.0])


@pytest.mark.parametrize(
    "family, n, alpha",
    [
        ("clayton", 2, 0.0),
        ("clayton", 2, -1.5),
        ("clayton", 3, -0.6),
        ("amh", 2, 1.0),
        ("amh", 3, -0.5),
        ("gumbel_barnett", 2, 0.0),
        ("gumbel_barnett", 2, 1.2),
        ("gumbel_barnett", 3, 1.0),
        ("gumbel_barnett", 7, 0.1),
        ("frank", 2, 1.0),
        ("clayton", 1, 1.0),
    ],
)
def test_invalid_specs_rejected(family, n, alpha):
    with pytest.raises(ValueError):
        CopulaSpec(family, n, alpha)


def test_gumbel_barnett_weak_dependence_valid_up_to_five():
    spec = CopulaSpec("gumbel_barnett", 5, 0.1)
    pts = np.random.Generator(np.random.Philox(2)).uniform(0.01, 0.99, size=(500, 5))
    assert np.all(copula_density(spec, pts) >= 0)


def test_dimension_mismatch_and_config():
    with pytest.raises(ValueError):
        copula_cdf(CopulaSpec("clayton", 3, 1.0), [0.5, 0.5])
    assert from_config({"family": "clayton", "alpha": 2, "n": 2}) == CopulaSpec("clayton", 2, 2.0)
    spec = CopulaSpec("amh", 3, 0.5)
    assert from_config(spec.to_config()) == spec
    with pytest.raises(ValueError):
        from_config({"alpha": 1})
