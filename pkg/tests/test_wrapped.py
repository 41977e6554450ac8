import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from copula_benford.copulas import CopulaSpec, clayton_density_closed_form
from copula_benford.marginals import Custom, Exponential, Normal, ParetoLog, Uniform01
from copula_benford.presets import SWEEP_ALPHAS, pairing
from copula_benford.wrapped import (
    CertificateError,
    TruncationWindow,
    bin_probs_direct,
    digit_probs_direct,
    integrand,
    k_term_profile,
    make_window,
    wrapped_pdf_at,
    wrapped_pdf_grid,
)

CLAYTON = CopulaSpec("clayton", 2, 2.0)
INDEP = CopulaSpec("independence", 2)
SUITE = [Normal(), Normal(0.3, 0.7), Exponential(), ParetoLog(), Uniform01(), Custom((0.0, 0.5, 1.0, 2.0), (0.0, 0.2, 0.7, 1.0))]


@pytest.mark.parametrize("other", SUITE, ids=lambda m: m.kind)
def test_uniform_marginal_absorbs_independent_partner(other):
    est = wrapped_pdf_grid(INDEP, (Uniform01(), other), m=12)
    assert np.max(np.abs(est.values - 1.0)) <= 1e-6 + np.max(est.quad_err)
    est = wrapped_pdf_grid(INDEP, (other, Uniform01()), m=12)
    assert np.max(np.abs(est.values - 1.0)) <= 1e-6 + np.max(est.quad_err)


def test_uniform_pair_is_exactly_flat():
    est = wrapped_pdf_grid(INDEP, (Uniform01(), Uniform01()), m=12)
    np.testing.assert_allclose(est.values, 1.0, atol=1e-10)
    value, err = wrapped_pdf_at(INDEP, (Uniform01(), Uniform01()), 0.37, est.window)
    assert value == pytest.approx(1.0, abs=1e-10)


def test_normal_pair_clayton_window():
    window = make_window(CLAYTON, (Normal(), Normal()), 1e-20, a=[-10.0], b=[10.0], k_range=(-20, 20))
    assert window.err_bound <= 1e-20
    est = wrapped_pdf_grid(CLAYTON, (Normal(), Normal()), m=12, window=window)
    assert np.all(np.abs(est.values - 1.0) <= 0.05)
    total, ok = est.check_normalization()
    assert ok


def test_exponential_pair_clayton_window_and_shape():
    margs = (Exponential(), Exponential())
    window = make_window(CLAYTON, margs, 1e-8, a=[0.0], b=[25.0], k_range=(0, 50))
    assert window.err_bound <= 1e-8
    est = wrapped_pdf_grid(CLAYTON, margs, m=12, window=window)
    assert np.max(np.abs(est.values - 1.0)) > 0.1
    assert est.check_normalization()[1]


def test_normal_exponential_pair_certified_automatically():
    margs = (Normal(), Exponential())
    est = wrapped_pdf_grid(CLAYTON, margs, m=12, tol=1e-12)
    assert est.window.err_bound <= 1e-12
    assert est.check_normalization()[1]
    assert np.all(est.converged)


def test_window_that_cannot_be_certified_is_reported():
    with pytest.raises(CertificateError, match="no certificate"):
        make_window(CLAYTON, (Normal(), Exponential()), 1e-21, a=[-5.0], b=[10.0])


def test_window_validation():
    with pytest.raises(ValueError):
        TruncationWindow((1.0,), (0.0,), 0, 1, 0.0, (0.0, 1.0), 1.0, 0.0)
    with pytest.raises(ValueError):
        TruncationWindow((0.0,), (1.0,), 2, 2, 0.0, (0.0, 1.0), 1.0, 0.0)
    with pytest.raises(ValueError):
        make_window(CLAYTON, (Normal(), Normal()), 1.5)


def test_integrand_examples():
    margs = (Normal(), Normal())
    got = integrand(CLAYTON, margs, [0.0], 0.5, 0)
    f2 = stats.norm.cdf(0.5)
    expected = clayton_density_closed_form(2.0, np.array([0.5, f2]))[()] * stats.norm.pdf(0.0) * stats.norm.pdf(0.5)
    assert got == pytest.approx(expected, rel=1e-12)
    assert integrand(CLAYTON, (Exponential(), Exponential()), [-0.5], 0.3, 2) == 0.0
    got = integrand(INDEP, (Normal(), Exponential()), [0.2], 0.4, 1)
    assert got == pytest.approx(stats.norm.pdf(0.2) * stats.expon.pdf(1.2), rel=1e-13)


def test_k_terms_decay_outside_window():
    margs = (Normal(), Normal())
    window = make_window(CLAYTON, margs, 1e-20, a=[-10.0], b=[10.0], k_range=(-20, 20))
    ks, terms = k_term_profile(CLAYTON, margs, 0.25, window)
    dropped = terms[(ks < window.c1) | (ks > window.c2)]
    assert np.max(dropped) < window.err_bound
    upper = terms[ks >= 2]
    lower = terms[ks <= -2][::-1]
    assert np.all(np.diff(upper) <= 0) and np.all(np.diff(lower) <= 0)
    assert terms.sum() == pytest.approx(
        wrapped_pdf_at(CLAYTON, margs, 0.25, window)[0], abs=1e-9
    )


def test_shrinking_window_moves_values_within_bound():
    margs = (Normal(), Exponential())
    wide = wrapped_pdf_grid(CLAYTON, margs, m=6, tol=1e-12)
    narrow_window = make_window(CLAYTON, margs, 1e-5)
    narrow = wrapped_pdf_grid(CLAYTON, margs, m=6, window=narrow_window)
    limit = narrow_window.err_bound + wide.window.err_bound + narrow.quad_err + wide.quad_err
    assert np.all(np.abs(wide.values - narrow.values) <= limit)


def test_base_change_leaves_copula_untouched():
    # with T = U1 + U2 in base 10, the base-100 sum is T/2, so
    # p100(s) + p100(s + 1/2) = 2 p10(2s mod 1)
    copula = CopulaSpec("amh", 2, 0.5)
    b10 = wrapped_pdf_grid(copula, (Normal(0.2, 0.4), Exponential(3.0)), m=12)
    b100 = wrapped_pdf_grid(copula, (Normal(0.2, 0.4).rebase(100), Exponential(3.0).rebase(100)), m=12)
    folded = b100.values[:6] + b100.values[6:]
    np.testing.assert_allclose(folded, 2 * b10.values[::2], atol=1e-8)


def test_weak_gumbel_barnett_grid_is_nearly_flat():
    est = wrapped_pdf_grid(CopulaSpec("gumbel_barnett", 2, 0.1), (Normal(), Normal()), m=12)
    assert np.all((est.values >= 0.9999) & (est.values <= 1.0001))


def test_three_marginals_use_quasi_monte_carlo():
    copula = CopulaSpec("gumbel_barnett", 4, 0.1)
    est = wrapped_pdf_grid(copula, [Normal()] * 4, m=9, qmc_log2=12)
    assert est.mode == "qmc"
    assert est.check_normalization()[1]


def test_two_free_coordinates_use_nested_rule():
    copula = CopulaSpec("clayton", 3, 1.0)
    est = wrapped_pdf_grid(copula, [Normal()] * 3, m=9)
    assert est.mode == "adaptive"
    assert est.check_normalization()[1]
    assert est.raw_min >= -1e-12


@given(
    family=st.sampled_from(sorted(SWEEP_ALPHAS)),
    index=st.integers(0, 4),
    label=st.sampled_from(["A", "B"]),
)
@settings(max_examples=8, deadline=None)
def test_normalization_and_nonnegativity(family, index, label):
    copula = CopulaSpec(family, 2, SWEEP_ALPHAS[family][index])
    est = wrapped_pdf_grid(copula, pairing(label), m=12, tol=1e-10)
    assert est.raw_min >= -1e-12
    total, ok = est.check_normalization()
    assert ok, (total, est.tol_total)


def test_digit_probabilities_sum_to_one_and_match_grid_route():
    margs = (Normal(), Normal())
    probs, errs = digit_probs_direct(CLAYTON, margs)
    assert probs.sum() == pytest.approx(1.0, abs=1e-9)
    assert np.all(errs < 1e-8)
    from copula_benford.metrics import digit_probs_from_pdf

    grid = digit_probs_from_pdf(wrapped_pdf_grid(CLAYTON, margs, m=12))
    np.testing.assert_allclose(grid, probs, atol=1e-6)


def test_bin_edges_validated():
    with pytest.raises(ValueError):
        bin_probs_direct(CLAYTON, (Normal(), Normal()), [0.0, 0.5, 0.4])
    with pytest.raises(ValueError):
        bin_probs_direct(CLAYTON, (Normal(), Normal()), [0.0, 1.5])
    with pytest.raises(ValueError):
        digit_probs_direct(CLAYTON, (Normal(), Normal()), base=100)


def test_grid_arguments_validated():
    with pytest.raises(ValueError):
        wrapped_pdf_grid(CLAYTON, (Normal(), Normal()), m=1)
    with pytest.raises(ValueError):
        wrapped_pdf_grid(CLAYTON, (Normal(),), m=12)
    with pytest.raises(ValueError):
        wrapped_pdf_grid(CLAYTON, (Normal(), Normal()), s_values=[1.0])
