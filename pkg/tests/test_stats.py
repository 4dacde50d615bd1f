import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from steinpa.stats import (
    SmoothTest,
    d1_riemann,
    d1_to_standard_normal,
    d1_value,
    default_h_suite,
    derivative_norm,
    empirical_cov_matrix,
    multivariate_smooth_check,
    normal_expectation,
    standardize,
    variance_jackknife,
)


def test_point_mass_at_zero():
    assert d1_value([0.0, 0.0, 0.0]) == pytest.approx(math.sqrt(2 / math.pi), abs=1e-9)


def test_point_mass_at_one():
    expected = 2 * norm.pdf(1) + (2 * norm.cdf(1) - 1)
    assert expected == pytest.approx(1.16663, abs=1e-5)
    assert d1_value([1.0] * 5) == pytest.approx(expected, abs=1e-9)


def test_large_normal_sample_and_riemann():
    x = np.random.default_rng(0).standard_normal(100_000)
    exact = d1_value(x)
    assert exact <= 0.02
    assert d1_riemann(x) == pytest.approx(exact, abs=1e-4)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=40))
def test_riemann_agrees_on_arbitrary_samples(xs):
    assert d1_riemann(xs, h=1e-4) == pytest.approx(d1_value(xs), abs=1e-4)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=40), st.floats(-3, 3))
def test_d1_is_a_metric_shift_bound(xs, c):
    # moving every sample by c moves the distance by at most |c|
    a, b = d1_value(xs), d1_value(np.asarray(xs) + c)
    assert abs(a - b) <= abs(c) + 1e-9


def test_bootstrap_se_reproducible():
    x = np.random.default_rng(1).standard_normal(500)
    a = d1_to_standard_normal(x, seed=4)
    b = d1_to_standard_normal(x, seed=4)
    assert a == b and a.se > 0 and a.n == 500
    assert d1_to_standard_normal(x, resamples=0).se == 0


def test_d1_input_checks():
    with pytest.raises(ValueError):
        d1_value([1.0])
    with pytest.raises(ValueError):
        d1_value([0.0, np.inf])


def test_standardize():
    z = np.random.default_rng(2).standard_normal(1000)
    zz = standardize(z).values
    again = standardize(zz).values
    assert np.allclose(again, zz, atol=1e-12)
    assert np.allclose(standardize(3 * z - 7).values, zz, atol=1e-12)
    pop = standardize(z, "population", mean=1.0, scale=2.0).values
    assert np.allclose(pop, (z - 1) / 2)
    with pytest.raises(ValueError):
        standardize(np.ones(10))
    with pytest.raises(ValueError):
        standardize(z, "population")


def test_cov_matrix_recovers_sigma():
    sigma = np.array([[1.0, 0.4], [0.4, 2.0]])
    N = 20_000
    x = np.random.default_rng(3).multivariate_normal([0, 0], sigma, size=N)
    est = empirical_cov_matrix(x)
    # SE of a covariance entry for Gaussian data: sqrt((s_ij^2 + s_ii s_jj) / N)
    se = np.sqrt((sigma**2 + np.outer(np.diag(sigma), np.diag(sigma))) / N)
    assert np.all(np.abs(est - sigma) < 4 * se)
    assert empirical_cov_matrix(x[:, 0]) == pytest.approx(np.var(x[:, 0], ddof=1))


def test_variance_jackknife():
    assert variance_jackknife(np.full(40, 3.3)) == (0.0, 0.0)
    x = np.random.default_rng(5).normal(0, 2, 4000)
    v, se = variance_jackknife(x)
    assert v == pytest.approx(np.var(x, ddof=1))
    assert abs(v - 4) < 4 * se


def test_suite_derivatives_bounded():
    for p in (1, 2, 3):
        for h in default_h_suite(p):
            assert derivative_norm(h, p) <= 1 + 1e-3, h.name


def test_normal_expectation_analytic():
    h = default_h_suite(2)[3]
    # E exp(-(X^2+Y^2)/2)/2 over N(0, I_2) is 1/4
    m, se = normal_expectation(h, 2)
    assert m == pytest.approx(0.25, abs=max(4 * se, 1e-6))


def test_smooth_check_shift_gap():
    rng = np.random.default_rng(6)
    x = rng.standard_normal((200_000, 2))
    rep = multivariate_smooth_check(x + [0.1, 0.0])
    gap = dict(zip(rep.names, rep.gaps))["sin_x1"]
    ses = dict(zip(rep.names, rep.ses))["sin_x1"]
    expected = math.sin(0.1) * math.exp(-0.5) / 2
    assert abs(gap - expected) < 4 * ses
    clean = multivariate_smooth_check(x)
    assert np.all(clean.gaps < 4 * clean.ses)


def test_rough_function_rejected():
    rough = SmoothTest("steep", lambda x: np.sin(3 * x[..., 0]), (0,))
    rep = multivariate_smooth_check(np.zeros((10, 1)) + 0.1, h_suite=[rough, default_h_suite(1)[0]])
    assert rep.rejected == ["steep"] and rep.names == ["sin_x1"]
