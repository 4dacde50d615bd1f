import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steinpa.bounds import (
    CovDecayParams,
    DomainError,
    TheoremId,
    block_decompose,
    decay_constants,
    effective_alpha,
    field_inverse_bound,
    gershgorin_check,
    lemma_cov_sum_bound,
    lemma_cross_block_bound,
    optimize_block_size,
    theorem21_bound,
    theorem21_constants,
    theorem22_bound,
)
from steinpa.bounds.oracles import (
    brute_block_min,
    exact_cross_block_cov,
    exact_offdiag_block_cov,
)

P11 = CovDecayParams(1.0, 1.0, 1)


def test_block_decompose():
    s = block_decompose(5, 2)
    assert (s.m, s.r) == (3, 1)
    s = block_decompose(4, 2)
    assert (s.m, s.r) == (2, 2)
    assert s.axis_segments() == [(0, 2), (2, 4)]
    with pytest.raises(DomainError):
        block_decompose(4, 5)


@settings(max_examples=100, deadline=None)
@given(n=st.integers(1, 60), data=st.data(), d=st.integers(1, 3))
def test_block_decompose_partition(n, data, d):
    l = data.draw(st.integers(1, n))
    s = block_decompose(n, l, d)
    assert n == (s.m - 1) * l + s.r and 1 <= s.r <= l
    if d == 1:
        covered = np.concatenate([s.sites(b)[:, 0] for b in s.blocks()])
        assert sorted(covered.tolist()) == list(range(n))


def test_lemma_values():
    assert lemma_cov_sum_bound(P11, 10, 2) == pytest.approx(18.41348, abs=1e-5)
    assert lemma_cross_block_bound(P11, 10, 1) == pytest.approx(2.502650, abs=1e-6)


@pytest.mark.parametrize("lam", [0.3, 1.0])
def test_lemma_cov_sum_dominates_enumeration(lam):
    params = CovDecayParams(1.0, lam, 1)
    for n in range(2, 13):
        for l in range(1, n + 1):
            assert exact_offdiag_block_cov(params, n, l) <= lemma_cov_sum_bound(params, n, l) + 1e-9


def test_lemma_cross_block_dominates_enumeration_d1():
    for lam in (0.3, 1.0):
        params = CovDecayParams(1.0, lam, 1)
        for n in range(2, 13):
            for b in range(1, n + 1):
                assert exact_cross_block_cov(params, n, (n - b,)) <= lemma_cross_block_bound(params, n, b) + 1e-9


@pytest.mark.parametrize(
    "a, b, d, n",
    [(1, 1, 1, 100), (1, 8, 1, 100), (2, 2, 3, 100)],
)
def test_block_size_examples(a, b, d, n):
    l, guarantee = optimize_block_size(a, b, d, n)
    assert guarantee >= brute_block_min(a, b, d, n)


def test_block_size_specific():
    assert optimize_block_size(1, 1, 1, 100) == (1, pytest.approx(3.0))
    l, g = optimize_block_size(1, 8, 1, 100)
    assert l == 2 and g == pytest.approx(math.sqrt(8) * 3)
    assert brute_block_min(1, 8, 1, 100) == pytest.approx(3 + 8 / 3)
    assert optimize_block_size(2, 2, 3, 100).bound == pytest.approx(2 * (3 ** -0.75 + 2 * 3**0.25))


def _kappa1_by_hand(kappa0, lam, d, K, A):
    mu = math.exp(lam) / (math.exp(lam) - 1) ** 2
    ups = mu * math.exp(lam)
    g = (4 * mu + 2 * ups) ** d - (2 * ups) ** d
    base = 10 * K * kappa0**d * g**d * 2 ** (3 * d / 2) / (math.pi ** (d / 2) * A ** (d + 0.5))
    return base ** (1 / (d + 1)) * (d ** (-d / (d + 1)) + 2 * d ** (1 / (d + 1)))


@pytest.mark.parametrize("d", [1, 2, 3])
def test_theorem21_against_reimplementation(d):
    params = CovDecayParams(0.7, 0.9, d)
    A = 1.3
    rep = theorem21_bound(params, 2.0, 50, A)
    k1 = _kappa1_by_hand(0.7, 0.9, d, 2.0, A)
    assert rep.value == pytest.approx(k1 * 50 ** (-d / (2 * d + 2)), rel=1e-12)
    assert rep.theorem_id == TheoremId.FIELD
    C, _ = theorem21_constants(params, 2.0, A)
    g = decay_constants(params).gamma
    assert C == pytest.approx(5 * 2.0 * d * math.sqrt(math.pi * A / 2) / (0.7 * g), rel=1e-12)
    assert rep.valid_from == pytest.approx(max(C ** (2 / d), C ** (-2 / (d + 2))))


def test_theorem21_at_ten_thousand():
    A = 1 / math.tanh(0.5)
    rep = theorem21_bound(P11, 1, 10_000, A)
    assert rep.value == pytest.approx(_kappa1_by_hand(1, 1, 1, 1, A) / 10, rel=1e-12)
    assert rep.applicable


def test_theorem21_domain():
    with pytest.raises(DomainError):
        theorem21_bound(P11, 0, 10, 1.0)


@pytest.mark.parametrize("d", [1, 2])
def test_theorem22_rate(d):
    params = CovDecayParams(1.0, 1.0, d)
    n = 16
    factor = 2 ** (2 * (d + 1) / d)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = theorem22_bound(params, 1, n, 2, 0.5, 2.0, 3.0)
        # alpha enters as alpha * psi^2; strip it to isolate the n-rate
        b = theorem22_bound(params, 1, n * factor, 2, 0.5, 2.0, 3.0)
    tail = 0.5 * 9.0
    assert (a.value - tail) / (b.value - tail) == pytest.approx(2.0, rel=1e-12)
    assert not a.constant_tracked


def test_effective_alpha_rounds_with_warning():
    with pytest.warns(UserWarning):
        assert effective_alpha(0.3, 16) == pytest.approx(5 / 16)
    with pytest.raises(DomainError), warnings.catch_warnings():
        warnings.simplefilter("ignore")
        effective_alpha(0.01, 16)


def test_gershgorin_example():
    inv = gershgorin_check([[2, 1], [1, 2]])
    assert inv.invertible and inv.inv_inf_bound == pytest.approx(1.0)
    assert np.abs(np.linalg.inv([[2, 1], [1, 2]])).max() == pytest.approx(2 / 3)
    assert gershgorin_check([[1, 1], [1, 1]]) == (False, None)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_gershgorin_sound(seed, p):
    rng = np.random.default_rng(seed)
    off = rng.uniform(-1, 1, (p, p))
    off = (off + off.T) / 2
    np.fill_diagonal(off, 0)
    sigma = off + np.diag(np.abs(off).sum(axis=1) + rng.uniform(0.01, 2, p))
    ok, bound = gershgorin_check(sigma)
    assert ok
    assert np.abs(np.linalg.inv(sigma)).max() <= bound * (1 + 1e-12)


def test_field_inverse_bound():
    ok, bound = field_inverse_bound(P11, 10, 2, 0.1, 2.0)
    ups = decay_constants(P11).upsilon
    assert ok and bound == pytest.approx(1 / (10 * (2.0 - ups * 0.1)))
    assert field_inverse_bound(P11, 10, 2, 0.9, 2.0) == (False, None)
