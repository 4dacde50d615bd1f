import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steinpa.synthetic import CommonShock


def test_bound_design():
    d = CommonShock.with_bound(100, 0.05)
    assert d.B == pytest.approx(0.05, rel=1e-12)
    assert d.rho == pytest.approx(0.5153, abs=1e-4)
    assert d.within_offdiag[0] == pytest.approx(0.9541, abs=1e-4)
    assert CommonShock.with_bound(100, math.sqrt(3 / 100)).rho == 0
    with pytest.raises(ValueError):
        CommonShock.with_bound(100, 0.5)
    with pytest.raises(ValueError):
        CommonShock.with_bound(100, 0.01)


@settings(max_examples=50, deadline=None)
@given(m=st.integers(2, 400), frac=st.floats(0.01, 0.99))
def test_with_bound_inverts_B(m, frac):
    lo, hi = math.sqrt(3) / m, math.sqrt(3 / m)
    B = lo + frac * (hi - lo)
    assert CommonShock.with_bound(m, B).B == pytest.approx(B, rel=1e-9)


def test_unit_variance_and_sigma():
    d = CommonShock(m=50, p=3, rho=0.2, tau=0.1)
    S = d.sample(40_000, seed=1)
    emp = np.cov(S, rowvar=False)
    se = np.sqrt((d.sigma**2 + 1) / S.shape[0])
    assert np.all(np.abs(emp - d.sigma) < 4 * se)
    assert np.allclose(np.diag(d.sigma), 1.0)


def test_within_offdiag_against_summand_simulation():
    # build every summand explicitly and sum the pairwise covariances
    m, rho, tau, N = 5, 0.5, 0.3, 200_000
    d = CommonShock(m=m, p=1, rho=rho, tau=tau)
    rng = np.random.default_rng(0)
    U = rng.uniform(-1, 1, (N, m))
    V = rng.uniform(-1, 1, (N, 1))
    V0 = rng.uniform(-1, 1, (N, 1))
    xi = (U + rho * V + tau * V0) / d.scale
    C = np.cov(xi, rowvar=False)
    off = C.sum() - np.trace(C)
    assert off == pytest.approx(d.within_offdiag[0], rel=0.03)
    assert np.abs(xi).max() <= d.B


def test_reproducible():
    d = CommonShock(m=20, p=2, rho=0.1)
    assert np.array_equal(d.sample(100, seed=3), d.sample(100, seed=3))
    assert not np.array_equal(d.sample(100, seed=3), d.sample(100, seed=4))
