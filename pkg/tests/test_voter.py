import math

import numpy as np
import pytest

from steinpa.particles.common import association_check, covariance, segment_cov_sum, variance_rate
from steinpa.particles.voter import (
    VoterParams,
    direct_covariance,
    dual_covariance,
    escape_probability,
    last_exit_moment,
    last_exit_stats,
    origin_trajectory,
    return_probability,
    simulate_last_exit,
    voter_occupation,
)


def test_mean_occupation_is_theta_t():
    params = VoterParams(dim=1, torus_side=64, theta=0.5, t=16.0, seed=3)
    sm = voter_occupation(params, 10_000, batch=512)
    T = sm.column(0)
    se = T.std(ddof=1) / math.sqrt(T.size)
    assert abs(T.mean() - 8.0) < 4 * se
    assert np.all((T >= 0) & (T <= 16))
    assert variance_rate(T, 16.0).value > 0


@pytest.mark.parametrize("theta, expected", [(0.0, 0.0), (1.0, 5.0)])
def test_degenerate_theta(theta, expected):
    sm = voter_occupation(VoterParams(dim=2, torus_side=8, theta=theta, t=5.0), 50)
    assert np.all(sm.values == expected)


def test_segments_add_up_exactly():
    sm = voter_occupation(VoterParams(dim=3, torus_side=5, t=9.0, seed=1), 200, m=6)
    assert sm.segments.shape == (200, 6)
    assert np.array_equal(sm.segments.sum(axis=1), sm.values[:, 0])


def test_graphical_and_forward_agree_in_law():
    params = VoterParams(dim=2, torus_side=6, theta=0.3, s=2.0, t=6.0, seed=4)
    g = voter_occupation(params, 4000).column(0)
    f = voter_occupation(params, 4000, method="forward").column(0)
    se_mean = math.hypot(g.std(ddof=1), f.std(ddof=1)) / math.sqrt(4000)
    assert abs(g.mean() - f.mean()) < 4 * se_mean
    vg, vf = variance_rate(g, 6.0), variance_rate(f, 6.0)
    assert abs(vg.value - vf.value) < 4 * math.hypot(vg.se, vf.se)


def test_reproducible_and_thread_invariant():
    params = VoterParams(dim=4, torus_side=4, t=5.0, seed=8)
    a = voter_occupation(params, 100, starts=[0.0, 7.0], threads=1, batch=16)
    b = voter_occupation(params, 100, starts=[0.0, 7.0], threads=3, batch=16)
    assert a.equals(b)
    assert a.columns == ["T0", "T1"]


def test_origin_trajectory_matches_occupation():
    params = VoterParams(dim=3, torus_side=5, t=7.0, seed=2)
    tr = origin_trajectory(params, replicate=5)
    sm = voter_occupation(params, 6)
    assert tr.integrate(0.0, 7.0) == pytest.approx(sm.values[5, 0], abs=1e-12)


def test_bad_inputs():
    with pytest.raises(ValueError):
        VoterParams(theta=1.5)
    with pytest.raises(ValueError):
        voter_occupation(VoterParams(), 5, method="teleport")
    with pytest.raises(ValueError):
        last_exit_stats(2)


def test_last_exit_convention():
    Ls, esc = simulate_last_exit(7, 50.0, 2000, seed=1)
    # the initial sojourn counts, so every path has L > 0
    assert np.all(Ls > 0) and np.all(Ls <= 50.0)
    assert set(np.unique(esc)) <= {0, 1}


def test_escape_probability_values():
    assert escape_probability(3) == pytest.approx(0.6595, abs=5e-4)
    assert escape_probability(7) == pytest.approx(0.9142, abs=5e-4)
    assert return_probability(0.0, 5) == pytest.approx(1.0)


def test_last_exit_moments_match_quadrature():
    st = last_exit_stats(7, horizon=100, replicates=20_000, seed=0)
    assert abs(st.EL - last_exit_moment(7, 1, 100)) < 4 * st.EL_se
    assert abs(st.EL2 - last_exit_moment(7, 2, 100)) < 4 * st.EL2_se
    assert st.finite_second_moment


def test_last_exit_second_moment_stable_in_horizon():
    a = last_exit_stats(7, horizon=50, replicates=20_000, seed=5)
    b = last_exit_stats(7, horizon=100, replicates=20_000, seed=6)
    assert abs(a.EL2 - b.EL2) < 4 * math.hypot(a.EL2_se, b.EL2_se)


def test_dual_variance_at_equal_times():
    # u = v: P(L_{2u} > 0) = 1, so the dual gives theta(1 - theta)
    est = dual_covariance(0.3, 2.0, 2.0, 5, 500, seed=1)
    assert est.value == pytest.approx(0.21) and est.se == 0
    assert dual_covariance(0.3, 0.0, 4.0, 5, 10).value == 0


def test_dual_matches_direct():
    dual = dual_covariance(0.5, 1.0, 2.0, 2, 20_000, seed=2)
    direct = direct_covariance(0.5, 1.0, 2.0, 2, 16, 20_000, seed=3)
    assert abs(dual.value - direct.value) < 4 * math.hypot(dual.se, direct.se)


def test_covariance_helpers():
    rng = np.random.default_rng(0)
    z = rng.standard_normal(5000)
    y = np.column_stack([z + rng.standard_normal(5000) for _ in range(3)])
    # three segments sharing z: each off-diagonal covariance is 1, six ordered pairs
    est = segment_cov_sum(y)
    assert abs(est.value - 6.0) < 4 * est.se
    c = covariance(y[:, 0], y[:, 1])
    assert abs(c.value - 1.0) < 4 * c.se
    checks = association_check(y, pairs=10, seed=1)
    assert len(checks) == 10
    assert all(e.value > -4 * e.se for _, e in checks)
    with pytest.raises(ValueError):
        variance_rate(np.ones(10), 1.0)
