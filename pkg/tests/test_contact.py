import numpy as np
import pytest

from steinpa.lattice.decay import DecayFitError
from steinpa.particles.contact import (
    LAMBDA_C_1D,
    ContactParams,
    CylFunction,
    contact_decay_fit,
    contact_simulate,
    telegraph_trajectories,
    trajectory_lag_covariance,
)


def test_cylinder_function():
    f = CylFunction(((0, 1), (5,)), (0.5, 2.0))
    assert f.M_f == 2.5 and f.reach == 5
    assert f([1, 9]) == 0.5 and f([5]) == 2.0 and f([]) == 0
    with pytest.raises(ValueError):
        CylFunction(((0,),), (-1.0,))
    with pytest.raises(ValueError):
        CylFunction(((),))


def test_defaults():
    p = ContactParams(infection_rate=2.0, t=10.0)
    assert p.resolved_burnin() == pytest.approx(max(50, 10 / (2 - LAMBDA_C_1D)))
    assert p.resolved_radius() == 0 + int(np.ceil(4 * (p.resolved_burnin() + 10))) + 1
    with pytest.raises(ValueError):
        ContactParams(interval_radius=3, f_spec=CylFunction.indicator([7]))
    with pytest.raises(ValueError):
        contact_simulate(ContactParams(infection_rate=LAMBDA_C_1D), 2)


def test_zero_infection_rate_dies():
    sm = contact_simulate(ContactParams(infection_rate=0.0, burnin_time=30.0, t=5.0), 20)
    # every site recovers at rate 1 with no reinfection; after 30 time units all are healthy
    assert np.all(sm.values == 0)


def test_window_integral_bounds_and_segments():
    f = CylFunction(((0,), (3, 4)), (1.0, 0.5))
    params = ContactParams(infection_rate=2.0, burnin_time=20.0, t=6.0, f_spec=f, seed=2)
    sm = contact_simulate(params, 40, m=3, keep_trajectories=True)
    assert np.all((sm.values >= 0) & (sm.values <= 6.0 * 1.5 + 1e-12))
    assert np.array_equal(sm.segments.sum(axis=1), sm.values[:, 0])
    for r in (0, 17):
        assert sm.trajectories[r].integrate(0.0, 6.0) == pytest.approx(sm.values[r, 0], abs=1e-10)


def test_thread_invariance():
    params = ContactParams(infection_rate=2.0, burnin_time=10.0, t=4.0, seed=7)
    a = contact_simulate(params, 24, starts=[0.0, 6.0], threads=1, batch=5)
    b = contact_simulate(params, 24, starts=[0.0, 6.0], threads=4, batch=5)
    assert a.equals(b)


def test_supercritical_density_positive():
    sm = contact_simulate(ContactParams(infection_rate=3.0, burnin_time=20.0, t=10.0), 100)
    assert sm.column(0).mean() > 0.5 * 10.0 * 0.5


def test_telegraph_decay_recovered():
    a, b = 1.0, 0.5
    trajs = telegraph_trajectories(a, b, 40.0, 2000, seed=1)
    lc = trajectory_lag_covariance(trajs, np.arange(0, 3.01, 0.5))
    exact = (a * b / (a + b) ** 2) * np.exp(-(a + b) * lc.lags)
    assert np.all(np.abs(lc.cov - exact) < 4 * lc.se + 1e-3)
    fit = contact_decay_fit(trajs)
    assert fit.gamma == pytest.approx(a + b, rel=0.1)
    assert fit.kappa == pytest.approx(a * b / (a + b) ** 2, rel=0.1)


def test_constant_observable_rejected():
    trajs = telegraph_trajectories(0.0, 1.0, 20.0, 50, seed=1)
    with pytest.raises((DecayFitError, ValueError)):
        contact_decay_fit(trajs, min_replicates=10)
    with pytest.raises(ValueError):
        contact_decay_fit(trajs)
