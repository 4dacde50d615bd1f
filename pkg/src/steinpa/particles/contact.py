"""One-dimensional contact process on ``{-L..L}`` and its occupation functionals.

Infected sites recover at rate 1 and infect each neighbour at rate
``infection_rate``. The simulation is a Gillespie run over the infected
set: an event picks a uniform infected site, which then recovers or tries
to infect its left or right neighbour. Sites outside the interval never
become infected. Runs start from full occupancy and are burnt in before
the observation window, approximating the upper invariant measure.
"""
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np
from numba import njit

from .._parallel import ordered_map
from .._rng import next_exponential, next_index, next_uniform, numpy_generator, stream_key
from ..lattice.decay import DecayFitError, LagCovariance, fit_envelope, lag_covariance_from_records
from ..samples import SampleMatrix, Trajectory
from ._steps import fill_windows

# Numerical estimate of the one-dimensional critical rate from the
# literature; it only sets the default burn-in length.
LAMBDA_C_1D = 1.649


@dataclass(frozen=True)
class CylFunction:
    """``f(eta) = sum_k w_k 1(eta meets B_k)`` with ``w_k >= 0``.

    Nonnegative weights make ``f`` increasing; ``sup |f| = sum_k w_k``.
    """

    base_sets: tuple
    weights: tuple = None

    def __post_init__(self):
        sets = tuple(tuple(sorted({int(x) for x in b})) for b in self.base_sets)
        weights = tuple(float(w) for w in (self.weights or [1.0] * len(sets)))
        if not sets or any(len(b) == 0 for b in sets):
            raise ValueError("need at least one nonempty base set")
        if len(weights) != len(sets):
            raise ValueError("one weight per base set required")
        if any(w < 0 for w in weights) or not any(w > 0 for w in weights):
            raise ValueError("weights must be nonnegative and not all zero")
        object.__setattr__(self, "base_sets", sets)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def indicator(cls, base_set):
        """``1(eta meets B)``."""
        return cls((tuple(base_set),))

    @property
    def M_f(self):
        return float(sum(self.weights))

    @property
    def reach(self):
        """Largest ``|x|`` over all base sites."""
        return max(abs(x) for b in self.base_sets for x in b)

    def __call__(self, infected):
        s = set(infected)
        return sum(w for b, w in zip(self.base_sets, self.weights) if s.intersection(b))

    def to_dict(self):
        return {"base_sets": [list(b) for b in self.base_sets], "weights": list(self.weights)}


@dataclass(frozen=True)
class ContactParams:
    """Contact process parameters; ``None`` fields take their documented defaults.

    ``burnin_time`` defaults to ``max(50, 10 / |lambda - 1.649|)`` and
    ``interval_radius`` to ``reach(f) + ceil(2 lambda (T_b + s + t))`` so
    that an infection front moving at speed ``2 lambda`` cannot carry the
    boundary's influence to the base sets.
    """

    infection_rate: float = 2.0
    interval_radius: int = None
    burnin_time: float = None
    s: float = 0.0
    t: float = 16.0
    f_spec: CylFunction = field(default_factory=lambda: CylFunction.indicator([0]))
    seed: int = 0

    def __post_init__(self):
        if self.infection_rate < 0:
            raise ValueError("infection_rate must be nonnegative")
        if self.s < 0 or not self.t > 0:
            raise ValueError("s >= 0 and t > 0 required")
        if self.burnin_time is not None and not self.burnin_time > 0:
            raise ValueError("burnin_time must be positive")
        if self.interval_radius is not None:
            if self.interval_radius < 1:
                raise ValueError("interval_radius must be >= 1")
            if self.f_spec.reach > self.interval_radius:
                raise ValueError(f"base set reaches |x|={self.f_spec.reach} outside -L..L with L={self.interval_radius}")

    def resolved_burnin(self):
        if self.burnin_time is not None:
            return float(self.burnin_time)
        gap = abs(self.infection_rate - LAMBDA_C_1D)
        return max(50.0, 10.0 / gap) if gap > 0 else math.inf

    def resolved_radius(self, horizon=None):
        if self.interval_radius is not None:
            return int(self.interval_radius)
        horizon = self.s + self.t if horizon is None else horizon
        run = self.resolved_burnin() + horizon
        return int(self.f_spec.reach + math.ceil(2 * self.infection_rate * run)) + 1


def _membership(f, L):
    """CSR lists of base-set ids per site index ``x + L``."""
    per_site = [[] for _ in range(2 * L + 1)]
    for k, b in enumerate(f.base_sets):
        for x in b:
            per_site[x + L].append(k)
    ptr = np.zeros(2 * L + 2, dtype=np.int64)
    ptr[1:] = np.cumsum([len(v) for v in per_site])
    idx = np.array([k for v in per_site for k in v], dtype=np.int64)
    sizes = np.array([len(b) for b in f.base_sets], dtype=np.int64)
    return ptr, idx, sizes


@njit(cache=True, nogil=True)
def _contact_path(key, n_sites, lam, t_burn, t_end, ptr, idx, sizes, weights, times, values):
    """Run from full occupancy; record ``f`` on ``[t_burn, t_end]`` relative to ``t_burn``."""
    st = np.empty(2, dtype=np.uint64)
    st[0] = key
    st[1] = 0
    infected = np.ones(n_sites, dtype=np.int8)
    pos = np.arange(n_sites)
    lst = np.arange(n_sites)
    count = n_sites
    hits = sizes.copy()
    f = 0.0
    for k in range(weights.size):
        f += weights[k]
    total = 1.0 + 2.0 * lam
    clock = 0.0
    recording = False
    k = 0
    while count > 0:
        clock += next_exponential(st, count * total)
        if clock > t_end:
            break
        if not recording and clock > t_burn:
            times[0] = 0.0
            values[0] = f
            k = 1
            recording = True
        i = lst[next_index(st, count)]
        u = next_uniform(st) * total
        changed = False
        if u < 1.0:
            # recovery: swap-remove i from the infected list
            infected[i] = 0
            last = lst[count - 1]
            lst[pos[i]] = last
            pos[last] = pos[i]
            count -= 1
            for q in range(ptr[i], ptr[i + 1]):
                b = idx[q]
                hits[b] -= 1
                if hits[b] == 0:
                    changed = True
        else:
            j = i - 1 if u < 1.0 + lam else i + 1
            if j < 0 or j >= n_sites or infected[j]:
                continue
            infected[j] = 1
            lst[count] = j
            pos[j] = count
            count += 1
            for q in range(ptr[j], ptr[j + 1]):
                b = idx[q]
                hits[b] += 1
                if hits[b] == 1:
                    changed = True
        if changed:
            f = 0.0
            for b in range(weights.size):
                if hits[b] > 0:
                    f += weights[b]
            if recording:
                if k == times.size:
                    nt = np.empty(2 * k)
                    nv = np.empty(2 * k)
                    nt[:k] = times
                    nv[:k] = values
                    times, values = nt, nv
                times[k] = clock - t_burn
                values[k] = f
                k += 1
    if not recording:
        times[0] = 0.0
        values[0] = f
        k = 1
    return times, values, k


@njit(cache=True, nogil=True)
def _contact_batch(keys, n_sites, lam, t_burn, t_end, ptr, idx, sizes, weights, starts, t, m,
                   out_T, out_seg, keep, kept_times, kept_values, kept_len):
    times = np.empty(256)
    values = np.empty(256)
    for r in range(keys.size):
        times, values, k = _contact_path(keys[r], n_sites, lam, t_burn, t_end, ptr, idx, sizes, weights,
                                         times, values)
        fill_windows(times, values, k, starts, t, m, out_T[r], out_seg[r])
        if keep:
            kept_len[r] = k
            if k > kept_times.shape[1]:
                kept_len[r] = -k
            else:
                kept_times[r, :k] = times[:k]
                kept_values[r, :k] = values[:k]


def contact_simulate(params, replicates, m=1, starts=None, keep_trajectories=False, record_until=None,
                     threads=None, batch=16):
    """``D_{s,f}^t = int_s^{s+t} f(zeta(u)) du`` after burn-in, one per replicate.

    Parameters
    ----------
    params : ContactParams
    replicates : int
    m : int
        Segments for the first window; see ``.segments``.
    starts : sequence of float, optional
        Window starts (after burn-in) for multivariate runs; defaults to
        ``[params.s]``.
    keep_trajectories : bool
        Attach each replicate's ``f`` path on ``[0, max(starts) + t]`` as
        :class:`Trajectory` objects in ``.trajectories``.
    record_until : float, optional
        Keep running (and recording) past the last window up to this time,
        so that decay fits see long enough paths. The window integrals do
        not depend on it except through the default interval radius.
    """
    starts = np.asarray([params.s] if starts is None else starts, dtype=float)
    if starts.ndim != 1 or starts.size < 1 or np.any(starts < 0):
        raise ValueError("starts must be a nonempty list of nonnegative times")
    if m < 1:
        raise ValueError("m must be >= 1")
    horizon = float(starts.max() + params.t)
    if record_until is not None:
        horizon = max(horizon, float(record_until))
    t_burn = params.resolved_burnin()
    if not math.isfinite(t_burn):
        raise ValueError("burn-in length is unbounded at the critical rate; set burnin_time")
    L = params.resolved_radius(horizon)
    if params.f_spec.reach > L:
        raise ValueError("base set outside the simulated interval")
    ptr, idx, sizes = _membership(params.f_spec, L)
    weights = np.array(params.f_spec.weights)
    keys = np.array([stream_key(params.seed, 0xC0, r) for r in range(replicates)], dtype=np.uint64)
    p = starts.size

    def run(span):
        a, b = span
        T = np.empty((b - a, p))
        seg = np.empty((b - a, m))
        cap = 4096 if keep_trajectories else 1
        kt = np.empty((b - a, cap))
        kv = np.empty((b - a, cap))
        kl = np.zeros(b - a, dtype=np.int64)
        _contact_batch(keys[a:b], 2 * L + 1, float(params.infection_rate), t_burn, t_burn + horizon,
                       ptr, idx, sizes, weights, starts, float(params.t), m, T, seg,
                       keep_trajectories, kt, kv, kl)
        trajs = []
        if keep_trajectories:
            for r in range(b - a):
                if kl[r] < 0:
                    # rerun the overflowing replicate alone with room to spare
                    times, values, k = _contact_path(keys[a + r], 2 * L + 1, float(params.infection_rate), t_burn,
                                                     t_burn + horizon, ptr, idx, sizes, weights,
                                                     np.empty(-kl[r]), np.empty(-kl[r]))
                    trajs.append(Trajectory(times[:k], values[:k], horizon))
                else:
                    trajs.append(Trajectory(kt[r, : kl[r]], kv[r, : kl[r]], horizon))
        return T, seg, trajs

    spans = [(a, min(a + batch, replicates)) for a in range(0, replicates, batch)]
    out = ordered_map(run, spans, threads)
    record = dict(asdict(params), m=m, starts=starts.tolist(), interval_radius=L, burnin_time=t_burn)
    record["f_spec"] = params.f_spec.to_dict()
    return SampleMatrix(
        values=np.concatenate([o[0] for o in out]),
        model="contact",
        params=record,
        seed=params.seed,
        columns=[f"D{j}" for j in range(p)],
        metadata={"warnings": [], "M_f": params.f_spec.M_f},
        segments=np.concatenate([o[1] for o in out]),
        trajectories=[tr for o in out for tr in o[2]] if keep_trajectories else None,
    )


# ---------------------------------------------------------------------------
# time covariances of the observable


def trajectory_lag_covariance(trajectories, lags, origins=None):
    """``Cov(f(zeta(u)), f(zeta(u + r)))`` for each lag ``r``, pooled over origins ``u``.

    Parameters
    ----------
    trajectories : list of Trajectory
        Independent stationary paths sharing a start and end.
    lags : array of float
        Lag grid; should start at 0.
    origins : array of float, optional
        Time origins; defaults to unit spacing over the span that keeps
        ``origin + max(lags)`` inside every path.
    """
    lags = np.asarray(lags, dtype=float)
    t0 = max(tr.times[0] for tr in trajectories)
    t1 = min(tr.end for tr in trajectories)
    if origins is None:
        origins = np.arange(t0, t1 - lags.max(), 1.0)
    origins = np.asarray(origins, dtype=float)
    if origins.size == 0 or origins.min() < t0 or origins.max() + lags.max() > t1:
        raise ValueError("origins and lags must fit inside the trajectories")
    N = len(trajectories)
    means = np.empty(N)
    prods = np.empty((N, 1, lags.size))
    probe = origins[:, None] + lags[None, :]
    for r, tr in enumerate(trajectories):
        vals = tr.value_at(probe)
        means[r] = vals[:, 0].mean()
        prods[r, 0] = (vals[:, :1] * vals).mean(axis=0)
    lc = lag_covariance_from_records(means, prods, 1)
    return LagCovariance(lags, lc.cov, lc.se, 1)


class ContactDecay(NamedTuple):
    kappa: float
    gamma: float


def contact_decay_fit(trajectories, lags=None, origins=None, noise_sigmas=8.0, min_replicates=1000):
    """Fit ``|Cov(f(zeta(s)), f(zeta(r)))| <= kappa exp(-gamma |s - r|)``.

    Uses the same noise-floor rule and dominating intercept as the lattice
    envelope fit. Returns ``(kappa, gamma)``.
    """
    if len(trajectories) < min_replicates:
        raise ValueError(f"need at least {min_replicates} trajectories")
    if lags is None:
        lags = np.arange(0.0, 8.01, 0.5)
    lc = trajectory_lag_covariance(trajectories, lags, origins)
    if lc.cov[0] <= 0:
        raise DecayFitError("observable has no variance")
    kappa, gamma, _, _ = fit_envelope(lc.lags, lc.cov, lc.se, noise_sigmas)
    return ContactDecay(kappa, gamma)


def telegraph_trajectories(rate_up, rate_down, horizon, replicates, seed=0):
    """Stationary two-state (0/1) Markov paths; ``Cov`` at lag r is ``pq e^{-(a+b) r}``.

    A synthetic observable with a known exponential envelope, used to check
    the decay fit.
    """
    if rate_up < 0 or rate_down < 0 or rate_up + rate_down == 0:
        raise ValueError("rates must be nonnegative and not both zero")
    rng = numpy_generator(seed, 0x7E1)
    p_up = rate_up / (rate_up + rate_down)
    out = []
    for _ in range(replicates):
        state = float(rng.random() < p_up)
        times, values = [0.0], [state]
        clock = 0.0
        while True:
            leave = rate_down if state else rate_up
            if leave == 0:
                break
            clock += rng.exponential(1.0 / leave)
            if clock >= horizon:
                break
            state = 1.0 - state
            times.append(clock)
            values.append(state)
        out.append(Trajectory(times, values, horizon))
    return out
