"""Voter model on a periodic torus and its coalescing random walk dual.

Each site holds a Poisson clock of rate 1; when it rings the site copies
the opinion of a uniformly chosen nearest neighbour, so a site flips at
rate ``(1/2d) * #disagreeing neighbours``. All clocks are drawn from
counter-based streams keyed by ``(replicate, site)``, which makes two
equivalent samplers available:

* the graphical (backward) sampler traces the ancestry of the origin's
  opinion back to time zero and only ever touches the sites on those
  ancestral lines;
* the forward sampler runs every clock on the whole torus.

Occupation-time integrals are exact sums of value times duration; no time
grid is involved.
"""
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from numba import njit
from scipy.integrate import quad
from scipy.special import ive

from .._parallel import ordered_map
from .._rng import next_exponential, next_index, next_uniform, stream_key, subkey
from ..samples import SampleMatrix, Trajectory
from ._steps import fill_windows


@dataclass(frozen=True)
class VoterParams:
    """Voter model on the torus ``(Z / L)^d`` with Bernoulli(theta) initial opinions."""

    dim: int = 7
    torus_side: int = 5
    theta: float = 0.5
    s: float = 0.0
    t: float = 16.0
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1 or self.torus_side < 2:
            raise ValueError("dim >= 1 and torus_side >= 2 required")
        if not 0 <= self.theta <= 1:
            raise ValueError("theta must lie in [0, 1]")
        if self.s < 0 or not self.t > 0:
            raise ValueError("s >= 0 and t > 0 required")

    @property
    def n_sites(self):
        return self.torus_side**self.dim


def torus_strides(L, d):
    return np.array([L ** (d - 1 - q) for q in range(d)], dtype=np.int64)


@njit(cache=True, inline="always")
def _torus_neighbor(x, e, L, strides):
    q = e // 2
    st = strides[q]
    c = (x // st) % L
    if e % 2 == 0:
        return x + st if c + 1 < L else x - (L - 1) * st
    return x - st if c >= 1 else x + (L - 1) * st


@njit(cache=True, inline="always")
def _initial_opinion(key, x, theta):
    st = np.empty(2, dtype=np.uint64)
    st[0] = subkey(key, 2 * x + 1)
    st[1] = 0
    return 1.0 if next_uniform(st) < theta else 0.0


@njit(cache=True)
def _last_vote_before(key, x, u, n_dirs):
    """Time and direction of the last clock ring of site ``x`` strictly before ``u``."""
    st = np.empty(2, dtype=np.uint64)
    st[0] = subkey(key, 2 * x)
    st[1] = 0
    tau = 0.0
    last_tau = -1.0
    last_dir = -1
    while True:
        tau += next_exponential(st, 1.0)
        if tau >= u:
            break
        last_dir = next_index(st, n_dirs)
        last_tau = tau
    return last_tau, last_dir


@njit(cache=True)
def _opinion(key, x, u, L, strides, theta):
    """``eta_u(x)`` by following the ancestral line of ``(x, u)`` back to time 0."""
    n_dirs = 2 * strides.size
    while True:
        tau, e = _last_vote_before(key, x, u, n_dirs)
        if tau < 0:
            return _initial_opinion(key, x, theta)
        x = _torus_neighbor(x, e, L, strides)
        u = tau


@njit(cache=True)
def _origin_path(key, t0, t1, L, strides, theta, times, values):
    """Opinion of the origin on ``[t0, t1]`` as a step function.

    Fills ``times``/``values`` (growing them when needed) and returns the
    arrays together with the number of steps.
    """
    n_dirs = 2 * strides.size
    times[0] = t0
    values[0] = _opinion(key, 0, t0, L, strides, theta)
    k = 1
    st = np.empty(2, dtype=np.uint64)
    st[0] = subkey(key, 0)
    st[1] = 0
    tau = 0.0
    while True:
        tau += next_exponential(st, 1.0)
        if tau > t1:
            break
        e = next_index(st, n_dirs)
        if tau <= t0:
            continue
        v = _opinion(key, _torus_neighbor(0, e, L, strides), tau, L, strides, theta)
        if v != values[k - 1]:
            if k == times.size:
                nt = np.empty(2 * k)
                nv = np.empty(2 * k)
                nt[:k] = times
                nv[:k] = values
                times, values = nt, nv
            times[k] = tau
            values[k] = v
            k += 1
    return times, values, k


@njit(cache=True, nogil=True)
def _graphical_batch(keys, L, strides, theta, starts, t, m, out_T, out_seg):
    t0 = starts.min()
    t1 = starts.max() + t
    times = np.empty(64)
    values = np.empty(64)
    for r in range(keys.size):
        times, values, k = _origin_path(keys[r], t0, t1, L, strides, theta, times, values)
        fill_windows(times, values, k, starts, t, m, out_T[r], out_seg[r])


@njit(cache=True, nogil=True)
def _forward_batch(keys, L, strides, theta, t_end, probe_times, starts, t, m, out_probe, out_T, out_seg):
    """Uniformised forward run: a clock rings on the torus at total rate ``L^d``."""
    n_sites = L**strides.size
    n_dirs = 2 * strides.size
    state = np.empty(n_sites)
    times = np.empty(64)
    values = np.empty(64)
    for r in range(keys.size):
        st = np.empty(2, dtype=np.uint64)
        st[0] = keys[r]
        st[1] = 0
        for x in range(n_sites):
            state[x] = 1.0 if next_uniform(st) < theta else 0.0
        times[0] = 0.0
        values[0] = state[0]
        k = 1
        p = 0
        clock = 0.0
        while True:
            clock += next_exponential(st, float(n_sites))
            while p < probe_times.size and probe_times[p] < clock:
                out_probe[r, p] = state[0]
                p += 1
            if clock > t_end:
                break
            x = next_index(st, n_sites)
            e = next_index(st, n_dirs)
            y = _torus_neighbor(x, e, L, strides)
            if state[x] != state[y]:
                state[x] = state[y]
                if x == 0:
                    if k == times.size:
                        nt = np.empty(2 * k)
                        nv = np.empty(2 * k)
                        nt[:k] = times
                        nv[:k] = values
                        times, values = nt, nv
                    times[k] = clock
                    values[k] = state[0]
                    k += 1
        while p < probe_times.size:
            out_probe[r, p] = state[0]
            p += 1
        if starts.size:
            fill_windows(times, values, k, starts, t, m, out_T[r], out_seg[r])


def _batches(n, size):
    return [(a, min(a + size, n)) for a in range(0, n, size)]


def voter_occupation(params, replicates, m=1, starts=None, method="graphical", threads=None, batch=64):
    """Occupation times ``T_s^t`` of the origin, one per replicate.

    Parameters
    ----------
    params : VoterParams
    replicates : int
    m : int
        Number of equal segments the first window is split into; the
        segment integrals are returned in ``.segments`` and the first column
        is their sum.
    starts : sequence of float, optional
        Window start times ``s_1, ..., s_p`` for a multivariate run; defaults
        to ``[params.s]``.
    method : {"graphical", "forward"}
        Backward ancestral tracing or a full forward run; both realise the
        same process.
    """
    starts = np.asarray([params.s] if starts is None else starts, dtype=float)
    if starts.ndim != 1 or starts.size < 1 or np.any(starts < 0):
        raise ValueError("starts must be a nonempty list of nonnegative times")
    if m < 1:
        raise ValueError("m must be >= 1")
    L, d = params.torus_side, params.dim
    strides = torus_strides(L, d)
    tag = 0x70 if method == "graphical" else 0x71
    keys = np.array([stream_key(params.seed, tag, r) for r in range(replicates)], dtype=np.uint64)
    p = starts.size

    def run(span):
        a, b = span
        T = np.empty((b - a, p))
        seg = np.empty((b - a, m))
        if method == "graphical":
            _graphical_batch(keys[a:b], L, strides, float(params.theta), starts, float(params.t), m, T, seg)
        elif method == "forward":
            probe = np.empty((b - a, 0))
            _forward_batch(keys[a:b], L, strides, float(params.theta), float(starts.max() + params.t),
                           np.empty(0), starts, float(params.t), m, probe, T, seg)
        else:
            raise ValueError(f"unknown method {method!r}")
        return T, seg

    out = ordered_map(run, _batches(replicates, batch), threads)
    return SampleMatrix(
        values=np.concatenate([o[0] for o in out]),
        model="voter",
        params=dict(asdict(params), m=m, starts=starts.tolist(), method=method),
        seed=params.seed,
        columns=[f"T{j}" for j in range(p)],
        metadata={"warnings": []},
        segments=np.concatenate([o[1] for o in out]),
    )


def origin_trajectory(params, replicate=0, method="graphical"):
    """The origin's opinion on ``[s, s+t]`` for one replicate as a :class:`Trajectory`."""
    L, d = params.torus_side, params.dim
    strides = torus_strides(L, d)
    key = stream_key(params.seed, 0x70, replicate)
    times, values, k = _origin_path(key, float(params.s), float(params.s + params.t), L, strides,
                                    float(params.theta), np.empty(64), np.empty(64))
    return Trajectory(times[:k], values[:k], params.s + params.t)


def opinions_at(params, probe_times, replicates, threads=None, batch=64):
    """``eta_u(0)`` at each probe time by forward simulation, shape ``(N, len(probe_times))``."""
    probe_times = np.sort(np.asarray(probe_times, dtype=float))
    L, d = params.torus_side, params.dim
    strides = torus_strides(L, d)
    keys = np.array([stream_key(params.seed, 0x72, r) for r in range(replicates)], dtype=np.uint64)

    def run(span):
        a, b = span
        probe = np.empty((b - a, probe_times.size))
        _forward_batch(keys[a:b], L, strides, float(params.theta), float(probe_times.max()), probe_times,
                       np.empty(0), 1.0, 1, probe, np.empty((b - a, 0)), np.empty((b - a, 1)))
        return probe

    return np.concatenate(ordered_map(run, _batches(replicates, batch), threads))


# ---------------------------------------------------------------------------
# random walk dual


@njit(cache=True, nogil=True)
def _walk_last_exit(keys, d, H, out_L, out_escaped):
    """Rate-1 simple random walks from the origin up to time ``H``.

    ``out_L`` receives ``L_H = sup{s <= H: Y_s = 0}``; an origin sojourn
    ``[a, b)`` contributes ``min(b, H)``. ``out_escaped`` is 1 when no
    sojourn meets ``[1, H]``.
    """
    pos = np.zeros(d, dtype=np.int64)
    for r in range(keys.size):
        st = np.empty(2, dtype=np.uint64)
        st[0] = keys[r]
        st[1] = 0
        pos[:] = 0
        at_origin = True
        clock = 0.0
        last = 0.0
        visited = False
        while True:
            clock += next_exponential(st, 1.0)
            if clock >= H:
                if at_origin:
                    last = H
                    if H > 1.0:
                        visited = True
                break
            if at_origin:
                last = clock
                if clock > 1.0:
                    visited = True
            e = next_index(st, 2 * d)
            if e % 2 == 0:
                pos[e // 2] += 1
            else:
                pos[e // 2] -= 1
            at_origin = True
            for q in range(d):
                if pos[q] != 0:
                    at_origin = False
                    break
        out_L[r] = last
        out_escaped[r] = 0 if visited else 1


def simulate_last_exit(dim, horizon, replicates, seed=0, threads=None, batch=4096):
    """Samples of ``L_H`` and the escape indicator for ``replicates`` walks."""
    keys = np.array([stream_key(seed, 0x7A, dim, r) for r in range(replicates)], dtype=np.uint64)

    def run(span):
        a, b = span
        Ls = np.empty(b - a)
        esc = np.empty(b - a, dtype=np.int64)
        _walk_last_exit(keys[a:b], dim, float(horizon), Ls, esc)
        return Ls, esc

    out = ordered_map(run, _batches(replicates, batch), threads)
    return np.concatenate([o[0] for o in out]), np.concatenate([o[1] for o in out])


@dataclass
class CovEstimate:
    value: float
    se: float

    def to_dict(self):
        return asdict(self)


def dual_covariance(theta, u, v, dim, replicates, seed=0):
    """``Cov(eta_u(0), eta_v(0))`` as ``theta(1-theta) P(L_{u+v} > v-u)``.

    The probability is estimated from ``replicates`` simulated walks.
    """
    if not 0 <= u <= v:
        raise ValueError("need 0 <= u <= v")
    q = theta * (1 - theta)
    if u == 0:
        # L_v <= v always, so the event is empty
        return CovEstimate(0.0, 0.0)
    Ls, _ = simulate_last_exit(dim, u + v, replicates, seed)
    hit = (Ls > v - u).astype(float)
    return CovEstimate(q * hit.mean(), q * hit.std(ddof=1) / math.sqrt(replicates))


def direct_covariance(theta, u, v, dim, torus_side, replicates, seed=0):
    """Empirical ``Cov(eta_u(0), eta_v(0))`` from forward voter runs on a torus."""
    params = VoterParams(dim=dim, torus_side=torus_side, theta=theta, t=1.0, seed=seed)
    x = opinions_at(params, [u, v], replicates)
    a, b = x[:, 0], x[:, 1]
    if u == v:
        b = a
    ma, mb = a.mean(), b.mean()
    cov = float(np.mean((a - ma) * (b - mb)) * replicates / (replicates - 1))
    infl = (a - ma) * (b - mb)
    return CovEstimate(cov, float(infl.std(ddof=1) / math.sqrt(replicates)))


@dataclass
class LastExitStats:
    """Moments of the last exit time ``L_H`` with their SEs.

    ``EL``/``EL2`` are truncated at the horizon, so they underestimate
    ``E[L]``/``E[L^2]``. ``note`` records the fraction of walks sitting at
    the origin at the horizon (``L_H = H``), a rough gauge of that truncation.
    """

    horizon: float
    dim: int
    samples: np.ndarray = field(repr=False)
    EL: float = 0.0
    EL2: float = 0.0
    EL_se: float = 0.0
    EL2_se: float = 0.0
    gamma_d: float = 0.0
    finite_second_moment: bool = False
    note: str = ""

    def to_dict(self):
        d = asdict(self)
        d.pop("samples")
        return d


def last_exit_stats(dim, horizon=100.0, replicates=20000, seed=0):
    """Estimate ``E[L_H]``, ``E[L_H^2]`` and ``gamma_d`` by simulation.

    ``gamma_d`` is estimated as the fraction of walks with no origin visit
    in ``[1, H]``.
    """
    if dim < 3:
        raise ValueError("the walk is recurrent for d < 3, so L is infinite")
    Ls, esc = simulate_last_exit(dim, horizon, replicates, seed)
    n = Ls.size
    L2 = Ls * Ls
    at_h = float(np.mean(Ls >= horizon))
    return LastExitStats(
        horizon=float(horizon),
        dim=dim,
        samples=Ls,
        EL=float(Ls.mean()),
        EL2=float(L2.mean()),
        EL_se=float(Ls.std(ddof=1) / math.sqrt(n)),
        EL2_se=float(L2.std(ddof=1) / math.sqrt(n)),
        gamma_d=float(esc.mean()),
        finite_second_moment=dim >= 7,
        note=f"moments truncated at H={horizon:g}; fraction at the origin at H: {at_h:.3g}",
    )


def return_probability(s, dim):
    """``P(Y_s = 0)`` for the rate-1 walk: each coordinate is a rate-1/d walk."""
    return ive(0, np.asarray(s, dtype=float) / dim) ** dim


def escape_probability(dim):
    """Probability that the walk, having just left the origin, never returns.

    Equals ``1 / G`` with ``G = int_0^inf P(Y_s = 0) ds`` the expected time
    spent at the origin; this is the constant that turns ``P(Y_s = 0) ds``
    into the density of ``L``.
    """
    if dim < 3:
        return 0.0
    g, _ = quad(lambda s: return_probability(s, dim), 0, np.inf, limit=400)
    return 1.0 / g


def last_exit_moment(dim, power=2, horizon=np.inf):
    """``E[L^power]`` from the density ``escape * P(Y_s = 0)`` of ``L``.

    With a finite ``horizon`` the integral is cut at ``H``, which
    approximates the moment of ``L_H``.
    """
    val, _ = quad(lambda s: s**power * return_probability(s, dim), 0, horizon, limit=400)
    return escape_probability(dim) * val
