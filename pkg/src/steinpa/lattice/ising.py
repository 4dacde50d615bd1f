"""Heat-bath Glauber sampler for block magnetisations of the Ising model."""
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from numba import njit
from scipy.stats import kendalltau

from .._parallel import ordered_map
from .._rng import next_uniform, stream_key
from ..samples import SampleMatrix
from . import geometry
from .decay import lag_covariance_from_records

# Onsager's value 0.5 * log(1 + sqrt 2): an external standard result used
# only as a configuration guard.
BETA_C_2D = 0.5 * math.log(1 + math.sqrt(2))

_BOUNDARY_VALUE = {"free": 0, "plus": 1, "minus": -1}


@dataclass(frozen=True)
class IsingParams:
    """Finite-box Ising model with nearest-neighbour coupling ``J``.

    ``(beta, h)`` must lie in the uniqueness region: ``h != 0`` or
    ``beta < beta_c``. Only the planar critical point is known to the guard;
    for ``d >= 3`` with ``h = 0`` the caller's assertion is trusted.
    """

    dim: int = 2
    box_side: int = 64
    beta: float = 0.2
    h: float = 0.0
    J: float = 1.0
    boundary: str = "free"
    sweeps_burnin: int = 200
    sweeps_between: int = 5
    seed: int = 0
    chains: int = 8
    max_lag: int = 10

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.J < 0:
            raise ValueError("J must be nonnegative for positive association")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if self.boundary not in _BOUNDARY_VALUE:
            raise ValueError(f"boundary must be one of {sorted(_BOUNDARY_VALUE)}")
        if self.h == 0 and self.dim == 2 and self.beta * self.J >= BETA_C_2D:
            raise ValueError(
                f"beta*J={self.beta * self.J:g} >= beta_c(2)={BETA_C_2D:.4f} at h=0 is outside the uniqueness region"
            )
        if self.chains < 1 or self.sweeps_burnin < 0 or self.sweeps_between < 1:
            raise ValueError("chains >= 1, sweeps_burnin >= 0 and sweeps_between >= 1 required")


def heat_bath_table(beta, J, h, d):
    """``P(spin = +1)`` indexed by neighbour sum ``+ 2d``."""
    s = np.arange(-2 * d, 2 * d + 1)
    return 1.0 / (1.0 + np.exp(-2.0 * beta * (J * s + h)))


@njit(cache=True, nogil=True)
def _sweep(spins, nbr, bval, ptab, st):
    d2 = nbr.shape[1]
    for i in range(spins.size):
        s = 0
        for e in range(d2):
            j = nbr[i, e]
            if j >= 0:
                s += int(spins[j])
            else:
                s += bval
        if next_uniform(st) < ptab[s + d2]:
            spins[i] = 1.0
        else:
            spins[i] = -1.0


@njit(cache=True, nogil=True)
def _run_chain(key, nbr, bval, ptab, burnin, between, blocks, lag_sites, lag_partners,
               out_sums, out_means, out_prods, trace):
    st = np.empty(2, dtype=np.uint64)
    st[0] = key
    st[1] = 0
    n_sites = nbr.shape[0]
    spins = np.empty(n_sites)
    for i in range(n_sites):
        spins[i] = 1.0 if next_uniform(st) < 0.5 else -1.0
    for b in range(burnin):
        _sweep(spins, nbr, bval, ptab, st)
        trace[b] = spins.sum() / n_sites
    mean_buf = np.empty(1)
    for r in range(out_sums.shape[0]):
        for _ in range(between):
            _sweep(spins, nbr, bval, ptab, st)
        for q in range(blocks.shape[0]):
            acc = 0.0
            for k in range(blocks.shape[1]):
                acc += spins[blocks[q, k]]
            out_sums[r, q] = acc
        geometry.lag_products(spins, lag_sites, lag_partners, mean_buf, out_prods[r])
        out_means[r] = mean_buf[0]


def trend_test(trace, level=0.05):
    """Kendall-tau trend test on the second half of a burn-in trace.

    Returns ``(tau, p_value, trending)``.
    """
    half = np.asarray(trace)[len(trace) // 2 :]
    if half.size < 3 or np.ptp(half) == 0:
        return 0.0, 1.0, False
    tau, pval = kendalltau(np.arange(half.size), half)
    return float(tau), float(pval), bool(pval < level)


def _split(total, parts):
    return [total // parts + (1 if c < total % parts else 0) for c in range(parts)]


def ising_sample(params, anchors=None, n=8, replicates=100, margin=None, alpha=None, threads=None):
    """Block magnetisations ``M_k = sum_{i in B_k^n} omega_i`` from Glauber dynamics.

    Replicates are split over ``params.chains`` independent chains; each
    chain burns in for ``sweeps_burnin`` sweeps and then records every
    ``sweeps_between`` sweeps. The chain seeds depend only on
    ``(seed, chain)``, so the output is bit-identical for any thread count.

    Returns a :class:`SampleMatrix` with one column per anchor. Its
    ``lag_cov`` attribute holds axis-aligned spin covariances measured on
    the central half of the box.
    """
    L, d = params.box_side, params.dim
    anchors = [tuple(a) for a in (anchors or [geometry.default_anchor(n, d)])]
    if any(len(a) != d for a in anchors):
        raise geometry.GeometryError(f"anchors must have {d} coordinates")
    used_margin = geometry.resolve_margin(L, n, d, anchors, margin)
    geometry.check_anchor_separation(anchors, n, alpha)
    nbr = geometry.neighbor_table(L, d)
    blocks = np.stack([geometry.block_indices(L, d, a, n) for a in anchors])
    lag_sites, lag_partners = geometry.lag_partners(L, d, params.max_lag)
    ptab = heat_bath_table(params.beta, params.J, params.h, d)
    bval = _BOUNDARY_VALUE[params.boundary]
    n_chains = min(params.chains, replicates)
    counts = _split(replicates, n_chains)

    def chain(c):
        sums = np.empty((counts[c], len(anchors)))
        means = np.empty(counts[c])
        prods = np.empty((counts[c], d, params.max_lag + 1))
        trace = np.empty(params.sweeps_burnin)
        key = stream_key(params.seed, 0x15, c)
        _run_chain(key, nbr, bval, ptab, params.sweeps_burnin, params.sweeps_between, blocks,
                   lag_sites, lag_partners, sums, means, prods, trace)
        return sums, means, prods, trace

    out = ordered_map(chain, range(n_chains), threads)
    sums = np.concatenate([o[0] for o in out])
    means = np.concatenate([o[1] for o in out])
    prods = np.concatenate([o[2] for o in out])
    metadata = {"margin": used_margin, "chains": n_chains, "warnings": []}
    if params.sweeps_burnin >= 6:
        tau, pval, trending = trend_test(np.mean([o[3] for o in out], axis=0))
        metadata["burnin_trend"] = {"tau": tau, "p_value": pval}
        if trending:
            msg = f"burn-in magnetisation still trending (Kendall tau={tau:.3f}, p={pval:.3g})"
            metadata["warnings"].append(msg)
            warnings.warn(msg, stacklevel=2)
    sm = SampleMatrix(
        values=sums,
        model="ising",
        params=dict(asdict(params), n=n, anchors=[list(a) for a in anchors]),
        seed=params.seed,
        columns=[f"M{q}" for q in range(len(anchors))],
        metadata=metadata,
    )
    sm.lag_cov = lag_covariance_from_records(means, prods, d)
    return sm
