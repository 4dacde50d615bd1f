"""Bond percolation in a finite box with union-find cluster labelling."""
from dataclasses import asdict, dataclass

import numpy as np
from numba import njit

from .._parallel import ordered_map
from .._rng import next_uniform, stream_key
from ..samples import SampleMatrix
from . import geometry
from .decay import lag_covariance_from_records

# Kesten's bond threshold on Z^2; an external standard result, used only
# as a configuration guard.
THETA_C_2D = 0.5


@dataclass(frozen=True)
class PercolationParams:
    """Each nearest-neighbour bond of the box is open with probability ``theta``.

    The event ``|C(x)| = infinity`` is replaced by "the open cluster of
    ``x`` reaches the box boundary".
    """

    dim: int = 2
    box_side: int = 128
    theta: float = 0.7
    seed: int = 0
    max_lag: int = 10

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("bond percolation needs dim >= 2")
        if not 0 <= self.theta <= 1:
            raise ValueError("theta must lie in [0, 1]")
        if self.dim == 2 and 0 < self.theta <= THETA_C_2D:
            raise ValueError(f"theta={self.theta} is not supercritical (theta_c(2) = {THETA_C_2D})")


@njit(cache=True, inline="always")
def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


@njit(cache=True, inline="always")
def _union(parent, size, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra == rb:
        return
    if size[ra] < size[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    size[ra] += size[rb]


@njit(cache=True, nogil=True)
def _touch_field(key, nbr, theta, boundary, parent, size, touch, field):
    """Fill ``field`` with 1 where the cluster reaches the boundary, else 0."""
    st = np.empty(2, dtype=np.uint64)
    st[0] = key
    st[1] = 0
    n_sites = nbr.shape[0]
    d = nbr.shape[1] // 2
    for i in range(n_sites):
        parent[i] = i
        size[i] = 1
        touch[i] = 0
    # bonds in the +e_q direction, in site order
    for i in range(n_sites):
        for q in range(d):
            j = nbr[i, 2 * q]
            if j >= 0 and next_uniform(st) < theta:
                _union(parent, size, i, j)
    for k in range(boundary.size):
        touch[_find(parent, boundary[k])] = 1
    for i in range(n_sites):
        field[i] = touch[_find(parent, i)]


@njit(cache=True, nogil=True)
def _run_replicates(keys, nbr, theta, boundary, blocks, lag_sites, lag_partners, out_sums, out_means, out_prods):
    n_sites = nbr.shape[0]
    parent = np.empty(n_sites, dtype=np.int64)
    size = np.empty(n_sites, dtype=np.int64)
    touch = np.empty(n_sites, dtype=np.int8)
    field = np.empty(n_sites)
    mean_buf = np.empty(1)
    for r in range(keys.size):
        _touch_field(keys[r], nbr, theta, boundary, parent, size, touch, field)
        for q in range(blocks.shape[0]):
            acc = 0.0
            for k in range(blocks.shape[1]):
                acc += field[blocks[q, k]]
            out_sums[r, q] = acc
        geometry.lag_products(field, lag_sites, lag_partners, mean_buf, out_prods[r])
        out_means[r] = mean_buf[0]


def percolation_sample(params, anchors=None, n=8, replicates=100, margin=None, alpha=None,
                       threads=None, batch=64):
    """Counts ``U_k`` of block sites joined to the box boundary by open paths.

    Replicate ``r`` uses the stream ``(seed, r)``; batches of replicates are
    run on the thread pool and reassembled in order.
    """
    L, d = params.box_side, params.dim
    anchors = [tuple(a) for a in (anchors or [geometry.default_anchor(n, d)])]
    if any(len(a) != d for a in anchors):
        raise geometry.GeometryError(f"anchors must have {d} coordinates")
    used_margin = geometry.resolve_margin(L, n, d, anchors, margin)
    geometry.check_anchor_separation(anchors, n, alpha)
    nbr = geometry.neighbor_table(L, d)
    boundary = geometry.boundary_sites(L, d)
    blocks = np.stack([geometry.block_indices(L, d, a, n) for a in anchors])
    lag_sites, lag_partners = geometry.lag_partners(L, d, params.max_lag)
    keys = np.array([stream_key(params.seed, 0x9E, r) for r in range(replicates)], dtype=np.uint64)

    def run(start):
        ks = keys[start : start + batch]
        sums = np.empty((ks.size, len(anchors)))
        means = np.empty(ks.size)
        prods = np.empty((ks.size, d, params.max_lag + 1))
        _run_replicates(ks, nbr, float(params.theta), boundary, blocks, lag_sites, lag_partners, sums, means, prods)
        return sums, means, prods

    out = ordered_map(run, range(0, replicates, batch), threads)
    sums = np.concatenate([o[0] for o in out])
    sm = SampleMatrix(
        values=sums,
        model="percolation",
        params=dict(asdict(params), n=n, anchors=[list(a) for a in anchors]),
        seed=params.seed,
        columns=[f"U{q}" for q in range(len(anchors))],
        metadata={"margin": used_margin, "warnings": []},
    )
    sm.lag_cov = lag_covariance_from_records(
        np.concatenate([o[1] for o in out]), np.concatenate([o[2] for o in out]), d
    )
    return sm
