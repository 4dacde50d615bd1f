"""Box geometry shared by the lattice samplers.

Sites of a box of side ``L`` are labelled by ``x in [-L/2, L/2)^d`` and
stored flat in C order of the shifted coordinates ``u = x + L//2``.
"""
import itertools
import warnings

import numpy as np
from numba import njit


class GeometryError(ValueError):
    """Blocks that do not fit the simulation box, or badly separated anchors."""


def strides(L, d):
    return np.array([L ** (d - 1 - q) for q in range(d)], dtype=np.int64)


def neighbor_table(L, d):
    """``(L^d, 2d)`` neighbour indices, ``-1`` where the neighbour is outside."""
    n_sites = L**d
    st = strides(L, d)
    idx = np.arange(n_sites, dtype=np.int64)
    coords = (idx[:, None] // st[None, :]) % L
    nbr = np.full((n_sites, 2 * d), -1, dtype=np.int64)
    for q in range(d):
        up = coords[:, q] + 1 < L
        dn = coords[:, q] >= 1
        nbr[up, 2 * q] = idx[up] + st[q]
        nbr[dn, 2 * q + 1] = idx[dn] - st[q]
    return nbr


def boundary_sites(L, d):
    """Flat indices of sites with at least one coordinate on the box face."""
    st = strides(L, d)
    idx = np.arange(L**d, dtype=np.int64)
    coords = (idx[:, None] // st[None, :]) % L
    return idx[np.any((coords == 0) | (coords == L - 1), axis=1)]


def default_anchor(n, d):
    """Lower corner of the block of side ``n`` centred in the box."""
    return tuple([-(n // 2)] * d)


def resolve_margin(L, n, d, anchors, margin=None):
    """Return the boundary margin to enforce.

    With ``margin=None`` the target is ``3n``; when the box is too small for
    that, the largest margin the anchors allow is used and a warning is
    issued. An explicit ``margin`` is enforced strictly.
    """
    lo = min(min(k) for k in anchors) + L // 2
    hi = L - (max(max(k) for k in anchors) + n + L // 2)
    available = min(lo, hi)
    if margin is None:
        if available >= 3 * n:
            return 3 * n
        if available < 1:
            raise GeometryError(f"blocks of side {n} at {anchors} do not fit a box of side {L}")
        warnings.warn(
            f"box side {L} leaves margin {available} < 3n = {3 * n}; using {available}",
            stacklevel=3,
        )
        return available
    if available < margin:
        raise GeometryError(f"margin {available} between blocks and box boundary is below {margin}")
    return margin


def check_anchor_separation(anchors, n, alpha):
    if alpha is None or len(anchors) < 2:
        return
    need = (1 - alpha) * n
    for a, b in itertools.combinations(anchors, 2):
        if max(abs(x - y) for x, y in zip(a, b)) < need:
            raise GeometryError(f"anchors {a} and {b} closer than (1 - alpha) n = {need:g}")


def block_indices(L, d, anchor, n):
    """Flat indices of ``B_anchor^n = {anchor <= j < anchor + n}``."""
    st = strides(L, d)
    axes = [np.arange(k + L // 2, k + L // 2 + n) for k in anchor]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    if grid.min() < 0 or grid.max() >= L:
        raise GeometryError(f"block at {anchor} with side {n} leaves the box")
    return (grid * st).sum(axis=1).astype(np.int64)


def lag_partners(L, d, max_lag):
    """Central sites and their axis-aligned partners for lag covariance.

    Returns ``(sites, partners)`` where ``partners[q, k, i]`` is the flat
    index of ``sites[i] + k e_q`` for ``k = 0..max_lag``. Sites lie in the central half of the box
    so boundary effects stay small.
    """
    lo, hi = L // 4, (3 * L) // 4 - max_lag
    if hi <= lo:
        raise GeometryError(f"box side {L} too small for lags up to {max_lag}")
    st = strides(L, d)
    axes = [np.arange(lo, hi)] * d
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    sites = (grid * st).sum(axis=1).astype(np.int64)
    partners = np.empty((d, max_lag + 1, sites.size), dtype=np.int64)
    for q in range(d):
        for k in range(max_lag + 1):
            partners[q, k] = sites + k * st[q]
    return sites, partners


@njit(cache=True, nogil=True)
def lag_products(field, sites, partners, out_mean, out_prod):
    """Spatial averages of ``x_i`` and ``x_i x_{i + k e_q}`` over ``sites``."""
    m = sites.size
    s = 0.0
    for i in range(m):
        s += field[sites[i]]
    out_mean[0] = s / m
    d, K = partners.shape[0], partners.shape[1]
    for q in range(d):
        for k in range(K):
            acc = 0.0
            for i in range(m):
                acc += field[sites[i]] * field[partners[q, k, i]]
            out_prod[q, k] = acc / m
