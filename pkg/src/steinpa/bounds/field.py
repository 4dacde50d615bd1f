"""Bounds for block sums of positively associated stationary random fields."""
import itertools
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .constants import decay_constants
from .report import BoundReport, DomainError, TheoremId


@dataclass(frozen=True)
class BlockSpec:
    """Decomposition of a cube of side ``n`` into ``m^d`` sub-blocks.

    ``n = (m - 1) * l + r`` with ``1 <= r <= l``: along every axis there are
    ``m - 1`` segments of length ``l`` followed by one of length ``r``.
    """

    n: int
    l: int
    m: int
    r: int
    dim: int

    def axis_segments(self):
        """(start, stop) pairs along one axis, 0-based and half-open."""
        segs = [(i * self.l, (i + 1) * self.l) for i in range(self.m - 1)]
        segs.append(((self.m - 1) * self.l, self.n))
        return segs

    def blocks(self):
        """Yield each sub-block as a tuple of per-axis (start, stop) ranges."""
        yield from itertools.product(self.axis_segments(), repeat=self.dim)

    def sites(self, block):
        axes = [np.arange(a, b) for a, b in block]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)


def block_decompose(n, l, d=1):
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    if not 1 <= l <= n:
        raise DomainError(f"sub-block side l={l} outside [1, {n}]")
    m = (n - 1) // l + 1
    r = n - (m - 1) * l
    return BlockSpec(n=n, l=l, m=m, r=r, dim=d)


def lemma_cov_sum_bound(params, n, l):
    """Bound on ``sum_{i != j} E[xi_i xi_j]`` over the sub-blocks of side ``l``."""
    if not 1 <= l <= n:
        raise DomainError(f"l={l} outside [1, {n}]")
    g = decay_constants(params).gamma
    return params.kappa0 * g * n**params.dim / l


def lemma_cross_block_bound(params, n, b):
    """Bound on ``Cov(S_k1, S_k2)`` for blocks with ``|k1 - k2|_inf >= n - b``."""
    if not 1 <= b <= n:
        raise DomainError(f"b={b} outside [1, {n}]")
    d = params.dim
    return params.kappa0 * decay_constants(params).upsilon ** d * b * n ** (d - 1)


def min_l_guarantee(a, b, d):
    """Upper bound on ``min_l a l^d + b / l`` when ``l0 >= 1``."""
    return a ** (1 / (d + 1)) * b ** (d / (d + 1)) * (d ** (-d / (d + 1)) + 2 * d ** (1 / (d + 1)))


class BlockChoice(NamedTuple):
    l: int
    bound: float


def optimize_block_size(a, b, d, n):
    """Pick the sub-block side for a trade-off ``a l^d + b / l``.

    Returns ``l = floor(l0)`` clamped to ``[1, n]``, with
    ``l0 = (b / (a d))^(1/(d+1))`` the real minimiser, together with the
    closed-form guarantee. The guarantee dominates the integer minimum only
    when ``1 <= l0 <= n``; see :func:`optimal_real_l` to check.
    """
    if a <= 0 or b <= 0:
        raise DomainError("a and b must be positive")
    l0 = optimal_real_l(a, b, d)
    l = int(min(max(math.floor(l0), 1), n))
    return BlockChoice(l, min_l_guarantee(a, b, d))


def optimal_real_l(a, b, d):
    return (b / (a * d)) ** (1 / (d + 1))


def theorem21_constants(params, K, A_n):
    """Return ``(C, kappa1)`` of the univariate field bound."""
    d = params.dim
    g = decay_constants(params).gamma
    C = 5 * K * d * math.sqrt(math.pi * A_n) / (math.sqrt(2) * params.kappa0 * g)
    core = 10 * K * params.kappa0**d * g**d * 2 ** (1.5 * d) / (math.pi ** (d / 2) * A_n ** (d + 0.5))
    kappa1 = core ** (1 / (d + 1)) * (d ** (-d / (d + 1)) + 2 * d ** (1 / (d + 1)))
    return C, kappa1


def theorem21_bound(params, K, n, A_n):
    """L1 bound ``kappa1 * n^{-d/(2d+2)}`` for a standardised block sum.

    ``K`` bounds ``|X_j|``; ``A_n`` is the normalised block variance.
    """
    if K <= 0 or n <= 0 or A_n <= 0:
        raise DomainError("K, n and A_n must be positive")
    d = params.dim
    C, kappa1 = theorem21_constants(params, K, A_n)
    return BoundReport(
        theorem_id=TheoremId.FIELD,
        value=kappa1 * n ** (-d / (2 * d + 2)),
        valid_from=max(C ** (2 / d), C ** (-2 / (d + 2))),
        at=n,
        inputs={
            "kappa0": params.kappa0,
            "lambda": params.lambda_,
            "dim": d,
            "K": K,
            "n": n,
            "A_n": A_n,
            "C": C,
            "kappa1": kappa1,
        },
    )


def effective_alpha(alpha, n):
    """Round ``alpha * n`` to an integer, warning when that moves alpha."""
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    k = round(alpha * n)
    if abs(k - alpha * n) > 1e-9:
        warnings.warn(f"alpha*n={alpha * n:g} is not an integer; using alpha={k / n:g}", stacklevel=3)
    if not 0 < k < n:
        raise DomainError(f"alpha*n rounds to {k}, outside (0, {n})")
    return k / n


def theorem22_bound(params, K, n, p, alpha, A_n, psi_n, C=1.0):
    """Multivariate field bound in the smooth-function metric.

    The leading constant is not known in closed form; ``C`` is supplied by
    the caller (default 1) and the report is marked untracked.
    """
    alpha = effective_alpha(alpha, n)
    d = params.dim
    value = C * (
        (A_n + alpha) ** (1 / (d + 1))
        * psi_n ** ((2 * d + 3) / (d + 1))
        * (d ** (-d / (d + 1)) + 2 * d ** (1 / (d + 1)))
        * n ** (-d / (2 * (d + 1)))
        + alpha * psi_n**2
    )
    Bnd = d * psi_n * (A_n + alpha)
    return BoundReport(
        theorem_id=TheoremId.FIELD_MULTIVARIATE,
        value=value,
        valid_from=max(Bnd ** (2 / d), Bnd ** (-2 / (d + 2))),
        at=n,
        inputs={
            "kappa0": params.kappa0,
            "lambda": params.lambda_,
            "dim": d,
            "K": K,
            "n": n,
            "p": p,
            "alpha": alpha,
            "A_n": A_n,
            "psi_n": psi_n,
            "C": C,
        },
        constant_tracked=False,
    )


class InverseBound(NamedTuple):
    invertible: bool
    inv_inf_bound: float | None


def gershgorin_check(sigma):
    """Diagonal-dominance test with the matching bound on ``|Sigma^-1|``.

    When every row is strictly dominant the matrix is invertible and
    ``1 / min_j (Sigma_jj - sum_{l != j} |Sigma_jl|)`` bounds the maximum
    row sum of ``|Sigma^-1|``, hence also its largest entry. Otherwise the
    test is inconclusive and ``(False, None)`` is returned.
    """
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    if sigma.shape[0] != sigma.shape[1] or not np.allclose(sigma, sigma.T):
        raise DomainError("gershgorin_check needs a symmetric matrix")
    off = np.abs(sigma).sum(axis=1) - np.abs(np.diag(sigma))
    margin = float(np.min(np.diag(sigma) - off))
    if margin > 0:
        return InverseBound(True, 1 / margin)
    return InverseBound(False, None)


def field_inverse_bound(params, n, p, alpha, A_n):
    """Invertibility of the block-sum covariance matrix from decay parameters.

    Blocks separated by at least ``(1 - alpha) n`` in sup norm have
    ``|Sigma^-1| <= 1 / (n^d (A_n - (p-1) kappa0 upsilon^d alpha))`` whenever
    the bracket is positive.
    """
    if p < 2:
        return InverseBound(True, 1 / (n**params.dim * A_n))
    ups = decay_constants(params).upsilon
    margin = A_n - (p - 1) * params.kappa0 * ups**params.dim * alpha
    if 0 < alpha < 1 and margin > 0:
        return InverseBound(True, 1 / (n**params.dim * margin))
    return InverseBound(False, None)
