"""Covariance-decay model and the block-variance quantities built from it."""
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .report import DomainError


@dataclass(frozen=True)
class CovDecayParams:
    """Exponential envelope ``R(k) <= kappa0 * exp(-lambda_ * |k|_1)`` on Z^d."""

    kappa0: float
    lambda_: float
    dim: int = 1

    def __post_init__(self):
        if not self.kappa0 > 0:
            raise DomainError(f"kappa0 must be positive, got {self.kappa0}")
        if not self.lambda_ > 0:
            raise DomainError(f"lambda must be positive, got {self.lambda_}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise DomainError(f"dim must be a positive integer, got {self.dim}")

    def envelope(self, lag_l1):
        return self.kappa0 * np.exp(-self.lambda_ * np.asarray(lag_l1, dtype=float))


@dataclass(frozen=True)
class DecayConstants:
    mu: float
    upsilon: float
    gamma: float


def decay_constants(params):
    """Return ``mu_lambda``, ``upsilon_lambda`` and ``gamma_{lambda,d}``."""
    lam = params.lambda_
    denom = math.expm1(lam) ** 2
    mu = math.exp(lam) / denom
    upsilon = math.exp(2 * lam) / denom
    d = params.dim
    gamma = (4 * mu + 2 * upsilon) ** d - (2 * upsilon) ** d
    return DecayConstants(mu=mu, upsilon=upsilon, gamma=gamma)


def exponential_covariance(params):
    """Covariance function attaining the envelope with equality.

    The returned callable maps an integer array of lag vectors with shape
    ``(..., d)`` to covariances.
    """

    def R(lags):
        lags = np.asarray(lags)
        return params.kappa0 * np.exp(-params.lambda_ * np.abs(lags).sum(axis=-1))

    R.factors = tuple(
        (lambda a, lam=params.lambda_: np.exp(-lam * np.abs(np.asarray(a))))
        for _ in range(params.dim)
    )
    R.scale = params.kappa0
    return R


def _lag_grid(n, d):
    a = np.arange(-n + 1, n)
    grid = np.stack(np.meshgrid(*([a] * d), indexing="ij"), axis=-1).reshape(-1, d)
    mult = np.prod(n - np.abs(grid), axis=1).astype(float)
    return grid, mult


def a_n_from_covariance(R, n, d):
    """Normalised block variance ``A_n = n^-d sum_{i,j in B^n} R(i - j)``.

    Parameters
    ----------
    R : callable or sequence of callables
        Either a covariance function taking an integer array of lag vectors
        of shape ``(M, d)``, or a sequence of ``d`` one-dimensional factors
        (each mapping an integer array of lags to values) when ``R`` is a
        product over coordinates. A callable carrying ``factors`` and
        ``scale`` attributes is treated as separable.
    n, d : int
        Block side and dimension.
    """
    if n < 1 or d < 1:
        raise DomainError("n and d must be positive")
    factors, scale = None, 1.0
    if hasattr(R, "factors"):
        factors, scale = R.factors, getattr(R, "scale", 1.0)
    elif not callable(R):
        factors = tuple(R)
    if factors is not None:
        if len(factors) != d:
            raise DomainError(f"expected {d} factors, got {len(factors)}")
        a = np.arange(-n + 1, n)
        weights = (n - np.abs(a)).astype(float)
        total = scale
        for f in factors:
            total *= float(np.dot(weights, f(a))) / n
        return total
    grid, mult = _lag_grid(n, d)
    return float(np.dot(mult, np.asarray(R(grid), dtype=float))) / n**d


def a_n_exponential(params, n):
    """Exact ``A_n`` when the decay envelope holds with equality."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    lam = params.lambda_
    u = math.exp(-lam)
    inner = (1 - u * u - 2 * u / n + 2 * math.exp(-lam * (n + 1)) / n) / (-math.expm1(-lam)) ** 2
    return params.kappa0 * inner**params.dim


def a_limit(params):
    """``A = lim A_n = kappa0 * coth^d(lambda / 2)`` under equality decay."""
    return params.kappa0 / math.tanh(params.lambda_ / 2) ** params.dim


def a_limit_truncated(R, d, radius):
    """Truncated estimate of ``A = sum_k R(k)`` over ``|k|_inf <= radius``.

    No truncation rule is implied; the caller picks ``radius``.
    """
    a = np.arange(-radius, radius + 1)
    grid = np.array(list(itertools.product(a, repeat=d)))
    return float(np.sum(R(grid)))
