"""Normal-approximation bounds for sums of bounded positively associated vectors."""
import math

import numpy as np

from .report import DomainError

SQRT_8_OVER_PI = math.sqrt(8 / math.pi)
PD_RTOL = 1e-10

_C_CUBIC = 1 / 6 + 2 * math.sqrt(2)
_C_QUAD = 3 / math.sqrt(2) + 1 / 2
_C_CROSS = 2 * math.sqrt(2)


class NotPositiveDefinite(DomainError):
    def __init__(self, eigenvalue, threshold):
        super().__init__(
            f"covariance matrix is not positive definite: eigenvalue {eigenvalue:.6g} "
            f"<= tolerance {threshold:.3g}"
        )
        self.eigenvalue = eigenvalue


def stein_bound_univariate(B, offdiag_cov_sum):
    """L1 bound ``5 B + sqrt(8/pi) * sum_{i != j} E[xi_i xi_j]``.

    Valid for a positively associated mean zero vector with ``|xi_i| <= B``
    whose sum has unit variance; the caller is responsible for that.
    """
    if B < 0 or offdiag_cov_sum < 0:
        raise DomainError("B and the off-diagonal covariance sum must be nonnegative")
    return 5 * B + SQRT_8_OVER_PI * offdiag_cov_sum


def _as_symmetric(sigma):
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    if sigma.shape[0] != sigma.shape[1]:
        raise DomainError(f"covariance matrix must be square, got shape {sigma.shape}")
    if not np.allclose(sigma, sigma.T, rtol=1e-12, atol=1e-12 * np.abs(sigma).max(initial=1.0)):
        raise DomainError("covariance matrix must be symmetric")
    return (sigma + sigma.T) / 2


def inverse_sqrt(sigma, rtol=PD_RTOL):
    """Inverse of the PSD square root via symmetric eigendecomposition.

    Eigenvalues at or below ``rtol * max eigenvalue`` make the matrix count as
    not positive definite.
    """
    sigma = _as_symmetric(sigma)
    evals, evecs = np.linalg.eigh(sigma)
    top = evals.max()
    threshold = rtol * max(top, 0.0)
    if top <= 0 or evals.min() <= threshold:
        raise NotPositiveDefinite(evals.min(), threshold)
    return (evecs / np.sqrt(evals)) @ evecs.T


def max_abs(matrix):
    """Entrywise sup norm ``|M|_inf``."""
    return float(np.max(np.abs(matrix)))


def stein_bound_multivariate(p, B, sigma, within_coord_offdiag):
    """Smooth-function-metric bound for ``Sigma^{-1/2} S`` with ``S_j = sum_i xi_{ij}``.

    Parameters
    ----------
    p : int
        Dimension of ``S``.
    B : float
        Almost-sure bound on ``|xi_{ij}|``.
    sigma : (p, p) array
        ``Var(S)``; must be positive definite.
    within_coord_offdiag : sequence of p floats
        ``sum_{i != k} Cov(xi_{ij}, xi_{kj})`` for each coordinate ``j``.
    """
    sigma = _as_symmetric(sigma)
    if sigma.shape != (p, p):
        raise DomainError(f"sigma must be {p}x{p}, got {sigma.shape}")
    within = np.asarray(within_coord_offdiag, dtype=float)
    if within.shape != (p,):
        raise DomainError(f"need {p} within-coordinate sums, got shape {within.shape}")
    if B < 0 or np.any(within < 0):
        raise DomainError("B and within-coordinate covariance sums must be nonnegative")
    s = max_abs(inverse_sqrt(sigma))
    cubic = p**3 * B * s**3
    quad = _C_QUAD * p**2 * s**2
    cross = float(sigma.sum() - np.trace(sigma))
    term1 = _C_CUBIC * cubic * float(np.trace(sigma))
    term2 = quad * float(within.sum())
    term3 = (_C_CROSS * cubic + quad) * cross
    return term1 + term2 + term3
