"""Lag covariances of stationary fields and exponential envelope fits."""
from dataclasses import dataclass

import numpy as np

from ..bounds.constants import CovDecayParams


class DecayFitError(ValueError):
    """Raised when too few lags rise above the noise floor."""


@dataclass
class LagCovariance:
    """Axis-averaged covariance ``R(k e_q)`` for ``k = 0..K`` with SEs."""

    lags: np.ndarray
    cov: np.ndarray
    se: np.ndarray
    dim: int

    def to_dict(self):
        return {"lags": self.lags.tolist(), "cov": self.cov.tolist(), "se": self.se.tolist(), "dim": self.dim}


def lag_covariance_from_records(means, prods, dim):
    """Combine per-replicate spatial averages into covariance estimates.

    Parameters
    ----------
    means : (N,) array
        Per-replicate spatial mean of the field.
    prods : (N, d, K+1) array
        Per-replicate spatial mean of ``x_i x_{i + k e_q}``.
    """
    means = np.asarray(means, dtype=float)
    prods = np.asarray(prods, dtype=float)
    N = means.size
    if N < 2:
        raise DecayFitError("need at least 2 replicates")
    grand = means.mean()
    per_rep = prods.mean(axis=1)
    cov = per_rep.mean(axis=0) - grand**2
    # delta method: each replicate's influence on mean(prod) - mean(x)^2
    influence = per_rep - 2 * grand * means[:, None]
    se = influence.std(axis=0, ddof=1) / np.sqrt(N)
    return LagCovariance(np.arange(prods.shape[2]), cov, se, dim)


def lag_covariance_from_snapshots(snapshots, max_lag):
    """Lag covariance from an ``(N, L, ..., L)`` stack of field snapshots."""
    x = np.asarray(snapshots, dtype=float)
    N, d = x.shape[0], x.ndim - 1
    means = x.reshape(N, -1).mean(axis=1)
    prods = np.empty((N, d, max_lag + 1))
    for q in range(d):
        ax = q + 1
        size = x.shape[ax]
        for k in range(max_lag + 1):
            a = np.take(x, np.arange(0, size - k), axis=ax)
            b = np.take(x, np.arange(k, size), axis=ax)
            prods[:, q, k] = (a * b).reshape(N, -1).mean(axis=1)
    return lag_covariance_from_records(means, prods, d)


@dataclass
class DecayFit:
    """Fitted envelope plus the lags that informed it."""

    params: CovDecayParams
    lags_used: np.ndarray
    slope: float
    intercept: float

    @property
    def kappa0(self):
        return self.params.kappa0

    @property
    def lambda_(self):
        return self.params.lambda_

    def to_dict(self):
        return {
            "kappa0": self.params.kappa0,
            "lambda": self.params.lambda_,
            "dim": self.params.dim,
            "lags_used": self.lags_used.tolist(),
        }


def fit_envelope(lags, cov, se, noise_sigmas=8.0, min_lags=3):
    """Log-linear fit of ``cov`` against ``lags`` with a dominating intercept.

    Lags ``k >= 1`` are used while ``cov > noise_sigmas * se``; the run stops
    at the first lag that falls to the noise floor. The slope comes from
    weighted least squares on ``log cov``; the scale is then raised to the largest
    ``cov(k) e^{lambda k}`` over the used lags and lag 0, so the envelope
    dominates every used estimate.

    The default floor of 8 SE is deliberately strict: the scale is a
    maximum over used lags, so admitting lags with large relative error
    would let one noisy lag inflate it.

    Returns ``(kappa, rate, used_lags, intercept)``.
    """
    lags = np.asarray(lags, dtype=float)
    cov = np.asarray(cov, dtype=float)
    se = np.asarray(se, dtype=float)
    used = []
    for k, c, s in zip(lags, cov, se):
        if k <= 0:
            continue
        if c > noise_sigmas * s and c > 0:
            used.append(k)
        else:
            break
    used = np.array(used)
    if used.size < min_lags:
        raise DecayFitError(f"fewer than {min_lags} usable lags above the noise floor")
    mask = np.isin(lags, used)
    # weights 1/SE of log cov, so precise short lags dominate noisy long ones
    slope, intercept = np.polyfit(lags[mask], np.log(cov[mask]), 1, w=cov[mask] / se[mask])
    rate = -slope
    if rate <= 0:
        raise DecayFitError(f"fitted decay rate {rate:g} is not positive")
    check = mask | (lags == 0)
    kappa = float(np.max(np.abs(cov[check]) * np.exp(rate * lags[check])))
    return kappa, float(rate), used, float(intercept)


def empirical_decay_fit(data, max_lag=12, noise_sigmas=8.0):
    """Fit ``R(k) <= kappa0 exp(-lambda |k|_1)`` to estimated covariances.

    Parameters
    ----------
    data : LagCovariance, SampleMatrix-like or array
        Either precomputed lag covariances, an object with a ``lag_cov``
        attribute (as returned by the samplers) or an ``(N, L, ..., L)``
        array of field snapshots.
    """
    if isinstance(data, LagCovariance):
        lc = data
    elif getattr(data, "lag_cov", None) is not None:
        lc = data.lag_cov
    else:
        x = np.asarray(data, dtype=float)
        if x.shape[0] < 30:
            raise DecayFitError("need at least 30 replicates")
        lc = lag_covariance_from_snapshots(x, max_lag)
    kappa, rate, used, intercept = fit_envelope(lc.lags, lc.cov, lc.se, noise_sigmas)
    return DecayFit(CovDecayParams(kappa0=kappa, lambda_=rate, dim=lc.dim), used, -rate, intercept)


def gaussian_field(shape, kappa0, lam, rng):
    """Stationary Gaussian field with ``Cov = kappa0 exp(-lam |k|_1)``.

    Built by running a unit-variance AR(1) recursion with coefficient
    ``exp(-lam)`` along each axis in turn; the covariance of the result is
    the product of the one-dimensional ones.
    """
    rho = np.exp(-lam)
    x = rng.standard_normal(shape)
    for ax in range(1, len(shape)):
        x = np.moveaxis(x, ax, 0)
        out = np.empty_like(x)
        out[0] = x[0]
        c = np.sqrt(1 - rho * rho)
        for i in range(1, x.shape[0]):
            out[i] = rho * out[i - 1] + c * x[i]
        x = np.moveaxis(out, 0, ax)
    return np.sqrt(kappa0) * x
