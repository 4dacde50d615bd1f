"""Estimators shared by the voter and contact samplers."""
import math
from dataclasses import asdict, dataclass

import numpy as np

from .._rng import numpy_generator
from ..stats import variance_jackknife


@dataclass
class Estimate:
    """A point estimate with its standard error."""

    value: float
    se: float

    def to_dict(self):
        return asdict(self)


def variance_rate(samples, t):
    """``Var(X) / t`` with a jackknife SE; the empirical ``A_s^t`` or ``A_f^t``."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 30:
        raise ValueError("variance_rate needs at least 30 replicates")
    if not t > 0:
        raise ValueError("t must be positive")
    var, se = variance_jackknife(x)
    return Estimate(float(var / t), float(se / t))


def covariance(x, y):
    """Unbiased ``Cov(x, y)`` with a delta-method SE."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    if n < 2 or y.size != n:
        raise ValueError("need two equal-length samples of size >= 2")
    dx, dy = x - x.mean(), y - y.mean()
    infl = dx * dy
    return Estimate(float(infl.sum() / (n - 1)), float(infl.std(ddof=1) / math.sqrt(n)))


def segment_cov_sum(segments):
    """``sum_{i != j} Cov(Y_i, Y_j)`` for an ``(N, m)`` matrix of segment integrals.

    This is ``Var(sum_i Y_i) - sum_i Var(Y_i)``; the SE propagates the
    per-replicate influence ``(S - S_bar)^2 - sum_i (Y_i - Y_bar_i)^2``.
    """
    y = np.asarray(segments, dtype=float)
    if y.ndim != 2 or y.shape[0] < 2:
        raise ValueError("segments must be an (N, m) array with N >= 2")
    n = y.shape[0]
    dy = y - y.mean(axis=0)
    ds = dy.sum(axis=1)
    infl = ds * ds - (dy * dy).sum(axis=1)
    return Estimate(float(infl.sum() / (n - 1)), float(infl.std(ddof=1) / math.sqrt(n)))


_TRANSFORMS = {
    "identity": lambda v: v,
    "tanh": np.tanh,
    "cube": lambda v: v**3,
    "step": lambda v: (v > 0).astype(float),
}


def association_check(segments, pairs=20, seed=0):
    """Covariances of random increasing functions of disjoint segment groups.

    Each pair draws two disjoint index sets ``I, J``, nonnegative weights and
    a nondecreasing transform of the standardised weighted sums. Positive
    association predicts every covariance is ``>= 0``.

    Returns a list of ``(description, Estimate)``.
    """
    y = np.asarray(segments, dtype=float)
    m = y.shape[1]
    if m < 2:
        raise ValueError("need at least two segments")
    rng = numpy_generator(seed, 0xA550)
    names = sorted(_TRANSFORMS)
    sd = y.std(axis=0)
    z = (y - y.mean(axis=0)) / np.where(sd > 0, sd, 1.0)
    out = []
    for _ in range(pairs):
        perm = rng.permutation(m)
        cut = int(rng.integers(1, m))
        I, J = perm[:cut], perm[cut:]
        wi = rng.uniform(0.1, 1.0, I.size)
        wj = rng.uniform(0.1, 1.0, J.size)
        fi, fj = rng.choice(names, 2)
        g = _TRANSFORMS[fi](z[:, I] @ wi)
        h = _TRANSFORMS[fj](z[:, J] @ wj)
        out.append((f"{fi}{sorted(I.tolist())} vs {fj}{sorted(J.tolist())}", covariance(g, h)))
    return out
