"""Empirical distances and covariance utilities linking simulations to bounds."""
import math
from itertools import product
from math import comb
from dataclasses import asdict, dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.stats import qmc

from ._rng import numpy_generator, stream_key

BOOTSTRAP_RESAMPLES = 200
_BOOTSTRAP_STREAM = 0xB007


def normal_cdf(x):
    return ndtr(x)


def _G(t):
    """Antiderivative of the normal CDF: ``t Phi(t) + phi(t)``."""
    t = np.asarray(t, dtype=float)
    out = t * ndtr(t) + np.exp(-0.5 * t * t) / math.sqrt(2 * math.pi)
    # for very negative t both terms underflow towards 0 already; keep exact zeros
    return np.where(np.isneginf(t), 0.0, out)


@dataclass(frozen=True)
class D1Estimate:
    """Empirical Wasserstein-1 distance to N(0, 1) with a bootstrap SE."""

    value: float
    se: float
    n: int

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("d1 estimate must be nonnegative")

    def to_dict(self):
        return asdict(self)


def _check_samples(x):
    x = np.asarray(x, dtype=float).ravel()
    if x.size < 2:
        raise ValueError(f"need at least 2 samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples contain non-finite values")
    return x


def d1_sorted(xs):
    """Exact ``int |F_N - Phi|`` for already sorted finite samples."""
    N = xs.size
    a, b = xs[:-1], xs[1:]
    c = np.arange(1, N) / N
    ts = np.clip(ndtri(c), a, b)
    Ga, Gb, Gt = _G(a), _G(b), _G(ts)
    # c - Phi >= 0 left of the crossing, <= 0 right of it
    left = c * (ts - a) - (Gt - Ga)
    right = c * (b - ts) - (Gb - Gt)
    inner = np.sum(left) - np.sum(right)
    tails = float(_G(xs[0])) + float(_G(-xs[-1]))
    return max(float(inner) + tails, 0.0)


def d1_value(samples):
    return d1_sorted(np.sort(_check_samples(samples)))


def d1_to_standard_normal(samples, resamples=BOOTSTRAP_RESAMPLES, seed=0):
    """Wasserstein-1 distance between the empirical law of ``samples`` and N(0,1).

    The integral of ``|F_N - Phi|`` is evaluated exactly interval by interval,
    splitting each at the point where ``Phi`` crosses the ECDF level. The SE
    is the standard deviation over ``resamples`` bootstrap resamples drawn
    from a dedicated stream.

    Examples
    --------
    >>> round(d1_to_standard_normal([0.0, 0.0]).value, 6)
    0.797885
    """
    x = _check_samples(samples)
    value = d1_sorted(np.sort(x))
    se = 0.0
    if resamples:
        rng = numpy_generator(seed, _BOOTSTRAP_STREAM, x.size)
        boots = np.empty(resamples)
        for i in range(resamples):
            boots[i] = d1_sorted(np.sort(x[rng.integers(0, x.size, x.size)]))
        se = float(np.std(boots, ddof=1))
    return D1Estimate(value=value, se=se, n=int(x.size))


def d1_riemann(samples, h=2e-5, pad=9.0):
    """Midpoint-rule version of the same integral; a cross-check only."""
    xs = np.sort(_check_samples(samples))
    lo, hi = xs[0] - pad, xs[-1] + pad
    k = int(math.ceil((hi - lo) / h))
    total = 0.0
    chunk = 1 << 20
    for start in range(0, k, chunk):
        t = lo + h * (np.arange(start, min(start + chunk, k)) + 0.5)
        F = np.searchsorted(xs, t, side="right") / xs.size
        total += float(np.sum(np.abs(F - ndtr(t))))
    return total * h


class Standardized(NamedTuple):
    values: np.ndarray
    mode: str
    center: np.ndarray
    scale: np.ndarray


def standardize(samples, mode="empirical", mean=None, scale=None):
    """Centre and scale each column.

    ``mode="empirical"`` uses the replicate mean and SD (ddof=1);
    ``mode="population"`` uses the supplied ``mean`` (``E S``) and ``scale``
    (``sqrt(n^d A_n)``).
    """
    x = np.asarray(samples, dtype=float)
    squeeze = x.ndim == 1
    x2 = x.reshape(x.shape[0], -1)
    if x2.shape[0] < 2:
        raise ValueError("need at least 2 replicates")
    if mode == "empirical":
        center = x2.mean(axis=0)
        sd = x2.std(axis=0, ddof=1)
        if np.any(sd <= 0):
            raise ValueError("zero sample variance; cannot standardize")
    elif mode == "population":
        if mean is None or scale is None:
            raise ValueError("population mode needs mean and scale")
        center = np.broadcast_to(np.asarray(mean, dtype=float), (x2.shape[1],)).copy()
        sd = np.broadcast_to(np.asarray(scale, dtype=float), (x2.shape[1],)).copy()
        if np.any(sd <= 0):
            raise ValueError("scale must be positive")
    else:
        raise ValueError(f"unknown mode {mode!r}")
    z = (x2 - center) / sd
    return Standardized(z.ravel() if squeeze else z, mode, center, sd)


def empirical_cov_matrix(samples):
    """Unbiased covariance of an ``N x p`` sample (rows are replicates)."""
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    N, p = x.shape
    if N <= p:
        raise ValueError(f"need more replicates than coordinates (N={N}, p={p})")
    xc = x - x.mean(axis=0)
    return (xc.T @ xc) / (N - 1)


def variance_jackknife(samples):
    """Sample variance (ddof=1) and its delete-one jackknife SE."""
    x = np.asarray(samples, dtype=float).ravel()
    N = x.size
    if N < 3:
        raise ValueError("need at least 3 samples")
    # centring first keeps constant samples at exactly zero
    x = x - x.mean()
    s1, s2 = x.sum(), np.dot(x, x)
    loo_mean = (s1 - x) / (N - 1)
    loo_var = (s2 - x * x - (N - 1) * loo_mean**2) / (N - 2)
    var = float(np.dot(x, x) / (N - 1))
    se = float(math.sqrt((N - 1) / N * np.sum((loo_var - loo_var.mean()) ** 2)))
    return var, se


# ---------------------------------------------------------------------------
# smooth test functions


def _sigmoid(x):
    return 0.5 * (1 + np.tanh(x))


@dataclass(frozen=True)
class SmoothTest:
    """A test function on R^p with all partials of order <= 3 bounded by 1."""

    name: str
    fn: Callable
    coords: tuple

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))


def default_h_suite(p):
    """Six functions of the first (at most) two coordinates."""
    j = 1 if p > 1 else 0
    # with one coordinate, x[..., j] aliases x[..., 0] and doubles frequencies
    c = 0.25 if j else 0.125
    suite = [
        SmoothTest("sin_x1", lambda x: 0.5 * np.sin(x[..., 0]), (0,)),
        SmoothTest("cos_sum", lambda x: c * np.cos(x[..., 0] + x[..., j]), (0, j)),
        SmoothTest("sigmoid_product", lambda x: 0.5 * _sigmoid(x[..., 0]) * _sigmoid(x[..., j]), (0, j)),
        SmoothTest(
            "gaussian_bump",
            lambda x: 0.5 * np.exp(-0.5 * (x[..., 0] ** 2 + (x[..., j] ** 2 if j else 0.0))),
            (0, j),
        ),
        SmoothTest("sin_cos", lambda x: 2 * c * np.sin(x[..., 0]) * np.cos(x[..., j]), (0, j)),
        SmoothTest("soft_threshold", lambda x: _sigmoid(2 * (x[..., j] - 0.5)) / 8, (j,)),
    ]
    return suite


def _central_difference(f, x, k, h):
    """Mixed partial ``d^k f`` at points ``x`` (shape (M, p)) by central differences."""
    total = np.zeros(x.shape[0])
    axes = [q for q in range(x.shape[1]) if k[q] > 0]
    stencils = [[(i, (-1) ** i * comb(k[q], i)) for i in range(k[q] + 1)] for q in axes]
    for combo in product(*stencils):
        shift = np.zeros(x.shape[1])
        w = 1.0
        for q, (i, c) in zip(axes, combo):
            shift[q] = (k[q] / 2 - i) * h
            w *= c
        total += w * f(x + shift)
    return total / h ** sum(k)


def derivative_norm(test, p, grid=np.linspace(-4, 4, 41), h=1e-2):
    """Largest finite-difference ``|h^{(k)}|`` over ``|k|_1 <= 3`` on a grid."""
    coords = sorted(set(test.coords))
    pts = np.array(list(product(grid, repeat=len(coords))))
    x = np.zeros((pts.shape[0], p))
    x[:, coords] = pts
    worst = 0.0
    for orders in product(range(4), repeat=len(coords)):
        if sum(orders) > 3:
            continue
        k = [0] * p
        for q, o in zip(coords, orders):
            k[q] = o
        worst = max(worst, float(np.max(np.abs(_central_difference(test, x, k, h)))))
    return worst


def normal_expectation(test, p, log2_points=20, scrambles=8, seed=0):
    """``E h(Z)`` for ``Z ~ N(0, I_p)`` by randomised Sobol quadrature.

    Returns the mean and SE over ``scrambles`` independent scramblings that
    together use ``2**log2_points`` points.
    """
    per = log2_points - int(math.log2(scrambles))
    est = np.empty(scrambles)
    for s in range(scrambles):
        eng = qmc.Sobol(d=p, scramble=True, seed=int(stream_key(seed, 0x50B0, s)))
        u = eng.random_base2(per)
        est[s] = float(np.mean(test(ndtri(u))))
    return float(est.mean()), float(est.std(ddof=1) / math.sqrt(scrambles))


@dataclass
class SmoothCheckReport:
    """Per-function gaps and their maximum, a lower proxy for the smooth metric."""

    names: list
    gaps: np.ndarray
    ses: np.ndarray
    rejected: list

    @property
    def proxy(self):
        return float(self.gaps.max())

    @property
    def proxy_se(self):
        return float(self.ses[int(np.argmax(self.gaps))])

    def to_dict(self):
        return {
            "proxy": self.proxy,
            "proxy_se": self.proxy_se,
            "gaps": dict(zip(self.names, self.gaps.tolist())),
            "ses": dict(zip(self.names, self.ses.tolist())),
            "rejected": list(self.rejected),
        }


def multivariate_smooth_check(samples, h_suite=None, seed=0, log2_points=20, tol=1e-3):
    """Compare sample means of smooth test functions with their normal expectations.

    Parameters
    ----------
    samples : (N, p) array
        Rows already standardised by ``Sigma^{-1/2}``.
    h_suite : list of SmoothTest, optional
        Defaults to :func:`default_h_suite`. Members whose finite-difference
        derivative norm exceeds ``1 + tol`` are rejected.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    N, p = x.shape
    suite = default_h_suite(p) if h_suite is None else list(h_suite)
    names, gaps, ses, rejected = [], [], [], []
    for test in suite:
        if derivative_norm(test, p) > 1 + tol:
            rejected.append(test.name)
            continue
        vals = test(x)
        ez, ez_se = normal_expectation(test, p, log2_points=log2_points, seed=seed)
        names.append(test.name)
        gaps.append(abs(float(vals.mean()) - ez))
        ses.append(math.hypot(float(vals.std(ddof=1)) / math.sqrt(N), ez_se))
    if not names:
        raise ValueError("every test function was rejected")
    return SmoothCheckReport(names, np.array(gaps), np.array(ses), rejected)
