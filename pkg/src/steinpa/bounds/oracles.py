"""Brute-force references for the closed forms, used by tests and ``steinpa verify-identities``.

Everything here is deliberately naive: explicit loops and site enumeration,
sharing no code with the formulas they check.
"""
import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from . import constants, field, identities


def brute_sum_w(n, w):
    return sum((n - k) * w**k for k in range(1, n))


def brute_sum_v(n, v):
    return n + sum((n - a) * (v**a + v ** (-a)) for a in range(1, n))


def brute_sum_u(n, u):
    return n + 2 * sum((n - b) * u**b for b in range(1, n))


def _sites(lo, hi):
    """All integer points of the box ``prod [lo_q, hi_q)``."""
    return np.array(list(itertools.product(*[range(a, b) for a, b in zip(lo, hi)])), dtype=float)


def _pair_cov(sites_a, sites_b, kappa0, lam):
    diff = np.abs(sites_a[:, None, :] - sites_b[None, :, :]).sum(axis=-1)
    return float(kappa0 * np.exp(-lam * diff).sum())


def exact_offdiag_block_cov(params, n, l):
    """``sum_{i != j} Cov(xi_i, xi_j)`` over the sub-blocks, by enumeration."""
    spec = field.block_decompose(n, l, params.dim)
    blocks = [_sites([a for a, _ in b], [c for _, c in b]) for b in spec.blocks()]
    total = 0.0
    for i, bi in enumerate(blocks):
        for j, bj in enumerate(blocks):
            if i != j:
                total += _pair_cov(bi, bj, params.kappa0, params.lambda_)
    return total


def exact_cross_block_cov(params, n, offset):
    """``Cov(S_0^n, S_offset^n)`` by enumeration under equality decay."""
    d = params.dim
    a = _sites([0] * d, [n] * d)
    b = _sites(list(offset), [o + n for o in offset])
    return _pair_cov(a, b, params.kappa0, params.lambda_)


def brute_block_min(a, b, d, n):
    ls = np.arange(1, n + 1, dtype=float)
    return float(np.min(a * ls**d + b / ls))


def sumexpo_profile(n, lam, q):
    a = np.arange(-n + 1, n)
    return float(np.sum((n - np.abs(a)) * np.exp(-lam * np.abs(q + a))))


@dataclass
class OracleResult:
    name: str
    passed: bool
    cases: int
    worst: float
    seconds: float

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.cases} cases, worst {self.worst:.3g}, {self.seconds:.2f}s"


def _timed(name, fn):
    t0 = time.perf_counter()
    passed, cases, worst = fn()
    return OracleResult(name, passed, cases, worst, time.perf_counter() - t0)


def check_identities(cases=600, seed=0, rtol=1e-12):
    """Random ``(n, x)`` draws comparing each closed form with its loop."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    per = cases // 3
    pairs = [
        (identities.sum_identity_w, brute_sum_w),
        (identities.sum_identity_v, brute_sum_v),
        (identities.sum_identity_u, brute_sum_u),
    ]
    for closed, loop in pairs:
        for _ in range(per):
            n = int(rng.integers(2, 201))
            # keep x^n within double range and away from the removable point 1
            x = float(rng.uniform(0.05, 0.95) if rng.random() < 0.5 else rng.uniform(1.05, 1.2))
            ref = loop(n, x)
            worst = max(worst, abs(closed(n, x) - ref) / abs(ref))
    return worst <= rtol, per * 3, worst


def check_a_n(rtol=1e-10):
    worst = 0.0
    cases = 0
    for d in (1, 2, 3):
        for lam in (0.3, 1.0, 2.5):
            params = constants.CovDecayParams(kappa0=0.7, lambda_=lam, dim=d)
            R = constants.exponential_covariance(params)

            def plain(lags, R=R):
                return R(lags)

            for n in range(1, 21 if d < 3 else 13):
                exact = constants.a_n_exponential(params, n)
                direct = constants.a_n_from_covariance(plain, n, d)
                sep = constants.a_n_from_covariance(R, n, d)
                worst = max(worst, abs(direct - exact) / exact, abs(sep - exact) / exact)
                cases += 1
    return worst <= rtol, cases, worst


def a_limit_gap_constant(params):
    """First-order constant ``c`` in ``A - A_n ~ c / n``.

    Expanding the closed form gives ``c = 2 d kappa0 mu coth^{d-1}(lambda/2)``.
    """
    mu = math.exp(params.lambda_) / math.expm1(params.lambda_) ** 2
    coth = 1 / math.tanh(params.lambda_ / 2)
    return 2 * params.dim * params.kappa0 * mu * coth ** (params.dim - 1)


def check_a_limit(n=1000, rtol=0.01):
    """``n (A - A_n)`` against its first-order constant, within ``rtol``."""
    worst = 0.0
    cases = 0
    for d in (1, 2, 3):
        for lam in (0.3, 1.0, 2.5):
            params = constants.CovDecayParams(kappa0=1.3, lambda_=lam, dim=d)
            gap = constants.a_limit(params) - constants.a_n_exponential(params, n)
            c = a_limit_gap_constant(params)
            worst = max(worst, abs(n * gap - c) / c)
            cases += 1
    return worst <= rtol, cases, worst


def check_lemma_dominance(slack=1e-9):
    """Worst ``exact - bound`` over small instances; must stay below ``slack``."""
    worst = -math.inf
    cases = 0
    for lam in (0.2, 0.7, 1.5):
        p1 = constants.CovDecayParams(kappa0=1.0, lambda_=lam, dim=1)
        for n in range(2, 13):
            for l in range(1, n + 1):
                exact = exact_offdiag_block_cov(p1, n, l)
                worst = max(worst, exact - field.lemma_cov_sum_bound(p1, n, l))
                cases += 1
        for d, nmax in ((1, 8), (2, 8)):
            pd_ = constants.CovDecayParams(kappa0=1.0, lambda_=lam, dim=d)
            for n in range(2, nmax + 1):
                for b in range(1, n + 1):
                    bound = field.lemma_cross_block_bound(pd_, n, b)
                    sep = n - b
                    # every offset with sup-norm exactly n - b, up to symmetry
                    for off in itertools.product(range(0, sep + 1), repeat=d):
                        if max(off) != sep:
                            continue
                        worst = max(worst, exact_cross_block_cov(pd_, n, off) - bound)
                        cases += 1
    return worst <= slack, cases, worst


def check_block_optimizer(draws=1000, seed=1):
    rng = np.random.default_rng(seed)
    worst = -math.inf
    cases = 0
    while cases < draws:
        a = float(np.exp(rng.uniform(-6, 2)))
        b = float(np.exp(rng.uniform(-2, 8)))
        d = int(rng.integers(1, 5))
        n = int(rng.integers(2, 200))
        l0 = field.optimal_real_l(a, b, d)
        if not 1 <= l0 <= n:
            continue
        _, guarantee = field.optimize_block_size(a, b, d, n)
        worst = max(worst, brute_block_min(a, b, d, n) - guarantee)
        cases += 1
    return worst <= 0, cases, worst


def run_all():
    """Run the oracle suite; returns a list of :class:`OracleResult`."""
    return [
        _timed("summation identities", check_identities),
        _timed("A_n separable/direct vs closed form", check_a_n),
        _timed("A_n limit gap rate at n=1000", check_a_limit),
        _timed("covariance lemma dominance", check_lemma_dominance),
        _timed("block-size guarantee", check_block_optimizer),
    ]
