"""Bounded positively associated vectors with closed-form covariances.

Summands are ``xi_{i,j} = (U_{ij} + rho V_j + tau V_0) / c`` with every
``U``, ``V`` iid uniform on ``[-1, 1]``. Each ``xi`` is an increasing
function of independent variables, so the family is positively
associated; ``c`` is chosen so that every coordinate sum has unit variance.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ._rng import numpy_generator

_VAR_U = 1.0 / 3.0


@dataclass(frozen=True)
class CommonShock:
    """``p`` coordinate sums of ``m`` summands sharing per-coordinate and global shocks.

    ``rho = tau = 0`` gives independent summands.
    """

    m: int = 100
    p: int = 1
    rho: float = 0.0
    tau: float = 0.0

    def __post_init__(self):
        if self.m < 1 or self.p < 1:
            raise ValueError("m and p must be positive")
        if self.rho < 0 or self.tau < 0:
            raise ValueError("shock weights must be nonnegative")

    @classmethod
    def with_bound(cls, m, B):
        """Univariate design whose summands reach exactly ``|xi| <= B``."""
        if not 0 < B:
            raise ValueError("B must be positive")
        # B falls from sqrt(3/m) at rho = 0 towards sqrt(3)/m as rho grows
        top = math.sqrt(3.0 / m)
        if B > top or B <= math.sqrt(3.0) / m:
            raise ValueError(f"B must lie in ({math.sqrt(3.0) / m:.4g}, {top:.4g}] for m={m}")
        if math.isclose(B, top):
            return cls(m=m)

        def gap(rho):
            return cls(m=m, rho=rho).B - B

        hi = 1.0
        while gap(hi) > 0:
            hi *= 2
        return cls(m=m, rho=brentq(gap, 0.0, hi, xtol=1e-15))

    @property
    def scale(self):
        """``c`` with ``Var(S_j) = 1``."""
        m = self.m
        return math.sqrt(_VAR_U * (m + m * m * (self.rho**2 + self.tau**2)))

    @property
    def B(self):
        return (1.0 + self.rho + self.tau) / self.scale

    @property
    def sigma(self):
        """``Var(S)``: unit diagonal, ``m^2 tau^2 Var(U) / c^2`` off the diagonal."""
        off = self.m**2 * self.tau**2 * _VAR_U / self.scale**2
        return np.full((self.p, self.p), off) + (1.0 - off) * np.eye(self.p)

    @property
    def within_offdiag(self):
        """``sum_{i != k} Cov(xi_{i,j}, xi_{k,j})`` for each coordinate ``j``."""
        m = self.m
        v = m * (m - 1) * (self.rho**2 + self.tau**2) * _VAR_U / self.scale**2
        return np.full(self.p, v)

    def sample(self, N, seed=0, chunk=10000):
        """``N`` draws of ``S``, shape ``(N, p)``.

        Draws are made ``chunk`` rows at a time, so the stream (and hence
        the output for a given seed) depends on ``chunk`` as well.
        """
        rng = numpy_generator(seed, 0x5C, self.m, self.p)
        out = np.empty((N, self.p))
        for a in range(0, N, chunk):
            b = min(a + chunk, N)
            k = b - a
            u_sum = rng.uniform(-1, 1, (k, self.p, self.m)).sum(axis=2)
            v = rng.uniform(-1, 1, (k, self.p))
            v0 = rng.uniform(-1, 1, (k, 1))
            out[a:b] = (u_sum + self.m * (self.rho * v + self.tau * v0)) / self.scale
        return out

    def to_dict(self):
        return {"m": self.m, "p": self.p, "rho": self.rho, "tau": self.tau, "B": self.B, "scale": self.scale}
