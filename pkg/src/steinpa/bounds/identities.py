"""Closed forms for the weighted geometric sums used throughout the bounds."""
from .report import DomainError


def _check_n(n):
    if int(n) != n or n < 2:
        raise DomainError(f"n must be an integer >= 2, got {n}")


def sum_identity_w(n, w):
    """``sum_{k=1}^{n-1} (n-k) w^k`` in closed form.

    Examples
    --------
    >>> sum_identity_w(3, 2.0)
    8.0
    """
    _check_n(n)
    if w == 1:
        raise DomainError("identity undefined at w = 1")
    return w * ((n - 1) - n * w + w**n) / (w - 1) ** 2


def sum_identity_v(n, v):
    """``n + sum_{a=1}^{n-1} (n-a)(v^a + v^-a)`` in closed form, ``v > 0``."""
    _check_n(n)
    if v <= 0:
        raise DomainError(f"v must be positive, got {v}")
    if v == 1:
        raise DomainError("identity undefined at v = 1")
    return v ** (1 - n) * (v**n - 1) ** 2 / (v - 1) ** 2


def sum_identity_u(n, u):
    """``n + 2 sum_{b=1}^{n-1} (n-b) u^b`` in closed form."""
    _check_n(n)
    if u == 1:
        raise DomainError("identity undefined at u = 1")
    return ((1 - u * u) * n - 2 * u + 2 * u ** (n + 1)) / (u - 1) ** 2
