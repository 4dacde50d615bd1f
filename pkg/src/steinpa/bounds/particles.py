"""Bounds for occupation-time functionals of the voter model and contact process."""
import math

import numpy as np

from .field import InverseBound
from .report import BoundReport, DomainError, TheoremId

_SQRT_PI = math.sqrt(math.pi)
_SQRT_2 = math.sqrt(2)


def _positive(**kw):
    for k, v in kw.items():
        if not v > 0:
            raise DomainError(f"{k} must be positive, got {v}")


def _nonneg(**kw):
    for k, v in kw.items():
        if not v >= 0:
            raise DomainError(f"{k} must be nonnegative, got {v}")


def voter_bound(theta, A_st, EL2_2st, t):
    """L1 bound for the standardised voter occupation time on ``(s, s+t]``.

    Parameters
    ----------
    theta : float
        Initial Bernoulli density.
    A_st : float
        Variance rate ``Var(T_s^t) / t``.
    EL2_2st : float
        Second moment of the last exit time before ``2(s+t)``.
    t : float
        Window length.
    """
    if not 0 <= theta <= 1:
        raise DomainError(f"theta must lie in [0, 1], got {theta}")
    _positive(A_st=A_st, t=t)
    _nonneg(EL2_2st=EL2_2st)
    q = theta * (1 - theta) * EL2_2st
    value = math.sqrt(180 * _SQRT_2 * q / (_SQRT_PI * A_st**1.5)) * t**-0.25
    valid_from = (_SQRT_2 * q / (5 * math.sqrt(math.pi * A_st))) ** (2 / 3)
    return BoundReport(
        theorem_id=TheoremId.VOTER,
        value=value,
        valid_from=valid_from,
        at=t,
        inputs={"theta": theta, "A_st": A_st, "EL2_2st": EL2_2st, "t": t},
    )


def _multivariate_value(total, alpha, t, psi, C):
    return C * (math.sqrt(total + alpha + 1 / t) * psi**2.5 * t**-0.25 + psi**2 * (alpha + 1 / t))


def _multivariate_threshold(total, alpha, t, psi):
    return (psi * (total + alpha + 1 / t)) ** (-2 / 3)


def voter_multivariate_bound(p, theta, A_list, alpha, t, psi_t, C=1.0):
    """Smooth-metric bound for ``p`` voter occupation times in separated windows.

    ``psi_t = sqrt(t) |Sigma^{-1/2}|_inf``. ``C`` stands in for the unknown
    constant and the report is marked untracked. The validity threshold
    depends on ``t`` itself; ``valid_from`` is that threshold evaluated at
    the supplied ``t``.
    """
    A = np.asarray(A_list, dtype=float)
    if A.shape != (p,):
        raise DomainError(f"need {p} variance rates, got {A.shape}")
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if not 0 <= theta <= 1:
        raise DomainError(f"theta must lie in [0, 1], got {theta}")
    _positive(t=t, psi_t=psi_t)
    total = float(A.sum())
    value = 0.0 if theta in (0, 1) else _multivariate_value(total, alpha, t, psi_t, C)
    return BoundReport(
        theorem_id=TheoremId.VOTER_MULTIVARIATE,
        value=value,
        valid_from=_multivariate_threshold(total, alpha, t, psi_t),
        at=t,
        inputs={"p": p, "theta": theta, "A_list": A.tolist(), "alpha": alpha, "t": t, "psi_t": psi_t, "C": C},
        constant_tracked=False,
    )


def contact_bound(kappa, gamma, M_f, A_ft, t):
    """L1 bound for the standardised contact-process functional ``D_{s,f}^t``.

    ``kappa`` and ``gamma`` describe the covariance decay
    ``|Cov(f(zeta(s)), f(zeta(r)))| <= kappa exp(-gamma |s - r|)``.
    """
    _nonneg(kappa=kappa)
    _positive(gamma=gamma, M_f=M_f, A_ft=A_ft, t=t)
    value = math.sqrt(360 * _SQRT_2 * kappa * M_f / (_SQRT_PI * A_ft**1.5 * gamma**2)) * t**-0.25
    valid_from = (2 * _SQRT_2 * kappa / (5 * gamma**2 * M_f * math.sqrt(math.pi * A_ft))) ** (2 / 3)
    return BoundReport(
        theorem_id=TheoremId.CONTACT,
        value=value,
        valid_from=valid_from,
        at=t,
        inputs={"kappa": kappa, "gamma": gamma, "M_f": M_f, "A_ft": A_ft, "t": t},
    )


def contact_multivariate_bound(p, kappa, gamma, A_ft, alpha, t, psi_ft, C=1.0):
    """Contact-process analogue of :func:`voter_multivariate_bound`."""
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    _nonneg(kappa=kappa)
    _positive(gamma=gamma, A_ft=A_ft, t=t, psi_ft=psi_ft)
    value = 0.0 if kappa == 0 else _multivariate_value(A_ft, alpha, t, psi_ft, C)
    return BoundReport(
        theorem_id=TheoremId.CONTACT_MULTIVARIATE,
        value=value,
        valid_from=_multivariate_threshold(A_ft, alpha, t, psi_ft),
        at=t,
        inputs={"p": p, "kappa": kappa, "gamma": gamma, "A_ft": A_ft, "alpha": alpha, "t": t, "psi_ft": psi_ft, "C": C},
        constant_tracked=False,
    )


def contact_segment_cov_bound(kappa, gamma, m):
    """Bound ``2 kappa m / gamma^2`` on the off-diagonal segment covariance sum."""
    _nonneg(kappa=kappa, m=m)
    _positive(gamma=gamma)
    return 2 * kappa * m / gamma**2


def contact_window_cov_bound(kappa, gamma, b):
    """Bound ``2 kappa (b/gamma + 1/gamma^2)`` on ``Cov(D_r, D_s)`` when ``|r - s| >= t - b``."""
    _nonneg(kappa=kappa, b=b)
    _positive(gamma=gamma)
    return 2 * kappa * (b / gamma + 1 / gamma**2)


def contact_cov_lemma_bounds(kappa, gamma, m=None, b=None):
    """Evaluate the segment bound (given ``m``) or the window bound (given ``b``)."""
    if (m is None) == (b is None):
        raise DomainError("pass exactly one of m or b")
    if m is not None:
        return contact_segment_cov_bound(kappa, gamma, m)
    return contact_window_cov_bound(kappa, gamma, b)


def voter_segment_cov_bound(theta, m, EL2):
    """Bound ``theta(1-theta)(m-1) E[L^2]`` on the voter segment covariance sum."""
    _nonneg(EL2=EL2)
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m}")
    return theta * (1 - theta) * (m - 1) * EL2


def voter_window_cov_bound(theta, EL, EL2, b):
    """Bound ``theta(1-theta)(E[L^2] + 2 b E[L])`` on ``Cov(T_r^t, T_s^t)``."""
    _nonneg(EL=EL, EL2=EL2, b=b)
    return theta * (1 - theta) * (EL2 + 2 * b * EL)


def voter_gershgorin(theta, A_list, EL, EL2, t, b):
    """Diagonal-dominance test for the voter window covariance matrix.

    With ``p = len(A_list)`` windows pairwise at least ``t - b`` apart, the
    matrix is invertible when
    ``t min A - (p-1) theta(1-theta)(E[L^2] + 2 b E[L]) > 0`` and then
    ``|Sigma^{-1}|_inf`` is at most the reciprocal of that margin. The
    comparison is strict, so a ``b`` at the threshold is not accepted.
    """
    A = np.atleast_1d(np.asarray(A_list, dtype=float))
    _positive(t=t)
    p = A.size
    if p == 1:
        return InverseBound(True, 1 / (t * float(A[0])))
    margin = t * float(A.min()) - (p - 1) * voter_window_cov_bound(theta, EL, EL2, b)
    if margin > 0:
        return InverseBound(True, 1 / margin)
    return InverseBound(False, None)


def voter_gershgorin_threshold(theta, A_list, EL, EL2, t):
    """Supremum of admissible ``b``; any strictly smaller ``b`` passes."""
    A = np.atleast_1d(np.asarray(A_list, dtype=float))
    p = A.size
    q = theta * (1 - theta)
    return (t * A.min() - (p - 1) * q * EL2) / (2 * (p - 1) * q * EL)


def contact_gershgorin(kappa, gamma, A_ft, t, b, p=2):
    """Diagonal-dominance test for ``p`` contact windows at least ``t - b`` apart.

    Accepts when ``t A - 2 kappa (p-1)(b/gamma + 1/gamma^2) > 0``; the bound
    is the reciprocal of that margin.
    """
    _positive(A_ft=A_ft, t=t)
    if p == 1:
        return InverseBound(True, 1 / (t * A_ft))
    margin = t * A_ft - (p - 1) * contact_window_cov_bound(kappa, gamma, b)
    if margin > 0:
        return InverseBound(True, 1 / margin)
    return InverseBound(False, None)


def contact_gershgorin_threshold(kappa, gamma, A_ft, t, p=2):
    return t * A_ft * gamma / (2 * (p - 1) * kappa) - 1 / gamma
