"""Closed-form constants, identities and bound formulas."""
from .constants import (
    CovDecayParams,
    DecayConstants,
    a_limit,
    a_limit_truncated,
    a_n_exponential,
    a_n_from_covariance,
    decay_constants,
    exponential_covariance,
)
from .field import (
    BlockChoice,
    BlockSpec,
    InverseBound,
    block_decompose,
    effective_alpha,
    field_inverse_bound,
    gershgorin_check,
    lemma_cov_sum_bound,
    lemma_cross_block_bound,
    min_l_guarantee,
    optimal_real_l,
    optimize_block_size,
    theorem21_bound,
    theorem21_constants,
    theorem22_bound,
)
from .identities import sum_identity_u, sum_identity_v, sum_identity_w
from .particles import (
    contact_bound,
    contact_cov_lemma_bounds,
    contact_gershgorin,
    contact_gershgorin_threshold,
    contact_multivariate_bound,
    contact_segment_cov_bound,
    contact_window_cov_bound,
    voter_bound,
    voter_gershgorin,
    voter_gershgorin_threshold,
    voter_multivariate_bound,
    voter_segment_cov_bound,
    voter_window_cov_bound,
)
from .report import BoundReport, DomainError, TheoremId
from .stein import (
    NotPositiveDefinite,
    inverse_sqrt,
    max_abs,
    stein_bound_multivariate,
    stein_bound_univariate,
)
