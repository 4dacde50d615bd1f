"""Run a configured experiment: simulate, standardise, measure d1, evaluate the bound."""
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from ..bounds import (
    BoundReport,
    TheoremId,
    contact_bound,
    contact_cov_lemma_bounds,
    contact_gershgorin,
    contact_multivariate_bound,
    field_inverse_bound,
    gershgorin_check,
    inverse_sqrt,
    max_abs,
    stein_bound_multivariate,
    stein_bound_univariate,
    theorem21_bound,
    theorem22_bound,
    voter_bound,
    voter_gershgorin,
    voter_multivariate_bound,
    voter_segment_cov_bound,
)
from ..lattice.decay import DecayFitError, empirical_decay_fit
from ..lattice.ising import IsingParams, ising_sample
from ..lattice.percolation import PercolationParams, percolation_sample
from ..particles.common import segment_cov_sum, variance_rate
from ..particles.contact import ContactParams, CylFunction, contact_decay_fit, contact_simulate
from ..particles.voter import VoterParams, last_exit_stats, voter_occupation
from ..stats import d1_to_standard_normal, empirical_cov_matrix, multivariate_smooth_check, standardize
from ..synthetic import CommonShock
from .config import config_hash, grid_meaning

N_SE = 4.0

# flat per-grid-point fields, in CSV column order
RECORD_FIELDS = (
    "N",
    "p",
    "d1",
    "d1_se",
    "theorem_id",
    "bound",
    "valid_from",
    "applicable",
    "constant_tracked",
    "dominates",
    "kappa",
    "rate",
    "A_est",
    "A_se",
    "smooth_proxy",
    "smooth_proxy_se",
    "note",
    "runtime_s",
)
RUNTIME_FIELDS = ("runtime_s",)


class SimulationError(RuntimeError):
    """A sampler or estimator failed while running a grid point."""


@dataclass
class GridRecord:
    grid_value: float
    fields: dict
    extras: dict = field(default_factory=dict)
    bound_report: dict = None

    def to_dict(self):
        return {"grid_value": self.grid_value, **self.fields, "bound_report": self.bound_report, "extras": self.extras}


@dataclass
class ExperimentReport:
    model: str
    grid_name: str
    provenance: dict
    records: list

    @property
    def violations(self):
        """Grid values where a tracked, applicable bound fails to dominate."""
        return [r.grid_value for r in self.records if r.fields["dominates"] is False]

    @property
    def exit_code(self):
        return 1 if self.violations else 0

    def to_dict(self, include_runtime=True):
        recs = []
        for r in self.records:
            d = r.to_dict()
            if not include_runtime:
                for k in RUNTIME_FIELDS:
                    d.pop(k, None)
            recs.append(d)
        return {
            "model": self.model,
            "grid_name": self.grid_name,
            "provenance": self.provenance,
            "records": recs,
            "exit_code": self.exit_code,
        }


def _blank():
    return {k: None for k in RECORD_FIELDS}


def _judge(fields, report, estimate, se):
    """Fill bound columns; ``dominates`` stays None unless the comparison is meaningful."""
    fields.update(
        theorem_id=report.theorem_id,
        bound=report.value,
        valid_from=report.valid_from,
        applicable=report.applicable,
        constant_tracked=report.constant_tracked,
    )
    if report.applicable and report.constant_tracked:
        fields["dominates"] = bool(report.value >= estimate + N_SE * se)


def _d1(column, seed):
    z = standardize(column).values
    return d1_to_standard_normal(z, seed=seed)


def _sigma_summary(S):
    sigma = empirical_cov_matrix(S)
    inv_half = inverse_sqrt(sigma)
    g = gershgorin_check(sigma)
    return sigma, inv_half, {"sigma": sigma.tolist(), "gershgorin": g._asdict()}


def _smooth(S, inv_half, seed):
    x = (S - S.mean(axis=0)) @ inv_half.T
    return multivariate_smooth_check(x, seed=seed)


# ---------------------------------------------------------------------------
# per-model grid points


def _lattice_point(cfg, n):
    model, params, seed = cfg["model"], dict(cfg.get("params", {})), cfg.get("seed", 0)
    N = cfg["replicates"]
    anchors = cfg.get("anchors")
    alpha = cfg.get("alpha")
    if model == "ising":
        lp = IsingParams(seed=seed, **params)
        sm = ising_sample(lp, anchors=anchors, n=n, replicates=N, alpha=alpha)
    else:
        lp = PercolationParams(seed=seed, **params)
        sm = percolation_sample(lp, anchors=anchors, n=n, replicates=N, alpha=alpha)
    d = lp.dim
    fields, extras = _blank(), {"sampler": sm.metadata}
    S = sm.values
    est = _d1(S[:, 0], seed)
    A = variance_rate(S[:, 0], n**d)
    fields.update(N=sm.N, p=sm.p, d1=est.value, d1_se=est.se, A_est=A.value, A_se=A.se)
    extras["mean"] = float(S[:, 0].mean())
    extras["mean_se"] = float(S[:, 0].std(ddof=1) / math.sqrt(sm.N))
    extras["lag_cov"] = sm.lag_cov.to_dict()
    report = None
    try:
        fit = empirical_decay_fit(sm, noise_sigmas=cfg.get("noise_sigmas", 8.0))
    except DecayFitError as exc:
        fields["note"] = f"bound unavailable: decay fit failed ({exc})"
        return fields, extras, None
    fields.update(kappa=fit.kappa0, rate=fit.lambda_)
    extras["decay_fit"] = fit.to_dict()
    report = theorem21_bound(fit.params, 1.0, n, A.value)
    _judge(fields, report, est.value, est.se)
    if sm.p > 1:
        sigma, inv_half, extras["multivariate"] = _sigma_summary(S)
        psi = n ** (d / 2) * max_abs(inv_half)
        A_mean = float(np.mean(np.diag(sigma))) / n**d
        multi = theorem22_bound(fit.params, 1.0, n, sm.p, alpha, A_mean, psi)
        check = _smooth(S, inv_half, seed)
        inv = field_inverse_bound(fit.params, n, sm.p, alpha, A_mean)
        extras["multivariate"].update(bound=multi.to_dict(), smooth=check.to_dict(), psi=psi,
                                      lemma_gershgorin=inv._asdict())
        fields.update(smooth_proxy=check.proxy, smooth_proxy_se=check.proxy_se)
    return fields, extras, report


def _voter_point(cfg, t):
    params = dict(cfg.get("params", {}))
    seed = cfg.get("seed", 0)
    method = params.pop("method", "graphical")
    walks = params.pop("walk_replicates", 20000)
    vp = VoterParams(seed=seed, t=float(t), **params)
    m = cfg.get("segments", 4)
    starts = cfg.get("starts")
    sm = voter_occupation(vp, cfg["replicates"], m=m, starts=starts, method=method)
    T = sm.values
    fields, extras = _blank(), {}
    est = _d1(T[:, 0], seed)
    A = variance_rate(T[:, 0], t)
    fields.update(N=sm.N, p=sm.p, d1=est.value, d1_se=est.se, A_est=A.value, A_se=A.se)
    extras["mean"] = float(T[:, 0].mean())
    extras["mean_se"] = float(T[:, 0].std(ddof=1) / math.sqrt(sm.N))
    extras["mean_target"] = vp.theta * t
    seg = segment_cov_sum(sm.segments)
    extras["segment_cov_sum"] = seg.to_dict()
    if vp.dim < 3:
        fields["note"] = "walk is recurrent for d < 3; no bound"
        return fields, extras, None
    horizon = 2 * (vp.s + t)
    walk = last_exit_stats(vp.dim, horizon=horizon, replicates=walks, seed=seed)
    extras["last_exit"] = walk.to_dict()
    extras["segment_lemma_bound"] = voter_segment_cov_bound(vp.theta, m, walk.EL2)
    extras["segment_lemma_holds"] = bool(seg.value <= extras["segment_lemma_bound"] + N_SE * math.hypot(
        seg.se, vp.theta * (1 - vp.theta) * (m - 1) * walk.EL2_se))
    if vp.dim < 7:
        fields["note"] = "bound needs d >= 7"
        return fields, extras, None
    report = voter_bound(vp.theta, A.value, walk.EL2, t)
    _judge(fields, report, est.value, est.se)
    fields["note"] = "approximate: finite torus and estimated E[L^2]"
    if sm.p > 1:
        alpha = cfg["alpha"]
        sigma, inv_half, extras["multivariate"] = _sigma_summary(T)
        psi = math.sqrt(t) * max_abs(inv_half)
        A_list = np.diag(sigma) / t
        multi = voter_multivariate_bound(sm.p, vp.theta, A_list, alpha, t, psi)
        gap = min(abs(a - b) for i, a in enumerate(starts) for b in starts[i + 1 :])
        b = max(0.0, t - gap)
        full = last_exit_stats(vp.dim, horizon=max(horizon, 100.0), replicates=walks, seed=seed)
        inv = voter_gershgorin(vp.theta, A_list, full.EL, full.EL2, t, b)
        check = _smooth(T, inv_half, seed)
        extras["multivariate"].update(bound=multi.to_dict(), smooth=check.to_dict(), psi=psi,
                                      lemma_gershgorin={"b": b, **inv._asdict()})
        fields.update(smooth_proxy=check.proxy, smooth_proxy_se=check.proxy_se)
    return fields, extras, report


def _contact_point(cfg, t):
    params = dict(cfg.get("params", {}))
    seed = cfg.get("seed", 0)
    base = params.pop("base_sets", [[0]])
    weights = params.pop("weights", None)
    lag_step = params.pop("lag_step", 0.5)
    max_lag = params.pop("max_lag", 8.0)
    cp = ContactParams(seed=seed, t=float(t), f_spec=CylFunction(tuple(map(tuple, base)), weights), **params)
    m = cfg.get("segments", 4)
    starts = cfg.get("starts")
    N = cfg["replicates"]
    span = (max(starts) if starts else cp.s) + t
    sm = contact_simulate(cp, N, m=m, starts=starts, keep_trajectories=True, record_until=max(span, 4 * max_lag))
    D = sm.values
    fields, extras = _blank(), {"M_f": cp.f_spec.M_f}
    est = _d1(D[:, 0], seed)
    A = variance_rate(D[:, 0], t)
    fields.update(N=sm.N, p=sm.p, d1=est.value, d1_se=est.se, A_est=A.value, A_se=A.se)
    extras["mean"] = float(D[:, 0].mean())
    seg = segment_cov_sum(sm.segments)
    extras["segment_cov_sum"] = seg.to_dict()
    notes = []
    if N < 1000:
        notes.append(f"decay fit from {N} < 1000 trajectories")
    try:
        lags = np.arange(0.0, max_lag + 1e-9, lag_step)
        kappa, gamma = contact_decay_fit(sm.trajectories, lags, noise_sigmas=cfg.get("noise_sigmas", 8.0),
                                         min_replicates=min(N, 1000))
    except DecayFitError as exc:
        fields["note"] = "; ".join(notes + [f"bound unavailable: decay fit failed ({exc})"])
        return fields, extras, None
    fields.update(kappa=kappa, rate=gamma)
    extras["segment_lemma_bound"] = contact_cov_lemma_bounds(kappa, gamma, m=m)
    extras["segment_lemma_holds"] = bool(seg.value <= extras["segment_lemma_bound"] + N_SE * seg.se)
    report = contact_bound(kappa, gamma, cp.f_spec.M_f, A.value, t)
    _judge(fields, report, est.value, est.se)
    if sm.p > 1:
        alpha = cfg["alpha"]
        sigma, inv_half, extras["multivariate"] = _sigma_summary(D)
        psi = math.sqrt(t) * max_abs(inv_half)
        A_ft = float(np.mean(np.diag(sigma))) / t
        multi = contact_multivariate_bound(sm.p, kappa, gamma, A_ft, alpha, t, psi)
        gap = min(abs(a - b) for i, a in enumerate(starts) for b in starts[i + 1 :])
        inv = contact_gershgorin(kappa, gamma, A_ft, t, max(0.0, t - gap), p=sm.p)
        check = _smooth(D, inv_half, seed)
        extras["multivariate"].update(bound=multi.to_dict(), smooth=check.to_dict(), psi=psi,
                                      lemma_gershgorin=inv._asdict())
        fields.update(smooth_proxy=check.proxy, smooth_proxy_se=check.proxy_se)
    if notes:
        fields["note"] = "; ".join(notes)
    return fields, extras, report


def _synthetic_point(cfg, m):
    params = dict(cfg.get("params", {}))
    seed = cfg.get("seed", 0)
    p = params.get("p", 1)
    if "B" in params:
        if p != 1:
            raise ValueError("params.B selects the univariate design; use rho/tau for p > 1")
        design = CommonShock.with_bound(m, params["B"])
    else:
        design = CommonShock(m=m, p=p, rho=params.get("rho", 0.0), tau=params.get("tau", 0.0))
    S = design.sample(cfg["replicates"], seed=seed)
    fields, extras = _blank(), {"design": design.to_dict()}
    fields.update(N=S.shape[0], p=p, A_est=1.0, A_se=0.0)
    if p == 1:
        # exact unit variance and zero mean: population standardisation is the identity
        est = d1_to_standard_normal(S[:, 0], seed=seed)
        fields.update(d1=est.value, d1_se=est.se)
        value = stein_bound_univariate(design.B, float(design.within_offdiag[0]))
        report = BoundReport(TheoremId.STEIN_UNIVARIATE, value, 0.0, m,
                             {"B": design.B, "offdiag_cov_sum": float(design.within_offdiag[0])})
        _judge(fields, report, est.value, est.se)
        return fields, extras, report
    sigma = design.sigma
    inv_half = inverse_sqrt(sigma)
    check = multivariate_smooth_check(S @ inv_half.T, seed=seed)
    est = d1_to_standard_normal(S[:, 0], seed=seed)
    fields.update(d1=est.value, d1_se=est.se, smooth_proxy=check.proxy, smooth_proxy_se=check.proxy_se)
    value = stein_bound_multivariate(p, design.B, sigma, design.within_offdiag)
    report = BoundReport(TheoremId.STEIN_MULTIVARIATE, value, 0.0, m,
                         {"p": p, "B": design.B, "sigma": sigma.tolist(),
                          "within_coord_offdiag": design.within_offdiag.tolist()})
    _judge(fields, report, check.proxy, check.proxy_se)
    extras["smooth"] = check.to_dict()
    fields["note"] = "bound compared with the smooth-function proxy"
    return fields, extras, report


_POINT = {
    "ising": _lattice_point,
    "percolation": _lattice_point,
    "voter": _voter_point,
    "contact": _contact_point,
    "synthetic": _synthetic_point,
}


def _grid_value(model, g):
    return int(g) if model in ("ising", "percolation", "synthetic") else float(g)


def run(cfg, progress=None):
    """Run every grid point of a validated config and assemble the report.

    Grid points run one after another in sorted order; each sampler
    parallelises over replicates. Any exception from a sampler or estimator
    is re-raised as :class:`SimulationError`.
    """
    model = cfg["model"]
    provenance = {
        "config_hash": config_hash(cfg),
        "seed": cfg.get("seed", 0),
        "version": __version__,
        "quick": bool(cfg.get("quick", False)),
    }
    records = []
    for g in sorted(_grid_value(model, g) for g in cfg["grid"]):
        t0 = time.perf_counter()
        try:
            fields, extras, report = _POINT[model](cfg, g)
        except Exception as exc:  # noqa: BLE001 - every failure maps to exit code 3
            raise SimulationError(f"{model} at {grid_meaning(model)}={g}: {type(exc).__name__}: {exc}") from exc
        fields["runtime_s"] = time.perf_counter() - t0
        rec = GridRecord(g, _clean(fields), _clean(extras), report.to_dict() if report else None)
        records.append(rec)
        if progress:
            progress(rec)
    return ExperimentReport(model, grid_meaning(model), provenance, records)


def _clean(obj):
    """Make nested numpy values JSON-friendly."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj
