"""Directly computable optimality diagnostics for a convex fit.

Everything here evaluates finite-sample characterization objects for a
(dataset, fit) pair: the cumulative gap process, the tent-perturbation
functional, per-segment residual sums with their sign pattern, the gap
between each affine piece and the plain least-squares line through the same
points, and an aggregate pass/fail report.  The functions accept either a
:class:`ConvexFit` or a raw fitted-value array, so they can also reject fits
that were not produced by the solver.

Sign convention: the gap process is oriented as fitted-minus-observed, which
makes it nonnegative across the design with zeros at the kinks exactly when
the fit is optimal.  Residual sums (tent functional, segment sums) keep the
observed-minus-fitted orientation of the inequalities they certify.  All
sums carry dataset weights so merged duplicates count with multiplicity.
"""

import numpy as np
from dataclasses import dataclass

from .model import (
    ConvexFit,
    Dataset,
    DEFAULT_CONFIG,
    ToleranceConfig,
    cone_violation,
    segment_slopes,
)
from .solver import certificate_scale, kkt_sums


def _fit_view(dataset: Dataset, fit_or_values, config: ToleranceConfig):
    """Fitted values plus kink indices, derived for raw arrays."""
    if isinstance(fit_or_values, ConvexFit):
        if fit_or_values.n != dataset.n:
            raise ValueError("fit and dataset lengths do not match")
        return fit_or_values.fitted, tuple(fit_or_values.kinks)
    values = np.asarray(fit_or_values, dtype=float)
    if values.shape != dataset.x.shape:
        raise ValueError("fitted values must match the dataset length")
    s = segment_slopes(dataset.x, values)
    kink_abs = config.kink_tol * dataset.response_scale
    kinks = tuple(int(i + 1) for i, d in enumerate(s[1:] - s[:-1]) if d > kink_abs)
    return values, kinks


@dataclass(frozen=True)
class GProcess:
    """Cumulative gap process sampled at the design points."""

    values: np.ndarray
    min_value: float
    kink_values: np.ndarray
    flagged_points: tuple[int, ...]
    flagged_kinks: tuple[int, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        k = np.asarray(self.kink_values, dtype=float)
        k.setflags(write=False)
        object.__setattr__(self, "kink_values", k)


def g_process(dataset: Dataset, fit_or_values, config: ToleranceConfig = DEFAULT_CONFIG) -> GProcess:
    """Evaluate the gap process G(x) = sum_{x_i <= x} w_i (fit_i - y_i)(x - x_i).

    For an optimal fit G is nonnegative at every design point and vanishes at
    every kink; points violating either property (beyond the normalized
    tolerance) are flagged.
    """
    fitted, kinks = _fit_view(dataset, fit_or_values, config)
    x, w = dataset.x, dataset.weights
    excess = w * (fitted - dataset.y)
    cum_e = np.cumsum(excess)
    cum_ex = np.cumsum(excess * x)
    values = x * cum_e - cum_ex
    tol = config.kkt_tol * certificate_scale(dataset)
    kink_idx = np.asarray(kinks, dtype=int)
    kink_values = values[kink_idx] if kink_idx.size else np.empty(0)
    flagged_points = tuple(int(i) for i in np.flatnonzero(values < -tol))
    flagged_kinks = tuple(int(j) for j in kink_idx[np.abs(kink_values) > tol])
    return GProcess(
        values=values,
        min_value=float(values.min()),
        kink_values=kink_values,
        flagged_points=flagged_points,
        flagged_kinks=flagged_kinks,
    )


def tent_weight(u: float, v: float, x):
    """Tent-shaped perturbation weight: 1 outside [u, v], dipping to -1 at the
    midpoint, with value 1 at u and v."""
    x = np.asarray(x, dtype=float)
    return 1.0 - np.maximum(2.0 - (4.0 / (v - u)) * np.abs(x - 0.5 * (u + v)), 0.0)


def tent_functional(dataset: Dataset, fit_or_values, u: float, v: float,
                    config: ToleranceConfig = DEFAULT_CONFIG) -> float:
    """Average residual against the tent perturbation over [u, v].

    Nonpositive whenever u < v are both kinks of an optimal fit; for other
    (u, v) the value is informational only.
    """
    if not (u < v):
        raise ValueError("need u < v")
    if u < 0.0 or v > 1.0:
        raise ValueError("u and v must lie in [0, 1]")
    fitted, _ = _fit_view(dataset, fit_or_values, config)
    resid = dataset.y - fitted
    f = tent_weight(u, v, dataset.x)
    return float(np.sum(dataset.weights * f * resid) / dataset.total_weight)


@dataclass(frozen=True)
class SegmentReport:
    """Residual sums and least-squares comparison for one affine piece.

    ``t1``/``t2`` are the closed-interval residual sums (plain and
    x-weighted); for an optimal fit both are nonpositive while the
    open-interval versions are nonnegative, the endpoint residuals are
    nonpositive, and ``sup_gap`` obeys ``gap_bound``.
    """

    u: float
    v: float
    first_index: int
    last_index: int
    t1: float
    t2: float
    open_t1: float
    open_t2: float
    endpoint_resid_u: float
    endpoint_resid_v: float
    ols_intercept: float
    ols_slope: float
    sup_gap: float
    gap_bound: float
    note: str = ""


def segment_reports(dataset: Dataset, fit_or_values,
                    config: ToleranceConfig = DEFAULT_CONFIG) -> list[SegmentReport]:
    """One report per maximal affine piece of the fit (kink-to-kink runs,
    boundary pieces included).  Pieces with fewer than two design points are
    skipped with a note entry."""
    fitted, kinks = _fit_view(dataset, fit_or_values, config)
    x, y, w = dataset.x, dataset.y, dataset.weights
    resid = y - fitted
    boundaries = [0, *kinks, dataset.n - 1]
    reports = []
    for k1, k2 in zip(boundaries[:-1], boundaries[1:]):
        if k2 - k1 < 1:
            reports.append(
                SegmentReport(
                    u=float(x[k1]), v=float(x[k2]), first_index=k1, last_index=k2,
                    t1=0.0, t2=0.0, open_t1=0.0, open_t2=0.0,
                    endpoint_resid_u=0.0, endpoint_resid_v=0.0,
                    ols_intercept=np.nan, ols_slope=np.nan,
                    sup_gap=np.nan, gap_bound=np.nan,
                    note="skipped: fewer than 2 design points",
                )
            )
            continue
        sl = slice(k1, k2 + 1)
        xw, yw, ww, rw = x[sl], y[sl], w[sl], resid[sl]
        wt = ww.sum()
        xbar = float(np.sum(ww * xw) / wt)
        ybar = float(np.sum(ww * yw) / wt)
        sxx = float(np.sum(ww * (xw - xbar) ** 2))
        slope = float(np.sum(ww * (xw - xbar) * (yw - ybar)) / sxx)
        intercept = ybar - slope * xbar
        t1 = float(np.sum(ww * rw))
        t2 = float(np.sum(ww * xw * rw))
        inner = slice(k1 + 1, k2)
        open_t1 = float(np.sum(w[inner] * resid[inner]))
        open_t2 = float(np.sum(w[inner] * x[inner] * resid[inner]))
        gaps = np.abs(intercept + slope * xw - fitted[sl])
        bound = abs(x[k2] - x[k1]) * abs((xbar * t1 - t2) / sxx) + abs(t1) / wt
        reports.append(
            SegmentReport(
                u=float(x[k1]), v=float(x[k2]), first_index=k1, last_index=k2,
                t1=t1, t2=t2, open_t1=open_t1, open_t2=open_t2,
                endpoint_resid_u=float(rw[0] * w[k1]), endpoint_resid_v=float(rw[-1] * w[k2]),
                ols_intercept=intercept, ols_slope=slope,
                sup_gap=float(gaps.max()), gap_bound=float(bound),
            )
        )
    return reports


@dataclass(frozen=True)
class ConditionResult:
    name: str
    passed: bool
    worst: float  # normalized amount by which the condition is violated


@dataclass(frozen=True)
class KktReport:
    """Pass/fail summary of every characterization condition."""

    conditions: tuple[ConditionResult, ...]
    passed: bool
    scale: float

    def condition(self, name: str) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)


def characterization_report(dataset: Dataset, fit_or_values,
                            config: ToleranceConfig = DEFAULT_CONFIG) -> KktReport:
    """Check every characterization condition for any (dataset, fit) pair.

    Conditions: cone membership, orthogonality of the fit to its residuals,
    zero residual sum and zero x-weighted residual sum, nonnegative
    cumulative gap sums with equality at kinks and at the right end, and the
    gap process sign pattern.  Violations are normalized by
    ``total_weight * (1 + max|y|)`` (orthogonality by one more response-scale
    factor) and compared against ``config.kkt_tol``.
    """
    fitted, kinks = _fit_view(dataset, fit_or_values, config)
    x, y, w = dataset.x, dataset.y, dataset.weights
    tol = config.kkt_tol
    scale = certificate_scale(dataset)
    resid = y - fitted

    results = []

    def add(name, violation):
        violation = float(max(0.0, violation))
        results.append(ConditionResult(name, violation <= tol, violation))

    kink_abs = config.kink_tol * dataset.response_scale
    cone_gap = cone_violation(x, fitted)
    results.append(ConditionResult("cone", cone_gap <= kink_abs, float(max(0.0, cone_gap))))

    add("fit_residual_orthogonality",
        abs(np.sum(w * fitted * resid)) / (scale * dataset.response_scale))
    add("residual_sum_zero", abs(np.sum(w * resid)) / scale)
    add("x_residual_sum_zero", abs(np.sum(w * x * resid)) / scale)

    sums = kkt_sums(dataset, fitted)
    cum_norm = sums.cum / scale
    add("cumulative_sums_nonnegative", -cum_norm.min() if cum_norm.size else 0.0)
    eq_idx = np.asarray([*(k - 1 for k in kinks), cum_norm.size - 1], dtype=int)
    add("cumulative_sums_zero_at_kinks", np.max(np.abs(cum_norm[eq_idx])))
    add("total_mass_match", abs(sums.total_gap) / scale)

    gp = g_process(dataset, fit_or_values, config)
    add("gap_process_nonnegative", -gp.min_value / scale)
    add("gap_process_zero_at_kinks",
        np.max(np.abs(gp.kink_values)) / scale if gp.kink_values.size else 0.0)

    return KktReport(
        conditions=tuple(results),
        passed=all(c.passed for c in results),
        scale=scale,
    )
