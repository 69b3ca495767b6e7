"""Active-set solver for the convex least-squares fit.

The fit is the projection of the response vector onto the polyhedral cone of
sequences with nondecreasing divided differences.  The solver works over
candidate kink sets: starting from the global affine fit it repeatedly solves
the unconstrained hinge regression on the current kink set, adds the design
index whose cumulative certificate sum is most negative, and resolves
feasibility by a line search toward the new coefficients, dropping hinges
whose coefficients reach zero (most binding first).  Termination is certified
by the cumulative-sum conditions themselves, not by the iteration path:

    cum[p] = sum_{k < p} (prefix_fitted_k - prefix_response_k) * (x_{k+1} - x_k)

must be nonnegative for every p and zero at every kink and at the right end,
and the total fitted mass must match the total response mass.  All sums carry
the dataset weights so merged duplicate points count with their multiplicity.

Normal equations are assembled in O(k^2) from suffix sums of the weighted
design moments; if their condition estimate exceeds 1e12 the solve falls back
to an orthogonal (lstsq) path on the explicit hinge design.
"""

import numpy as np
from dataclasses import dataclass

from .model import (
    ConvexFit,
    Dataset,
    DEFAULT_CONFIG,
    ToleranceConfig,
    _EPS,
)

_COND_LIMIT = 1e12
_TIE_WINDOW = 1e-12


@dataclass(frozen=True)
class KktSums:
    """Cumulative certificate sums for a (dataset, fitted) pair.

    ``cum[p-1]`` is the weighted sum over prefixes ending before design point
    p (p = 1..n-1); ``total_gap`` is the difference between total fitted and
    total response mass.  A fit is optimal iff total_gap == 0, every entry of
    ``cum`` is nonnegative, and entries at kinks and at p = n-1 vanish.
    """

    cum: np.ndarray
    total_gap: float

    def __post_init__(self):
        c = np.asarray(self.cum, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "cum", c)


@dataclass(frozen=True)
class SolverTrace:
    iterations: int
    kink_history: tuple[tuple[int, ...], ...]
    final_objective: float
    certificate: KktSums


class SolverError(RuntimeError):
    """Raised when the solver cannot certify a fit; carries the trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


def kkt_sums(dataset: Dataset, fit_or_values) -> KktSums:
    """Exact cumulative certificate sums for any fitted-value vector."""
    fitted = _fitted_of(fit_or_values)
    if fitted.shape != dataset.x.shape:
        raise ValueError("fitted values must match the dataset length")
    excess = dataset.weights * (fitted - dataset.y)
    prefix = np.cumsum(excess)
    cum = np.cumsum(prefix[:-1] * np.diff(dataset.x))
    return KktSums(cum=cum, total_gap=float(prefix[-1]))


def certificate_scale(dataset: Dataset) -> float:
    """Normalizer for certificate sums: total weight times (1 + max|y|)."""
    return dataset.total_weight * dataset.response_scale


def _fitted_of(fit_or_values) -> np.ndarray:
    if isinstance(fit_or_values, ConvexFit):
        return fit_or_values.fitted
    return np.asarray(fit_or_values, dtype=float)


class _HingeSystem:
    """Weighted normal equations over hinge bases, assembled from suffix sums."""

    def __init__(self, dataset: Dataset):
        x, y, w = dataset.x, dataset.y, dataset.weights
        self.x = x
        self.y = y
        self.w = w
        self.n = x.size
        # suffix[i] = sum over points with index >= i; last entry is 0
        self.s0 = self._suffix(w)
        self.s1 = self._suffix(w * x)
        self.s2 = self._suffix(w * x * x)
        self.sy = self._suffix(w * y)
        self.sxy = self._suffix(w * x * y)
        self.fallbacks = 0

    @staticmethod
    def _suffix(values):
        out = np.zeros(values.size + 1)
        np.cumsum(values[::-1], out=out[1:])
        return out[::-1].copy()

    def solve(self, kinks: np.ndarray) -> np.ndarray:
        """Coefficients (intercept, base slope, hinge coeffs) on a kink set."""
        k = kinks.size
        xj = self.x[kinks]
        tail = kinks + 1
        gram = np.empty((k + 2, k + 2))
        gram[0, 0] = self.s0[0]
        gram[0, 1] = gram[1, 0] = self.s1[0]
        gram[1, 1] = self.s2[0]
        rhs = np.empty(k + 2)
        rhs[0] = self.sy[0]
        rhs[1] = self.sxy[0]
        if k:
            h0 = self.s1[tail] - xj * self.s0[tail]
            h1 = self.s2[tail] - xj * self.s1[tail]
            gram[0, 2:] = h0
            gram[2:, 0] = h0
            gram[1, 2:] = h1
            gram[2:, 1] = h1
            later = np.maximum.outer(kinks, kinks) + 1
            xa = xj[:, None]
            xb = xj[None, :]
            gram[2:, 2:] = self.s2[later] - (xa + xb) * self.s1[later] + xa * xb * self.s0[later]
            rhs[2:] = self.sxy[tail] - xj * self.sy[tail]
        cond = np.linalg.cond(gram)
        if np.isfinite(cond) and cond <= _COND_LIMIT:
            return np.linalg.solve(gram, rhs)
        return self.solve_orthogonal(kinks)

    def solve_orthogonal(self, kinks: np.ndarray) -> np.ndarray:
        # lstsq on the explicit weighted design; used when the normal
        # equations are too ill-conditioned (clustered kinks)
        self.fallbacks += 1
        root_w = np.sqrt(self.w)
        cols = [np.ones(self.n), self.x]
        for j in kinks:
            cols.append(np.maximum(self.x - self.x[j], 0.0))
        design = np.column_stack(cols) * root_w[:, None]
        coef, _, rank, _ = np.linalg.lstsq(design, root_w * self.y, rcond=None)
        if rank < design.shape[1]:
            raise SolverError(
                f"hinge design is numerically singular (rank {rank} of {design.shape[1]})"
            )
        return coef

    def fitted(self, kinks: np.ndarray, coef: np.ndarray) -> np.ndarray:
        # forward recurrence over segments: value increments are slope * gap,
        # so recomputed divided differences stay within local rounding even
        # across tiny design gaps (a direct hinge-sum evaluation cancels
        # catastrophically there)
        slopes = np.full(self.n - 1, coef[1])
        if kinks.size:
            bends = np.zeros(self.n - 1)
            bends[kinks] = coef[2:]
            slopes += np.cumsum(bends)
        out = np.empty(self.n)
        out[0] = coef[0] + coef[1] * self.x[0]
        np.cumsum(slopes * np.diff(self.x), out=out[1:])
        out[1:] += out[0]
        return out


def _certificate_report(dataset, fitted, kinks, kkt_tol):
    sums = kkt_sums(dataset, fitted)
    scale = certificate_scale(dataset)
    cum_norm = sums.cum / scale
    checks = {
        "min_cum": float(cum_norm.min()) if cum_norm.size else 0.0,
        "total_gap": abs(sums.total_gap) / scale,
        "end_eq": abs(cum_norm[-1]) if cum_norm.size else 0.0,
        "kink_eq": float(np.max(np.abs(cum_norm[np.asarray(kinks, dtype=int) - 1])))
        if len(kinks)
        else 0.0,
    }
    ok = (
        checks["min_cum"] >= -kkt_tol
        and checks["total_gap"] <= kkt_tol
        and checks["end_eq"] <= kkt_tol
        and checks["kink_eq"] <= kkt_tol
    )
    return sums, checks, ok


def fit_convex_lse(dataset: Dataset, config: ToleranceConfig = DEFAULT_CONFIG):
    """Fit the convex least-squares estimator.

    Returns ``(ConvexFit, SolverTrace)``.  The returned fit is certified: the
    cumulative-sum conditions hold within ``config.kkt_tol`` after
    normalization by ``total_weight * (1 + max|y|)``; certification failure
    raises :class:`SolverError` with the trace attached.
    """
    x, y, w = dataset.x, dataset.y, dataset.weights
    n = dataset.n
    system = _HingeSystem(dataset)
    scale = certificate_scale(dataset)
    budget = config.iteration_budget(n)
    # stop well below kkt_tol (floored by accumulated roundoff) so the
    # certificate and downstream diagnostics keep a clean margin
    stop_tol = max(min(config.kkt_tol, 1e-13), 8.0 * _EPS * n)

    kinks = np.empty(0, dtype=int)
    coeffs = np.empty(0)
    solves = 0
    history = []

    def resolve(current, feasible):
        # line-search drop loop: keep hinge coefficients strictly positive
        nonlocal solves
        for _ in range(current.size + 2):
            if solves >= budget:
                return None, None
            solves += 1
            coef = system.solve(current)
            hinge = coef[2:]
            if hinge.size == 0 or hinge.min() > 0.0:
                return current, coef
            blocked = hinge <= 0.0
            denom = feasible - hinge
            with np.errstate(divide="ignore", invalid="ignore"):
                steps = np.where(blocked & (denom > 0.0), feasible / denom, np.inf)
            steps = np.where(blocked & (denom <= 0.0), 0.0, steps)
            alpha = float(steps.min())
            feasible = feasible + alpha * (hinge - feasible)
            keep = feasible > 0.0
            keep[int(np.argmin(steps))] = False
            current = current[keep]
            feasible = feasible[keep]
        return None, None

    kinks, coef = resolve(kinks, coeffs)
    if kinks is None:
        raise SolverError("iteration budget exhausted in initial solve")
    fitted = system.fitted(kinks, coef)
    history.append(tuple(int(j) for j in kinks))

    interior = np.arange(1, n - 1)
    while True:
        sums = kkt_sums(dataset, fitted)
        cum_norm = sums.cum / scale
        candidates = cum_norm[: n - 2] if n > 2 else cum_norm[:0]
        if candidates.size:
            mask = np.ones(n - 2, dtype=bool)
            mask[kinks - 1] = False
            open_vals = np.where(mask, candidates, np.inf)
            worst = float(open_vals.min())
        else:
            worst = 0.0
        if worst >= -stop_tol:
            break
        if solves >= budget:
            trace = SolverTrace(solves, tuple(history), _objective(dataset, fitted), sums)
            raise SolverError(
                f"no convergence within {budget} solves "
                f"(worst normalized violation {worst:.3e})",
                trace,
            )
        # smallest index among near-equal violations, for reproducible traces
        entering = int(interior[np.flatnonzero(open_vals <= worst + _TIE_WINDOW)[0]])
        pos = int(np.searchsorted(kinks, entering))
        trial = np.insert(kinks, pos, entering)
        feasible = np.insert(coef[2:] if kinks.size else np.empty(0), pos, 0.0)
        new_kinks, new_coef = resolve(trial, feasible)
        if new_kinks is None:
            trace = SolverTrace(solves, tuple(history), _objective(dataset, fitted), sums)
            raise SolverError(f"no convergence within {budget} solves", trace)
        if new_kinks.size == kinks.size and np.array_equal(new_kinks, kinks):
            # entering hinge was immediately infeasible at float resolution;
            # no strict progress is possible, certify what we have
            break
        kinks, coef = new_kinks, new_coef
        fitted = system.fitted(kinks, coef)
        history.append(tuple(int(j) for j in kinks))

    sums, checks, ok = _certificate_report(dataset, fitted, kinks, config.kkt_tol)
    objective = _objective(dataset, fitted)
    trace = SolverTrace(solves, tuple(history), objective, sums)
    if not ok:
        raise SolverError(f"certificate failed: {checks}", trace)

    kink_abs = config.kink_tol * dataset.response_scale
    hinge_pairs = tuple((int(j), float(b)) for j, b in zip(kinks, coef[2:]))
    fit = ConvexFit(
        fitted=fitted,
        kinks=tuple(j for j, b in hinge_pairs if b > kink_abs),
        intercept=float(coef[0]),
        base_slope=float(coef[1]),
        hinge_coeffs=hinge_pairs,
    )
    return fit, trace


def _objective(dataset: Dataset, fitted: np.ndarray) -> float:
    r = dataset.y - fitted
    return float(np.sum(dataset.weights * r * r))
