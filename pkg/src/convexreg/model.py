"""Core data model for univariate convex least-squares regression on [0, 1].

Datasets keep the design sorted, with exact duplicate abscissae merged into
weighted points (weight = multiplicity, response = weighted mean); merging
keeps every divided-difference denominator nonzero while the weighted
problem has the same optimum as the original one.

Fits are piecewise linear: values at the design points plus the equivalent
hinge form

    value(t) = intercept + base_slope * t + sum_j coeff_j * max(t - x_j, 0)

with strictly positive hinge coefficients.  Between design points the fit is
the linear interpolant; outside [x_1, x_n] the boundary segments continue
linearly.  All types are frozen and all functions are pure, so values can be
shared freely across threads.
"""

import numpy as np
from dataclasses import dataclass

_EPS = float(np.finfo(float).eps)


def _frozen_array(values, dtype=float):
    out = np.array(values, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical knobs shared by the solver and the diagnostics.

    ``kkt_tol`` applies to certificate sums normalized by
    ``total_weight * (1 + max|y|)``, which makes the default scale-free.
    ``kink_tol`` is the slope-change threshold (same normalization) below
    which adjacent segments are reported as a single affine piece.
    ``max_iterations`` bounds the number of linear solves; ``None`` means
    ``50 * n``.
    """

    kkt_tol: float = 1e-8
    kink_tol: float = 1e-7
    max_iterations: int | None = None

    def __post_init__(self):
        if not (self.kkt_tol > 0.0):
            raise ValueError("kkt_tol must be strictly positive")
        if not (self.kink_tol > 0.0):
            raise ValueError("kink_tol must be strictly positive")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be a positive integer")

    def iteration_budget(self, n: int) -> int:
        return self.max_iterations if self.max_iterations is not None else 50 * n


DEFAULT_CONFIG = ToleranceConfig()


@dataclass(frozen=True)
class Dataset:
    """Sorted design points in [0, 1] with responses and merge weights."""

    x: np.ndarray
    y: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        x = _frozen_array(self.x)
        y = _frozen_array(self.y)
        w = _frozen_array(self.weights)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "weights", w)
        if x.ndim != 1 or x.shape != y.shape or x.shape != w.shape:
            raise ValueError("x, y and weights must be 1-d arrays of equal length")
        if x.size < 2:
            raise ValueError("need at least 2 distinct design points")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y)) and np.all(np.isfinite(w))):
            raise ValueError("non-finite values in dataset")
        if x[0] < 0.0 or x[-1] > 1.0:
            raise ValueError("design points must lie in [0, 1]")
        if np.any(np.diff(x) <= 0.0):
            raise ValueError("design points must be strictly increasing (merge duplicates first)")
        if np.any(w <= 0.0):
            raise ValueError("weights must be strictly positive")

    @property
    def n(self) -> int:
        return int(self.x.size)

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    @property
    def response_scale(self) -> float:
        """Scale-free normalizer 1 + max|y| used by every default tolerance."""
        return 1.0 + float(np.max(np.abs(self.y)))

    @classmethod
    def from_arrays(cls, x, y) -> "Dataset":
        """Sort (x, y) pairs and merge duplicate x into weighted mean points."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError("x and y must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("non-finite values in input points")
        if x.size and (x.min() < 0.0 or x.max() > 1.0):
            raise ValueError("design points must lie in [0, 1]")
        xs, inverse, counts = np.unique(x, return_inverse=True, return_counts=True)
        if xs.size < 2:
            raise ValueError("need at least 2 distinct design points")
        ys = np.bincount(inverse, weights=y) / counts
        return cls(x=xs, y=ys, weights=counts.astype(float))


def build_dataset(points) -> Dataset:
    """Build a :class:`Dataset` from (x, y) pairs.

    Duplicate x-values are merged into a single point whose weight is the
    multiplicity and whose response is the mean of the duplicates.
    """
    pts = list(points)
    if len(pts) < 2:
        raise ValueError("need at least 2 points")
    arr = np.asarray(pts, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("points must be (x, y) pairs")
    return Dataset.from_arrays(arr[:, 0], arr[:, 1])


# ---------------------------------------------------------------------------
# piecewise-linear machinery shared by fits and raw fitted-value arrays
# ---------------------------------------------------------------------------

def segment_slopes(x, values):
    return np.diff(np.asarray(values, dtype=float)) / np.diff(np.asarray(x, dtype=float))


def piecewise_values(x, values, t):
    """Linear interpolation on [x_1, x_n], linear continuation outside."""
    t = np.asarray(t, dtype=float)
    out = np.interp(t, x, values)
    s = segment_slopes(x, values)
    left = t < x[0]
    right = t > x[-1]
    if np.any(left):
        out = np.where(left, values[0] + s[0] * (t - x[0]), out)
    if np.any(right):
        out = np.where(right, values[-1] + s[-1] * (t - x[-1]), out)
    return out


def piecewise_left_slopes(x, values, t):
    """Slope of the segment immediately left of t (first slope for t <= x_1)."""
    t = np.asarray(t, dtype=float)
    s = segment_slopes(x, values)
    idx = np.searchsorted(x, t, side="left") - 1
    idx = np.clip(idx, 0, s.size - 1)
    return s[idx]


def cone_violation(x, values) -> float:
    """Worst decrease of consecutive segment slopes, beyond float resolution.

    Returns a nonpositive number when the value sequence is convex at the
    resolution double precision allows for the given gaps; the allowance
    absorbs the roundoff amplification 1/gap that divided differences incur.
    """
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    s = segment_slopes(x, values)
    if s.size < 2:
        return 0.0
    g = np.diff(x)
    scale = 1.0 + float(np.max(np.abs(values)))
    allowance = 4.0 * _EPS * scale * (1.0 / g[:-1] + 1.0 / g[1:])
    return float(np.max(s[:-1] - s[1:] - allowance))


@dataclass(frozen=True)
class ConvexFit:
    """Convex piecewise-linear fit: design-point values plus hinge form.

    ``kinks`` lists the interior design indices whose slope increase exceeds
    the kink threshold used at construction; ``hinge_coeffs`` keeps every
    strictly positive slope increment so that the hinge form reproduces
    ``fitted`` exactly (sub-threshold increments stay in the representation
    but are not reported as kinks).
    """

    fitted: np.ndarray
    kinks: tuple[int, ...]
    intercept: float
    base_slope: float
    hinge_coeffs: tuple[tuple[int, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "fitted", _frozen_array(self.fitted))
        object.__setattr__(self, "kinks", tuple(int(k) for k in self.kinks))
        object.__setattr__(
            self, "hinge_coeffs", tuple((int(j), float(b)) for j, b in self.hinge_coeffs)
        )
        if any(b <= 0.0 for _, b in self.hinge_coeffs):
            raise ValueError("hinge coefficients must be strictly positive")

    @property
    def n(self) -> int:
        return int(self.fitted.size)

    @classmethod
    def from_values(cls, dataset: Dataset, values, config: ToleranceConfig = DEFAULT_CONFIG) -> "ConvexFit":
        """Derive the hinge representation from fitted values at the design.

        Every slope increment above the local float-resolution floor becomes
        a hinge, so the telescoped reconstruction is exact up to that floor;
        increments above the kink threshold are additionally reported as
        kinks.  Raises if the values are not convex over the design.
        """
        values = np.asarray(values, dtype=float)
        if values.shape != dataset.x.shape:
            raise ValueError("fitted values must match the dataset length")
        kink_abs = config.kink_tol * dataset.response_scale
        if cone_violation(dataset.x, values) > kink_abs:
            raise ValueError("values are not convex over the design")
        x = dataset.x
        s = segment_slopes(x, values)
        increments = s[1:] - s[:-1]
        g = np.diff(x)
        vscale = 1.0 + float(np.max(np.abs(values)))
        floor = 4.0 * _EPS * vscale * (1.0 / g[:-1] + 1.0 / g[1:])
        hinges = [
            (i + 1, float(d)) for i, d in enumerate(increments) if d > floor[i]
        ]
        kinks = tuple(j for j, d in hinges if d > kink_abs)
        return cls(
            fitted=values,
            kinks=kinks,
            intercept=float(values[0] - s[0] * x[0]),
            base_slope=float(s[0]),
            hinge_coeffs=tuple(hinges),
        )

    def hinge_values(self, dataset: Dataset, t):
        """Evaluate the hinge form (not the interpolant) at t."""
        t = np.asarray(t, dtype=float)
        out = self.intercept + self.base_slope * t
        for j, b in self.hinge_coeffs:
            out = out + b * np.maximum(t - dataset.x[j], 0.0)
        return out


def _check_consistent(fit: ConvexFit, dataset: Dataset):
    if fit.n != dataset.n:
        raise ValueError("fit and dataset lengths do not match")


def _check_domain(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0) or np.any(t > 1.0):
        raise ValueError("evaluation points must lie in [0, 1]")
    return t


def evaluate(fit: ConvexFit, dataset: Dataset, t):
    """Fitted value at t in [0, 1]: interpolation inside the design hull,
    linear continuation of the boundary segments outside."""
    _check_consistent(fit, dataset)
    t = _check_domain(t)
    out = piecewise_values(dataset.x, fit.fitted, t)
    return float(out) if np.ndim(t) == 0 else out


def left_derivative(fit: ConvexFit, dataset: Dataset, t):
    """Left derivative of the fit at t; equals the first segment slope for
    t <= x_1 and the last segment slope for t > x_n.  Nondecreasing in t."""
    _check_consistent(fit, dataset)
    t = _check_domain(t)
    out = piecewise_left_slopes(dataset.x, fit.fitted, t)
    return float(out) if np.ndim(t) == 0 else out


def hinge_representation(fit: ConvexFit, dataset: Dataset):
    """Return (intercept, base_slope, hinge_coeffs), checking that the hinge
    form reproduces the fitted values to 1e-10 * (1 + max|fitted|)."""
    _check_consistent(fit, dataset)
    recon = fit.hinge_values(dataset, dataset.x)
    scale = 1.0 + float(np.max(np.abs(fit.fitted)))
    err = float(np.max(np.abs(recon - fit.fitted)))
    if err > 1e-10 * scale:
        raise ValueError(f"hinge representation drift {err:.3e} exceeds tolerance")
    return fit.intercept, fit.base_slope, fit.hinge_coeffs
