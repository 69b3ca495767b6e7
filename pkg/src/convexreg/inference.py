"""Consumer-facing estimators built on a certified fit.

Pointwise value and left derivative, the argmin estimator (smallest design
point attaining the minimum fitted value), boundary values obtained by
linear continuation of the first and last segments, the deterministic
scaling constants that map local estimation error into canonical limit
coordinates, and a local sup-deviation profile.
"""

import math

import numpy as np
from dataclasses import dataclass

from .model import ConvexFit, Dataset, evaluate, left_derivative, segment_slopes

ARGMIN_TIE_TOL = 1e-12  # absolute tie window on fitted values


@dataclass(frozen=True)
class ArgminResult:
    location: float
    value: float
    tie_count: int


@dataclass(frozen=True)
class BoundaryDiagnostics:
    value_at_0: float
    deriv_at_0: float
    value_at_1: float
    deriv_at_1: float


@dataclass(frozen=True)
class LocalEstimates:
    value: float
    left_deriv: float
    sup_dev_profile: float | None


def argmin_estimator(fit: ConvexFit, dataset: Dataset) -> ArgminResult:
    """Smallest design point minimizing the fitted values; ties within
    an absolute 1e-12 window are counted and resolved to the left."""
    if fit.n != dataset.n:
        raise ValueError("fit and dataset lengths do not match")
    fitted = fit.fitted
    vmin = float(fitted.min())
    ties = np.flatnonzero(fitted <= vmin + ARGMIN_TIE_TOL)
    loc = int(ties[0])
    return ArgminResult(
        location=float(dataset.x[loc]),
        value=float(fitted[loc]),
        tie_count=int(ties.size),
    )


def boundary_diagnostics(fit: ConvexFit, dataset: Dataset) -> BoundaryDiagnostics:
    """Values and one-sided slopes at 0 and 1 from the boundary segments."""
    if fit.n != dataset.n:
        raise ValueError("fit and dataset lengths do not match")
    s = segment_slopes(dataset.x, fit.fitted)
    x, f = dataset.x, fit.fitted
    return BoundaryDiagnostics(
        value_at_0=float(f[0] - s[0] * x[0]),
        deriv_at_0=float(s[0]),
        value_at_1=float(f[-1] + s[-1] * (1.0 - x[-1])),
        deriv_at_1=float(s[-1]),
    )


def scaling_constants(r: int, sigma: float, mu_r_at_x0: float) -> tuple[float, float]:
    """Deterministic constants (d1, d2) normalizing the local error of the
    fit and of its derivative into canonical limit coordinates:

        d1 = ((r+2)! / (sigma^(2r+2) * mu_r))^(1/(2r+1))
        d2 = (((r+2)!)^3 / (sigma^(2r) * mu_r^3))^(1/(2r+1))

    where mu_r is the (strictly positive) r-th derivative of the true mean
    at the point of interest and r >= 2 is even.
    """
    if r < 2 or r % 2 != 0:
        raise ValueError("r must be an even integer >= 2")
    if sigma <= 0.0:
        raise ValueError("sigma must be strictly positive")
    if mu_r_at_x0 <= 0.0:
        raise ValueError("the r-th derivative at the point must be strictly positive")
    fact = math.factorial(r + 2)
    root = 1.0 / (2 * r + 1)
    d1 = (fact / (sigma ** (2 * r + 2) * mu_r_at_x0)) ** root
    d2 = (fact ** 3 / (sigma ** (2 * r) * mu_r_at_x0 ** 3)) ** root
    return d1, d2


def local_estimates(fit: ConvexFit, dataset: Dataset, x0: float, halfwidth: float,
                    reference=None) -> LocalEstimates:
    """Fitted value and left derivative at x0, plus the sup deviation from a
    reference function over a fixed 101-point grid on [x0-h, x0+h].

    The grid is uniform and fixed so runs are reproducible; the fit is
    piecewise linear, so refining the grid only interpolates.  ``reference``
    is a vectorized callable; without it the profile is None.
    """
    if halfwidth <= 0.0:
        raise ValueError("halfwidth must be strictly positive")
    lo, hi = x0 - halfwidth, x0 + halfwidth
    if lo < 0.0 or hi > 1.0:
        raise ValueError("window must stay inside [0, 1]")
    value = evaluate(fit, dataset, x0)
    deriv = left_derivative(fit, dataset, x0)
    sup_dev = None
    if reference is not None:
        grid = np.linspace(lo, hi, 101)
        sup_dev = float(np.max(np.abs(evaluate(fit, dataset, grid) - reference(grid))))
    return LocalEstimates(value=value, left_deriv=deriv, sup_dev_profile=sup_dev)
