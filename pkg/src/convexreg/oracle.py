"""Brute-force reference solver for small designs.

Enumerates every subset of interior design indices as a candidate kink set,
solves the unconstrained weighted hinge regression on that subset, keeps the
subsets whose hinge coefficients are all strictly positive (those fits are
convex by construction), and returns the feasible fit with the smallest
weighted residual sum of squares.  The optimal kink set is always feasible,
and every feasible fit lies in the cone, so the minimum over feasible subsets
is the global projection.  Exponential in n; intended as an independent check
for n up to about 14.
"""

import itertools

import numpy as np

from .model import Dataset

MAX_ENUMERATION_POINTS = 16


def enumerate_convex_lse(dataset: Dataset):
    """Return (fitted, objective) from exhaustive kink-subset enumeration."""
    n = dataset.n
    if n > MAX_ENUMERATION_POINTS:
        raise ValueError(f"enumeration oracle limited to n <= {MAX_ENUMERATION_POINTS}")
    x, y, w = dataset.x, dataset.y, dataset.weights
    best_obj = np.inf
    best_fitted = None
    ones = np.ones(n)
    for k in range(0, n - 1):
        if k == 0:
            subsets = np.zeros((1, 0), dtype=int)
        else:
            subsets = np.array(list(itertools.combinations(range(1, n - 1), k)), dtype=int)
            if subsets.size == 0:
                continue
        # design tensor (batch, n, k + 2): [1, x, hinges at the subset knots]
        hinges = np.maximum(x[None, :, None] - x[subsets][:, None, :], 0.0)
        base = np.broadcast_to(np.stack([ones, x], axis=1), (subsets.shape[0], n, 2))
        design = np.concatenate([base, hinges], axis=2)
        weighted = design * w[None, :, None]
        gram = np.einsum("bni,bnj->bij", weighted, design)
        rhs = np.einsum("bni,n->bi", weighted, y)
        try:
            coef = np.linalg.solve(gram, rhs[:, :, None])[:, :, 0]
        except np.linalg.LinAlgError:
            coef = np.stack(
                [np.linalg.lstsq(g, r, rcond=None)[0] for g, r in zip(gram, rhs)]
            )
        fitted = np.einsum("bni,bi->bn", design, coef)
        objective = np.sum(w[None, :] * (y[None, :] - fitted) ** 2, axis=1)
        feasible = np.all(coef[:, 2:] > 0.0, axis=1) if k else np.ones(len(subsets), bool)
        objective = np.where(feasible, objective, np.inf)
        pick = int(np.argmin(objective))
        if objective[pick] < best_obj:
            best_obj = float(objective[pick])
            best_fitted = fitted[pick]
    return best_fitted, best_obj
