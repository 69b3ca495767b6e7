"""Shared instance builders for the test suite."""

import numpy as np

from convexreg import Dataset


def random_dataset(seed, n=None, n_min=3, n_max=12, noise=1.0):
    """Gaussian responses over a sorted uniform design with distinct points."""
    rng = np.random.default_rng(seed)
    if n is None:
        n = int(rng.integers(n_min, n_max + 1))
    x = np.sort(rng.random(n))
    while np.unique(x).size < n:
        x = np.sort(rng.random(n))
    y = noise * rng.standard_normal(n)
    return Dataset(x=x, y=y, weights=np.ones(n))


def random_convex_values(x, seed, max_hinges=5):
    """Values of a random positive hinge mixture sampled at x (convex)."""
    rng = np.random.default_rng(seed)
    a, b0 = rng.normal(scale=2.0, size=2)
    k = int(rng.integers(0, max_hinges + 1))
    knots = rng.uniform(0.05, 0.95, size=k)
    coeffs = rng.uniform(0.1, 4.0, size=k)
    values = a + b0 * np.asarray(x, dtype=float)
    for t, c in zip(knots, coeffs):
        values = values + c * np.maximum(np.asarray(x) - t, 0.0)
    return values


def noisy_convex_dataset(seed, n, noise=1.0):
    """Random convex mean plus Gaussian noise."""
    rng = np.random.default_rng(seed)
    x = np.sort(rng.random(n))
    while np.unique(x).size < n:
        x = np.sort(rng.random(n))
    y = random_convex_values(x, seed + 1) + noise * rng.standard_normal(n)
    return Dataset(x=x, y=y, weights=np.ones(n))
