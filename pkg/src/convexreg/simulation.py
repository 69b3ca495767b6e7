"""Data generators and Monte Carlo harnesses.

Scenario generators draw uniform designs with Gaussian noise around either a
flat-bottomed polynomial mean (vanishing derivatives of orders 2..r-1 at the
center) or an affine mean.  The rate study pools log absolute bias at a query
point against log sample size and reports the fitted slope.  The invelope
simulators fit the convex estimator to canonical drifted-noise data on a
uniform grid, which approximates the second and third derivatives of the
limiting invelope process at a point.

Randomness is counter-based (Philox) and keyed by entropy tuples so every
draw is reproducible bit-for-bit and replicates can run in any order or in
parallel without changing results:

    (1, kind_code, r, n, seed)   scenario draws (x first, then noise)
    (2, base_seed, n, replicate) per-replicate seed mixing inside studies
    (3, r, m, seed)              canonical invelope noise
    (4, m, seed)                 zero-drift invelope noise
    (5, n, seed)                 boundary-study draws

Replicate tasks are distributed over a process pool when the environment
variable ``CONVEXREG_THREADS`` is set above 1; results are merged in task
order, so the parallel schedule never changes the output.
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .inference import argmin_estimator, boundary_diagnostics
from .model import Dataset, evaluate, left_derivative
from .solver import fit_convex_lse

_STREAM_SCENARIO = 1
_STREAM_MIX = 2
_STREAM_INVELOPE = 3
_STREAM_FLAT_INVELOPE = 4
_STREAM_BOUNDARY = 5

_KIND_CODES = {"vanishing": 0, "affine": 1}

DEFAULT_RATE_GRID = tuple(
    int(round(v)) for v in np.geomspace(500.0, 10000.0, 10)
)


def rng_from_key(*key) -> np.random.Generator:
    """Counter-based generator keyed by a tuple of nonnegative integers."""
    if any(int(k) < 0 for k in key):
        raise ValueError("stream keys must be nonnegative integers")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(tuple(int(k) for k in key))))


def mix_seed(base_seed: int, n: int, replicate: int) -> int:
    """Fold (study seed, sample size, replicate) into one replayable seed."""
    ss = np.random.SeedSequence((_STREAM_MIX, int(base_seed), int(n), int(replicate)))
    return int(ss.generate_state(1, np.uint64)[0])


def thread_count() -> int:
    """Worker cap from CONVEXREG_THREADS (default 1 = serial)."""
    raw = os.environ.get("CONVEXREG_THREADS", "1")
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"CONVEXREG_THREADS must be an integer, got {raw!r}") from exc
    return max(1, value)


def _run_tasks(fn, tasks, threads=None):
    """Map fn over tasks, preserving order; pooled when threads > 1."""
    workers = thread_count() if threads is None else max(1, int(threads))
    workers = min(workers, len(tasks)) if tasks else 1
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


@dataclass(frozen=True)
class ScenarioSpec:
    """One synthetic regression scenario.

    ``kind`` is "vanishing" (mean amplitude*(x-1/2)^r with even r >= 2) or
    "affine" (mean amplitude*(x-1/2)); noise is i.i.d. normal with standard
    deviation ``sigma``; the design is i.i.d. uniform on [0, 1].
    """

    kind: str
    n: int
    seed: int
    r: int = 2
    amplitude: float = 2.0
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in _KIND_CODES:
            raise ValueError(f"kind must be one of {sorted(_KIND_CODES)}")
        if self.kind == "vanishing" and (self.r < 2 or self.r % 2 != 0):
            raise ValueError("r must be an even integer >= 2")
        if self.n < 10:
            raise ValueError("n must be at least 10")
        if self.sigma < 0.0:
            raise ValueError("sigma must be nonnegative")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")


def true_mean(spec: ScenarioSpec, t):
    t = np.asarray(t, dtype=float)
    if spec.kind == "vanishing":
        out = spec.amplitude * (t - 0.5) ** spec.r
    else:
        out = spec.amplitude * (t - 0.5)
    return float(out) if out.ndim == 0 else out


def generate_scenario(spec: ScenarioSpec) -> Dataset:
    """Draw the scenario dataset; identical spec and seed give identical bytes.

    sigma and amplitude only rescale the draws, so runs with the same
    (kind, r, n, seed) share the same underlying design and noise.
    """
    rng = rng_from_key(_STREAM_SCENARIO, _KIND_CODES[spec.kind], spec.r, spec.n, spec.seed)
    x = rng.random(spec.n)
    eps = rng.standard_normal(spec.n)
    y = true_mean(spec, x) + spec.sigma * eps
    return Dataset.from_arrays(x, y)


# ---------------------------------------------------------------------------
# rate-of-convergence study
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateRecord:
    n: int
    replicate: int
    seed: int
    bias: float
    log_n: float
    log_abs_bias: float


@dataclass(frozen=True)
class RateStudyResult:
    records: tuple[RateRecord, ...]
    slope: float
    slope_stderr: float
    skipped: int


def _rate_task(args):
    kind, r, amplitude, sigma, n, replicate, base_seed, x0 = args
    seed = mix_seed(base_seed, n, replicate)
    spec = ScenarioSpec(kind=kind, n=n, seed=seed, r=r, amplitude=amplitude, sigma=sigma)
    dataset = generate_scenario(spec)
    fit, _ = fit_convex_lse(dataset)
    bias = abs(evaluate(fit, dataset, x0) - true_mean(spec, x0))
    return n, replicate, seed, float(bias)


def pooled_log_slope(log_n, log_bias):
    """Plain least-squares slope of log|bias| on log n, with its standard error."""
    log_n = np.asarray(log_n, dtype=float)
    log_bias = np.asarray(log_bias, dtype=float)
    if log_n.size < 3 or np.ptp(log_n) == 0.0:
        raise ValueError("need at least 3 records across at least 2 sample sizes")
    xc = log_n - log_n.mean()
    sxx = float(np.sum(xc * xc))
    slope = float(np.sum(xc * log_bias) / sxx)
    intercept = float(log_bias.mean() - slope * log_n.mean())
    rss = float(np.sum((log_bias - intercept - slope * log_n) ** 2))
    stderr = math.sqrt(rss / (log_n.size - 2) / sxx)
    return slope, stderr


def rate_study(scenario_kind: str, n_grid=DEFAULT_RATE_GRID, replicates: int = 100,
               x0: float = 0.5, seed: int = 0, r: int = 4, sigma: float = 1.0,
               amplitude: float = 2.0, threads=None) -> RateStudyResult:
    """Fit one estimator per (n, replicate), record log absolute bias at x0,
    and regress it on log n pooled over every record.

    Replicates with zero bias have no log and are skipped (zero means below
    the floating-point floor 1e-12 * (1 + |true value|), which only noise-free
    degenerate runs reach); the skip count is reported and the study raises
    when every record is skipped (e.g. sigma = 0).
    """
    n_grid = [int(n) for n in n_grid]
    if any(b <= a for a, b in zip(n_grid[:-1], n_grid[1:])):
        raise ValueError("n_grid must be strictly increasing")
    if replicates < 20:
        raise ValueError("need at least 20 replicates")
    probe = ScenarioSpec(kind=scenario_kind, n=max(n_grid), seed=0, r=r,
                         amplitude=amplitude, sigma=sigma)
    zero_floor = 1e-12 * (1.0 + abs(true_mean(probe, x0)))
    tasks = [
        (scenario_kind, r, amplitude, sigma, n, rep, seed, x0)
        for n in n_grid
        for rep in range(replicates)
    ]
    rows = _run_tasks(_rate_task, tasks, threads)
    records = []
    skipped = 0
    for n, rep, child, bias in rows:
        if bias <= zero_floor:
            skipped += 1
            continue
        records.append(
            RateRecord(n=n, replicate=rep, seed=child, bias=bias,
                       log_n=math.log(n), log_abs_bias=math.log(bias))
        )
    if not records:
        raise ValueError(f"all {skipped} replicates had exactly zero bias; no slope to fit")
    slope, stderr = pooled_log_slope(
        [rec.log_n for rec in records], [rec.log_abs_bias for rec in records]
    )
    return RateStudyResult(records=tuple(records), slope=slope,
                           slope_stderr=stderr, skipped=skipped)


# ---------------------------------------------------------------------------
# invelope simulators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InvelopeSample:
    """One draw of the discretized limit pair.

    ``h2_at_0`` is the fitted value at the grid point nearest the query
    (0 for the canonical problem), ``h3_at_0`` the left derivative there, and
    ``argmin_h2`` the smallest minimizer of the fitted values, all in the
    coordinates of ``domain``.  ``r = 0`` marks the zero-drift variant.
    ``min_envelope_gap`` and ``kink_envelope_gap`` are the normalized
    extremes of the double-cumulative envelope check (the first should be
    >= -tol, the second ~ 0 for a certified fit).
    """

    r: int
    c: float
    m: int
    h2_at_0: float
    h3_at_0: float
    argmin_h2: float
    domain: tuple[float, float]
    query_point: float
    min_envelope_gap: float
    kink_envelope_gap: float


def envelope_gap(responses, fitted, delta: float) -> np.ndarray:
    """Pointwise difference between the double cumulative sums of fitted and
    of responses, both scaled by the grid step.  Nonnegative with zeros at
    the kinks when the fitted values are the convex projection."""
    diff = np.asarray(fitted, dtype=float) - np.asarray(responses, dtype=float)
    return delta * np.cumsum(delta * np.cumsum(diff))


def _run_invelope(t, responses, delta, query, r, c):
    lo, hi = float(t[0] - 0.5 * delta), float(t[-1] + 0.5 * delta)
    width = hi - lo
    u = (t - lo) / width
    dataset = Dataset.from_arrays(u, responses)
    fit, _ = fit_convex_lse(dataset)
    idx = int(np.argmin(np.abs(t - query)))
    h2 = float(fit.fitted[idx])
    h3 = left_derivative(fit, dataset, u[idx]) / width
    loc = argmin_estimator(fit, dataset).location * width + lo
    gap = envelope_gap(responses, fit.fitted, delta)
    scale = delta * len(t) * (1.0 + float(np.max(np.abs(responses))))
    kink_gap = (
        float(np.max(np.abs(gap[[k - 1 for k in fit.kinks]]))) if fit.kinks else 0.0
    )
    return InvelopeSample(
        r=r, c=c, m=len(t), h2_at_0=h2, h3_at_0=h3, argmin_h2=float(loc),
        domain=(lo, hi), query_point=float(t[idx]),
        min_envelope_gap=float(gap.min() / scale),
        kink_envelope_gap=kink_gap / scale,
    )


def simulate_invelope(r: int, c: float = 4.0, m: int = 2000, seed: int = 0) -> InvelopeSample:
    """Simulate the canonical drifted-noise problem on a uniform grid over
    [-c, c] and fit the convex estimator.

    Responses are (r+2)(r+1) t^r + eta / sqrt(delta) with standard normal
    eta and delta = 2c/m.  Cumulative sums of responses*delta then
    approximate a two-sided Brownian motion plus the drift (r+2) t^(r+1),
    and double cumulative sums approximate its integral plus t^(r+2); the
    fitted values approximate the second derivative of the invelope of that
    integrated process, the left slope its third derivative.
    """
    if r < 2 or r % 2 != 0:
        raise ValueError("r must be an even integer >= 2")
    if c <= 0.0:
        raise ValueError("c must be strictly positive")
    if m < 200:
        raise ValueError("need m >= 200 grid points")
    delta = 2.0 * c / m
    t = -c + (np.arange(m) + 0.5) * delta
    eta = rng_from_key(_STREAM_INVELOPE, r, m, seed).standard_normal(m)
    responses = (r + 2) * (r + 1) * t ** r + eta / math.sqrt(delta)
    return _run_invelope(t, responses, delta, query=0.0, r=r, c=float(c))


def simulate_affine_invelope(m: int = 2000, seed: int = 0, query: float = 0.5) -> InvelopeSample:
    """Zero-drift variant on [0, 1]: responses are pure scaled noise and the
    fitted values approximate the invelope second derivative at ``query``."""
    if m < 200:
        raise ValueError("need m >= 200 grid points")
    if not (0.0 < query < 1.0):
        raise ValueError("query must be interior to (0, 1)")
    delta = 1.0 / m
    t = (np.arange(m) + 0.5) * delta
    eta = rng_from_key(_STREAM_FLAT_INVELOPE, m, seed).standard_normal(m)
    responses = eta / math.sqrt(delta)
    return _run_invelope(t, responses, delta, query=query, r=0, c=0.5)


# ---------------------------------------------------------------------------
# pointwise error / argmin study and boundary study
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalErrorRecord:
    n: int
    replicate: int
    seed: int
    value_err: float
    deriv_err: float
    argmin_location: float
    argmin_err: float


@dataclass(frozen=True)
class LocalErrorStudy:
    r: int
    x0: float
    records: tuple[LocalErrorRecord, ...]

    def by_n(self, field: str) -> dict[int, np.ndarray]:
        out = {}
        for rec in self.records:
            out.setdefault(rec.n, []).append(getattr(rec, field))
        return {n: np.asarray(v) for n, v in sorted(out.items())}


def _local_error_task(args):
    r, amplitude, sigma, n, replicate, base_seed, x0 = args
    seed = mix_seed(base_seed, n, replicate)
    spec = ScenarioSpec(kind="vanishing", n=n, seed=seed, r=r,
                        amplitude=amplitude, sigma=sigma)
    dataset = generate_scenario(spec)
    fit, _ = fit_convex_lse(dataset)
    value_err = abs(evaluate(fit, dataset, x0) - true_mean(spec, x0))
    # the centered polynomial mean has zero derivative at its minimum
    deriv_true = spec.amplitude * spec.r * (x0 - 0.5) ** (spec.r - 1)
    deriv_err = abs(left_derivative(fit, dataset, x0) - deriv_true)
    am = argmin_estimator(fit, dataset)
    return LocalErrorRecord(
        n=n, replicate=replicate, seed=seed,
        value_err=float(value_err), deriv_err=float(deriv_err),
        argmin_location=float(am.location), argmin_err=float(abs(am.location - 0.5)),
    )


def local_error_study(r: int, n_grid, replicates: int, seed: int = 0, x0: float = 0.5,
                      sigma: float = 1.0, amplitude: float = 2.0,
                      threads=None) -> LocalErrorStudy:
    """Per-replicate pointwise value, derivative and argmin errors for the
    flat-bottomed scenario with minimum at 1/2."""
    tasks = [
        (r, amplitude, sigma, int(n), rep, seed, x0)
        for n in n_grid
        for rep in range(replicates)
    ]
    records = _run_tasks(_local_error_task, tasks, threads)
    return LocalErrorStudy(r=r, x0=x0, records=tuple(records))


@dataclass(frozen=True)
class BoundaryStudyResult:
    epsilon: float
    frequencies: dict[int, float]
    counts: dict[int, int]
    replicates: int


def _boundary_mean(t):
    # convex, decreasing at 0, value 1 there
    return 1.0 - t + t * t


def _boundary_task(args):
    n, replicate, base_seed, sigma, epsilon = args
    seed = mix_seed(base_seed, n, replicate)
    rng = rng_from_key(_STREAM_BOUNDARY, n, seed)
    x = rng.random(n)
    y = _boundary_mean(x) + sigma * rng.standard_normal(n)
    dataset = Dataset.from_arrays(x, y)
    fit, _ = fit_convex_lse(dataset)
    value0 = boundary_diagnostics(fit, dataset).value_at_0
    return n, bool(value0 > (1.0 + epsilon) * 1.0)


def boundary_inconsistency_study(n_grid, replicates: int, seed: int = 0,
                                 epsilon: float = 0.05, sigma: float = 1.0,
                                 threads=None) -> BoundaryStudyResult:
    """Frequency of the extrapolated boundary value overshooting the true
    boundary mean by a factor 1 + epsilon, per sample size.

    The study model is 1 - t + t^2: convex, strictly decreasing at 0 with
    value 1, so a consistent estimator would drive the frequency to zero;
    the convex fit keeps it bounded away from zero instead.
    """
    tasks = [
        (int(n), rep, seed, sigma, epsilon)
        for n in n_grid
        for rep in range(replicates)
    ]
    rows = _run_tasks(_boundary_task, tasks, threads)
    counts: dict[int, int] = {int(n): 0 for n in n_grid}
    for n, hit in rows:
        counts[n] += int(hit)
    freqs = {n: counts[n] / replicates for n in counts}
    return BoundaryStudyResult(epsilon=epsilon, frequencies=freqs,
                               counts=counts, replicates=replicates)
