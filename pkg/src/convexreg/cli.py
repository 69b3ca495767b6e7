"""Command-line front end.

Subcommands: ``fit`` (fit a CSV of x,y and emit the certified fit),
``check`` (verify a supplied fit column against every characterization
condition), ``rates`` (log-bias rate study), ``invelope`` (limit-process
simulator), ``argmin`` (minimizer scaling study).

Exit codes: 0 success and certified / all checks passed, 1 check command
completed with failing conditions, 2 malformed input or flags, 3 solver or
numeric failure (a trace file is written next to the requested output).
Every output embeds the resolved configuration including the seed; reruns
with the same flags are byte-identical.  The environment variable
``CONVEXREG_THREADS`` caps how many worker processes replicate loops use.
"""

import argparse
import csv
import math
import sys

import numpy as np

from .diagnostics import characterization_report
from .model import Dataset, ToleranceConfig, build_dataset, evaluate, left_derivative
from .output import canonical_json, write_csv, write_json
from .simulation import (
    DEFAULT_RATE_GRID,
    mix_seed,
    rate_study,
    local_error_study,
    simulate_affine_invelope,
    simulate_invelope,
)
from .solver import SolverError, fit_convex_lse


class InputError(ValueError):
    pass


def _read_csv_columns(path, columns):
    rows = []
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != list(columns):
            raise InputError(f"{path}: line 1: expected header {','.join(columns)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(columns):
                raise InputError(f"{path}: line {lineno}: expected {len(columns)} fields")
            try:
                values = [float(v) for v in row]
            except ValueError as exc:
                raise InputError(f"{path}: line {lineno}: {exc}") from exc
            if not all(math.isfinite(v) for v in values):
                raise InputError(f"{path}: line {lineno}: non-finite value")
            rows.append(values)
    if not rows:
        raise InputError(f"{path}: no data rows")
    return np.asarray(rows)


def _tolerance(args) -> ToleranceConfig:
    return ToleranceConfig(kkt_tol=args.tol) if args.tol is not None else ToleranceConfig()


def _parse_grid(text):
    try:
        grid = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise InputError(f"bad --n-grid {text!r}: {exc}") from exc
    if not grid:
        raise InputError("empty --n-grid")
    return grid


def _base_path(output):
    for suffix in (".json", ".csv"):
        if output.endswith(suffix):
            return output[: -len(suffix)]
    return output


def cmd_fit(args) -> int:
    data = _read_csv_columns(args.input, ("x", "y"))
    try:
        dataset = build_dataset(data)
    except ValueError as exc:
        raise InputError(f"{args.input}: {exc}") from exc
    config = _tolerance(args)
    base = _base_path(args.output)
    resolved = {
        "command": "fit",
        "input": args.input,
        "output": args.output,
        "tol": config.kkt_tol,
        "kink_tol": config.kink_tol,
    }
    try:
        fit, trace = fit_convex_lse(dataset, config)
    except SolverError as exc:
        trace_path = base + ".trace.json"
        payload = {"config": resolved, "error": str(exc)}
        if exc.trace is not None:
            payload["iterations"] = exc.trace.iterations
            payload["final_objective"] = exc.trace.final_objective
            payload["kink_history"] = [list(k) for k in exc.trace.kink_history]
        write_json(trace_path, payload)
        print(f"solver failure, trace written to {trace_path}: {exc}", file=sys.stderr)
        return 3
    report = characterization_report(dataset, fit, config)
    write_json(
        base + ".json",
        {
            "config": resolved,
            "n": dataset.n,
            "weights": dataset.weights,
            "x": dataset.x,
            "fitted": fit.fitted,
            "kinks": list(fit.kinks),
            "hinge": {
                "intercept": fit.intercept,
                "base_slope": fit.base_slope,
                "coefficients": [[j, b] for j, b in fit.hinge_coeffs],
            },
            "objective": trace.final_objective,
            "iterations": trace.iterations,
            "certificate": {
                "passed": report.passed,
                "conditions": {c.name: {"passed": c.passed, "worst": c.worst}
                               for c in report.conditions},
            },
        },
    )
    grid = np.linspace(0.0, 1.0, 512)
    write_csv(
        base + ".curve.csv",
        resolved,
        ("grid_t", "fitted_value", "left_derivative"),
        zip(grid, evaluate(fit, dataset, grid), left_derivative(fit, dataset, grid)),
    )
    return 0 if report.passed else 3


def cmd_check(args) -> int:
    data = _read_csv_columns(args.input, ("x", "y", "fitted"))
    try:
        dataset = Dataset(x=data[:, 0], y=data[:, 1], weights=np.ones(len(data)))
    except ValueError as exc:
        raise InputError(f"{args.input}: {exc}") from exc
    config = _tolerance(args)
    report = characterization_report(dataset, data[:, 2], config)
    payload = {
        "config": {"command": "check", "input": args.input, "tol": config.kkt_tol,
                   "kink_tol": config.kink_tol},
        "passed": report.passed,
        "scale": report.scale,
        "conditions": {c.name: {"passed": c.passed, "worst": c.worst}
                       for c in report.conditions},
    }
    if args.output:
        write_json(args.output, payload)
    else:
        print(canonical_json(payload))
    return 0 if report.passed else 1


def cmd_rates(args) -> int:
    grid = _parse_grid(args.n_grid)
    resolved = {
        "command": "rates", "scenario": args.scenario, "r": args.r,
        "n_grid": list(grid), "replicates": args.replicates, "seed": args.seed,
        "sigma": args.sigma, "x0": args.x0, "output": args.output,
    }
    result = rate_study(
        args.scenario, n_grid=grid, replicates=args.replicates, x0=args.x0,
        seed=args.seed, r=args.r, sigma=args.sigma,
    )
    base = _base_path(args.output)
    write_csv(
        base + ".csv",
        resolved,
        ("scenario", "r", "n", "replicate", "seed", "bias", "log_n", "log_abs_bias"),
        (
            (args.scenario, args.r, rec.n, rec.replicate, rec.seed,
             rec.bias, rec.log_n, rec.log_abs_bias)
            for rec in result.records
        ),
    )
    write_json(
        base + ".json",
        {"config": resolved, "slope": result.slope, "stderr": result.slope_stderr,
         "skipped": result.skipped, "records": len(result.records)},
    )
    print(f"slope {result.slope:.6f} stderr {result.slope_stderr:.6f} "
          f"({len(result.records)} records, {result.skipped} skipped)")
    return 0


def cmd_invelope(args) -> int:
    resolved = {
        "command": "invelope", "scenario": args.scenario, "r": args.r, "c": args.c,
        "m": args.m, "replicates": args.replicates, "seed": args.seed,
        "x0": args.x0, "output": args.output,
    }
    rows = []
    h2 = []
    for rep in range(args.replicates):
        child = mix_seed(args.seed, args.m, rep)
        if args.scenario == "affine":
            sample = simulate_affine_invelope(args.m, child, query=args.x0)
        else:
            sample = simulate_invelope(args.r, args.c, args.m, child)
        rows.append(
            (args.scenario, sample.r, sample.c, sample.m, rep, child,
             sample.h2_at_0, sample.h3_at_0, sample.argmin_h2,
             sample.query_point, sample.min_envelope_gap, sample.kink_envelope_gap)
        )
        h2.append(sample.h2_at_0)
    h2 = np.asarray(h2)
    base = _base_path(args.output)
    write_csv(
        base + ".csv",
        resolved,
        ("scenario", "r", "c", "m", "replicate", "seed", "h2", "h3",
         "argmin", "query_point", "min_envelope_gap", "kink_envelope_gap"),
        rows,
    )
    summary = {
        "config": resolved,
        "h2_mean": float(h2.mean()),
        "h2_var": float(h2.var(ddof=1)) if h2.size > 1 else 0.0,
        "h2_mean_stderr": float(h2.std(ddof=1) / math.sqrt(h2.size)) if h2.size > 1 else 0.0,
        "replicates": int(h2.size),
    }
    write_json(base + ".json", summary)
    print(f"h2 mean {summary['h2_mean']:.6f} var {summary['h2_var']:.6f} "
          f"({h2.size} replicates)")
    return 0


def cmd_argmin(args) -> int:
    grid = _parse_grid(args.n_grid)
    resolved = {
        "command": "argmin", "r": args.r, "n_grid": list(grid),
        "replicates": args.replicates, "seed": args.seed, "sigma": args.sigma,
        "output": args.output,
    }
    study = local_error_study(args.r, grid, args.replicates, seed=args.seed,
                              sigma=args.sigma)
    rate = 1.0 / (2 * args.r + 1)
    base = _base_path(args.output)
    write_csv(
        base + ".csv",
        resolved,
        ("r", "n", "replicate", "seed", "argmin_location", "argmin_err",
         "scaled_argmin_err", "value_err", "deriv_err"),
        (
            (args.r, rec.n, rec.replicate, rec.seed, rec.argmin_location,
             rec.argmin_err, rec.n ** rate * rec.argmin_err,
             rec.value_err, rec.deriv_err)
            for rec in study.records
        ),
    )
    table = {}
    for n, errs in study.by_n("argmin_err").items():
        scaled = n ** rate * errs
        table[str(n)] = {
            "median_raw": float(np.median(errs)),
            "median_scaled": float(np.median(scaled)),
            "p95_scaled": float(np.quantile(scaled, 0.95)),
        }
    write_json(base + ".json", {"config": resolved, "quantiles": table})
    for n, q in table.items():
        print(f"n={n}: median|argmin err| {q['median_raw']:.5f} "
              f"scaled median {q['median_scaled']:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convexreg",
        description="Convex least-squares regression: fitting, certificates, and studies",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a CSV of x,y columns")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True, help="JSON path; a .curve.csv sibling is written")
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(run=cmd_fit)

    p = sub.add_parser("check", help="verify an x,y,fitted CSV against every condition")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default=None)
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("rates", help="log-bias rate-of-convergence study")
    p.add_argument("--scenario", required=True, choices=("vanishing", "affine"))
    p.add_argument("--r", type=int, default=4)
    p.add_argument("--n-grid", default=",".join(str(n) for n in DEFAULT_RATE_GRID))
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--x0", type=float, default=0.5)
    p.add_argument("--output", required=True, help="base path for .csv and .json")
    p.set_defaults(run=cmd_rates)

    p = sub.add_parser("invelope", help="limit-process simulator")
    p.add_argument("--scenario", choices=("vanishing", "affine"), default="vanishing")
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--c", type=float, default=4.0)
    p.add_argument("--m", type=int, default=2000)
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--x0", type=float, default=0.5, help="query point for the affine variant")
    p.add_argument("--output", required=True, help="base path for .csv and .json")
    p.set_defaults(run=cmd_invelope)

    p = sub.add_parser("argmin", help="minimizer scaling study")
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--n-grid", default="1000,4000,16000")
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--output", required=True, help="base path for .csv and .json")
    p.set_defaults(run=cmd_argmin)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
