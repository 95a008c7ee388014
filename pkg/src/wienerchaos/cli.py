"""Command-line front end.

Subcommands: ``cumulant``, ``bounds``, ``demo``, ``verify``, ``simulate``.
Reports go to stdout as JSON (or CSV for tables), diagnostics to stderr.

Exit codes: 0 success, 2 a check failed, 64 bad input, 65 an order or
degree cap was exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from math import factorial
from typing import Any, Sequence

import numpy as np

from .bounds import bound_report, delta_C, pair_estimate_check, psi
from .chaos_algebra import ChaosVector, OrderCapExceeded, covariance_matrix, fourth_cumulant_closed
from .cumulant_engine import (
    DegreeCapExceeded,
    closed_form_per_ordering,
    cumulant_closed_form,
    cumulants_from_moments,
)
from .malliavin_ops import cumulant_via_gamma, gamma_expectations
from .montecarlo import empirical_cumulant, sample
from .multiindex import check_multi_index, orderings, parse_multi_index
from .specfile import SpecError, dump_spec, load_spec
from .tensor_core import DenseLimitExceeded, SymmetricKernel
from .verification import close, run_battery

EXIT_OK = 0
EXIT_CHECK_FAILED = 2
EXIT_BAD_INPUT = 64
EXIT_CAP = 65

DEFAULT_DEMO_N = "1,2,4,8,16,32,64"


class UsageError(ValueError):
    pass


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def _emit(report: dict, args, started: float) -> None:
    if not args.no_timings:
        report["timings"] = {"seconds": time.perf_counter() - started}
    json.dump(_jsonable(report), sys.stdout, indent=2)
    sys.stdout.write("\n")


def _parse_m(text: str | None, d: int) -> tuple[int, ...]:
    if text is None:
        raise UsageError("--m is required")
    try:
        return check_multi_index(parse_multi_index(text), d)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_cumulant(args) -> int:
    started = time.perf_counter()
    spec = load_spec(args.spec)
    F = spec.vector()
    m = _parse_m(args.m, len(F))
    k = sum(m)
    scale = factorial(k - 1)
    gammas = gamma_expectations(F, m)
    if k >= 3:
        closed = closed_form_per_ordering(F, m)
    else:
        closed = {path: cumulant_closed_form(F, m, path) for path in orderings(m)}
    oracle = cumulants_from_moments(F, m)
    closed_avg = cumulant_closed_form(F, m)
    gamma_avg = cumulant_via_gamma(F, m)
    agree = close(closed_avg, oracle, args.tol) and close(gamma_avg, oracle, args.tol)
    report = {
        "command": "cumulant",
        "input": {"spec": dump_spec(spec), "m": list(m), "tol": args.tol},
        "orders": list(F.orders),
        "closed_form_averaged": closed_avg,
        "gamma_averaged": gamma_avg,
        "oracle": oracle,
        "per_ordering": [
            {"ordering": list(path), "closed_form": closed[path], "gamma": scale * gammas[path]}
            for path in orderings(m)
        ],
        "routes_agree": agree,
    }
    _emit(report, args, started)
    return EXIT_OK if agree else EXIT_CHECK_FAILED


def cmd_bounds(args) -> int:
    started = time.perf_counter()
    spec = load_spec(args.spec)
    F = spec.vector()
    rep = bound_report(F)
    kernels = F.kernels
    pairs = []
    for i in range(len(F)):
        for j in range(len(F)):
            res = pair_estimate_check(kernels[i], kernels[j])
            pairs.append({"pair": [i, j], "case": res.case, "lhs": res.lhs, "rhs": res.rhs,
                          "holds": res.holds})
    ok = rep.delta_le_psi and all(p["holds"] for p in pairs)
    report = {
        "command": "bounds",
        "input": {"spec": dump_spec(spec)},
        "orders": list(F.orders),
        "covariance": rep.covariance,
        "fourth_cumulants": list(rep.fourth_cumulants),
        "delta_C": rep.delta_C,
        "psi": rep.psi,
        "d2_bound": rep.d2_bound,
        "d1_bound": rep.d1_bound,
        "delta_le_psi": rep.delta_le_psi,
        "pair_estimates": pairs,
        "all_inequalities_hold": ok,
    }
    _emit(report, args, started)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def fourth_moment_rows(ns: Sequence[int]) -> list[dict]:
    """One row per ``n`` for ``F_n = I_2(n^{-1/2} sum_{k<n} e_k ⊗ e_k)``."""
    rows = []
    prev = None
    for n in ns:
        f = SymmetricKernel(n, 2, {(k, k): 1.0 / math.sqrt(n) for k in range(n)})
        F = ChaosVector.from_kernels([f])
        var = float(covariance_matrix(F)[0, 0])
        chi4 = fourth_cumulant_closed(f)
        delta = delta_C(F)
        row = {
            "n": n,
            "second_moment": var,
            "chi4": chi4,
            "chi4_expected": 48.0 / n,
            "delta_C": delta,
            "delta_expected": math.sqrt(8.0 / n),
            "psi": psi([2], [chi4], [var]),
            "d2_bound": delta / 2.0,
        }
        row["closed_forms_match"] = (close(chi4, 48.0 / n, 1e-12)
                                     and close(delta, math.sqrt(8.0 / n), 1e-12)
                                     and close(var, 2.0, 1e-12))
        row["decreasing"] = prev is None or (chi4 < prev["chi4"] and delta < prev["delta_C"])
        rows.append(row)
        prev = row
    return rows


def cmd_demo(args) -> int:
    started = time.perf_counter()
    try:
        ns = [int(x) for x in args.n.split(",")]
    except ValueError as exc:
        raise UsageError(f"cannot parse --n {args.n!r}") from exc
    if not ns or any(n < 1 for n in ns):
        raise UsageError("--n entries must be positive integers")
    rows = fourth_moment_rows(ns)
    ok = all(r["closed_forms_match"] and r["decreasing"] for r in rows)
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
        sys.stdout.write(buf.getvalue())
        if not args.no_timings:
            print(f"elapsed {time.perf_counter() - started:.3f}s", file=sys.stderr)
    else:
        _emit({"command": "demo", "input": {"n": ns}, "rows": rows, "all_ok": ok}, args, started)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_verify(args) -> int:
    started = time.perf_counter()
    if args.instances < 1:
        raise UsageError("--instances must be >= 1")
    result = run_battery(args.instances, args.seed, inject_fault=args.inject_fault)
    report = {
        "command": "verify",
        "input": {"instances": args.instances, "seed": args.seed},
        "checks": result.as_dict(),
        "passed": result.passed,
    }
    _emit(report, args, started)
    return EXIT_OK if result.passed else EXIT_CHECK_FAILED


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    spec = load_spec(args.spec)
    F = spec.vector()
    m = _parse_m(args.m, len(F))
    if sum(m) > 6:
        raise UsageError("simulate supports |m| <= 6")
    if args.samples < 32:
        raise UsageError("--samples must be at least 32")
    batch = sample(F, args.samples, args.seed)
    estimate, stderr = empirical_cumulant(batch, m)
    oracle = cumulants_from_moments(F, m)
    deviation = abs(estimate - oracle)
    sigmas = deviation / stderr if stderr > 0 else (0.0 if deviation == 0 else math.inf)
    within = sigmas <= 4.0
    report = {
        "command": "simulate",
        "input": {"spec": dump_spec(spec), "m": list(m), "samples": args.samples,
                  "seed": args.seed},
        "estimate": estimate,
        "stderr": stderr,
        "oracle": oracle,
        "deviation_in_stderr": sigmas,
        "within_4_sigma": within,
        "sample_mean": batch.values.mean(axis=0),
        "sample_covariance": np.atleast_2d(np.cov(batch.values, rowvar=False)),
        "covariance": covariance_matrix(F),
    }
    if sigmas == 4.0:
        print("warning: deviation sits exactly at 4 standard errors", file=sys.stderr)
    _emit(report, args, started)
    return EXIT_OK if within else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wienerchaos",
        description="Cumulants and Gaussian-approximation bounds for vectors of multiple integrals.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--no-timings", action="store_true", help="omit the timings block")

    p = sub.add_parser("cumulant", parents=[common], help="joint cumulant by three routes")
    p.add_argument("--spec", required=True)
    p.add_argument("--m", required=True, help="comma-separated multi-index, e.g. 2,1")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_cumulant)

    p = sub.add_parser("bounds", parents=[common], help="delta_C, psi and distance bounds")
    p.add_argument("--spec", required=True)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("demo", parents=[common], help="fourth-moment convergence table")
    p.add_argument("--n", default=DEFAULT_DEMO_N, help="comma-separated sizes")
    p.set_defaults(func=cmd_demo, format="csv")

    p = sub.add_parser("verify", parents=[common], help="random property battery")
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo cumulant check")
    p.add_argument("--spec", required=True)
    p.add_argument("--m", required=True)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_BAD_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (OrderCapExceeded, DegreeCapExceeded, DenseLimitExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (SpecError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
