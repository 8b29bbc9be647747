"""Command-line front end: boundary sweeps, the eigensolve oracle, scheme
stability checks and the benchmark table driver.

Exit codes: 0 success (or convergent scheme), 1 usage or runtime error,
2 scheme not convergent.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import bench as bench_mod
from .analysis import compare_sweeps, oracle_arrays, oracle_sweep
from .engine import TWO_PI, SweepFailure, ZnnParams, angle_grid, sweep
from .linalg import hermitian_split
from .schemes import (SchemeSpec, UnstableSchemeError, builtin_schemes,
                      check_zero_stability, normalize, read_scheme_file)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGENT = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _add_matrix_flags(p):
    p.add_argument("--matrix", help="path to a JSON matrix file")
    p.add_argument("--random", type=int, metavar="N",
                   help="generate a random N x N complex matrix")
    p.add_argument("--seed", type=int, default=0, help="seed for --random")


def _resolve_matrix(args):
    if (args.matrix is None) == (args.random is None):
        raise _UsageError("exactly one of --matrix or --random is required")
    if args.matrix is not None:
        return bench_mod.load_matrix(args.matrix)
    a, _ = bench_mod.gen_matrix(args.random, args.seed)
    return a


def _resolve_scheme(name_or_path) -> SchemeSpec:
    builtins = builtin_schemes()
    key = str(name_or_path)
    if key in builtins:
        return builtins[key]
    name, m, s, order, raw = read_scheme_file(key)
    return normalize(raw, name=name, m=m, s=s, truncation_order=order)


def _summary(scheme, n, tau, eta, points, mean_digits, seconds):
    md = "nan" if mean_digits is None else f"{mean_digits:.3f}"
    print(f"scheme={scheme} n={n} tau={tau:g} eta={eta:g} "
          f"points={points} mean_digits={md} seconds={seconds:.3f}")


def cmd_sweep(args) -> int:
    a = _resolve_matrix(args)
    scheme = _resolve_scheme(args.scheme)
    report = check_zero_stability(scheme)
    if not report.convergent:
        print(f"scheme {scheme.name!r} is {report.verdict}", file=sys.stderr)
        return EXIT_NOT_CONVERGENT
    flow = hermitian_split(a)
    params = ZnnParams(tau=args.tau, eta=args.eta, mu=args.mu,
                       t_final=args.t_final,
                       restart_threshold=args.restart_threshold)
    t0 = time.perf_counter()
    result = sweep(flow, scheme, params)
    mean_digits = None
    if args.compare_oracle:
        stats = compare_sweeps(result, oracle_sweep(flow, result.t))
        mean_digits = stats.mean
    seconds = time.perf_counter() - t0
    if args.out:
        bench_mod.write_boundary_csv(
            args.out, result.t, result.values, result.lambdas,
            result.residuals, result.norm_defects, digits=result.digits)
    _summary(scheme.name, flow.n, params.tau, params.eta,
             len(result.t), mean_digits, seconds)
    return EXIT_OK


def cmd_oracle(args) -> int:
    a = _resolve_matrix(args)
    flow = hermitian_split(a)
    t0 = time.perf_counter()
    grid = angle_grid(args.tau, 0.0, args.t_final)
    lams, vecs, values, resid = oracle_arrays(flow, grid)
    norm_defects = np.abs(np.einsum("ki,ki->k", vecs.conj(), vecs).real - 1.0)
    seconds = time.perf_counter() - t0
    if args.out:
        bench_mod.write_boundary_csv(args.out, grid, values, lams, resid, norm_defects)
    _summary("oracle", flow.n, args.tau, 0.0, len(grid), None, seconds)
    return EXIT_OK


def cmd_scheme_check(args) -> int:
    scheme = _resolve_scheme(args.scheme)
    report = check_zero_stability(scheme)
    beta = "none" if scheme.beta is None else f"{scheme.beta:.15g}"
    print(f"scheme {scheme.name}: verdict={report.verdict} beta={beta} "
          f"order={scheme.truncation_order}")
    print(f"roots: {len(report.roots)}, max interior modulus "
          f"{report.max_interior_modulus:.6f}")
    for root, mult in report.boundary_roots:
        print(f"  unit-circle root {root.real:+.6f}{root.imag:+.6f}i (multiplicity {mult})")
    if args.roots_out:
        with open(args.roots_out, "w", encoding="utf-8", newline="") as fh:
            fh.write("re,im,modulus\n")
            for r in report.roots:
                fh.write(f"{r.real!r},{r.imag!r},{abs(r)!r}\n")
    return EXIT_OK if report.convergent else EXIT_NOT_CONVERGENT


def _parse_float_list(text):
    try:
        return [float(tok) for tok in text.split(",") if tok]
    except ValueError as exc:
        raise _UsageError(f"bad numeric list {text!r}: {exc}") from None


def _parse_int_list(text):
    try:
        return [int(tok) for tok in text.split(",") if tok]
    except ValueError as exc:
        raise _UsageError(f"bad integer list {text!r}: {exc}") from None


def cmd_bench(args) -> int:
    schemes = [tok for tok in args.schemes.split(",") if tok]
    sizes = _parse_int_list(args.sizes)
    taus = _parse_float_list(args.taus)
    if not (schemes and sizes and taus):
        raise _UsageError("--schemes, --sizes and --taus must be non-empty")
    h_range = None
    eta_grid = None
    if args.h_range:
        parts = _parse_float_list(args.h_range.replace(":", ","))
        if len(parts) != 2:
            raise _UsageError("--h-range wants lo:hi")
        h_range = (parts[0], parts[1])
    if args.eta_search:
        parts = args.eta_search.split(":")
        if len(parts) != 3:
            raise _UsageError("--eta-search wants lo:hi:steps")
        eta_grid = (float(parts[0]), float(parts[1]), int(parts[2]))
    rows = bench_mod.run_bench(schemes, sizes, taus, h_range=h_range,
                               eta_grid=eta_grid, master_seed=args.seed,
                               workers=args.workers)
    for r in rows:
        _summary(r.scheme, r.n, r.tau, r.eta, r.points, r.mean_digits, r.wall_seconds)
    if args.out:
        bench_mod.write_bench_csv(args.out, rows)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="znnfov",
                     description="Field-of-values boundary computation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="predictive boundary sweep")
    _add_matrix_flags(p)
    p.add_argument("--scheme", required=True, help="builtin scheme name or scheme file")
    p.add_argument("--tau", type=float, required=True, help="sampling gap (radians)")
    p.add_argument("--eta", type=float, required=True, help="decay constant")
    p.add_argument("--mu", type=float, default=None, help="norm-row decay constant (default 3*eta)")
    p.add_argument("--t-final", type=float, default=TWO_PI)
    p.add_argument("--restart-threshold", type=float, default=None)
    p.add_argument("--out", help="boundary CSV output path")
    p.add_argument("--compare-oracle", action="store_true",
                   help="score each point against the eigensolve oracle")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="direct eigensolve boundary sweep")
    _add_matrix_flags(p)
    p.add_argument("--tau", type=float, required=True, help="grid spacing (radians)")
    p.add_argument("--t-final", type=float, default=TWO_PI)
    p.add_argument("--out", help="boundary CSV output path")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("scheme-check", help="stability report for a scheme")
    p.add_argument("--scheme", required=True, help="builtin scheme name or scheme file")
    p.add_argument("--roots-out", help="roots CSV output path")
    p.set_defaults(func=cmd_scheme_check)

    p = sub.add_parser("bench", help="tuned benchmark table")
    p.add_argument("--schemes", required=True, help="comma-separated scheme names/files")
    p.add_argument("--sizes", required=True, help="comma-separated matrix sizes")
    p.add_argument("--taus", required=True, help="comma-separated sampling gaps")
    p.add_argument("--h-range", help="lo:hi range for h = eta*tau")
    p.add_argument("--eta-search", help="lo:hi:steps explicit eta grid")
    p.add_argument("--seed", type=int, default=1, help="master seed")
    p.add_argument("--workers", type=int, default=None,
                   help="parallel workers (default: ZNNFOV_THREADS or auto)")
    p.add_argument("--out", help="bench CSV output path")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except UnstableSchemeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGENT
    except SweepFailure as exc:
        print(f"error: sweep aborted at step {exc.index}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
