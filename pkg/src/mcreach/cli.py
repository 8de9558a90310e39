"""Command-line front end: solve chain files, generate systems, run sweeps.

Exit codes: 0 success, 1 usage error, 2 parse or validation error,
3 solver failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .bench import (DEFAULT_DENSITIES, DEFAULT_SIZES, SweepPlan, run_sweep,
                    table1_plan, write_summary)
from .formats import read_dtmc, write_matrix, write_vector
from .generator import GenSpec, generate_dd_matrix, generate_rhs
from .markov import reachability_probabilities
from .solvers import SOLVERS, SolverConfig, SolverError

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_SOLVER = 3
EXIT_IO = 4


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors by default; our contract says 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _comma_ints(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part)


def _comma_floats(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part)


def _comma_methods(text: str) -> tuple[str, ...]:
    methods = tuple(part for part in text.split(",") if part)
    for method in methods:
        if method not in SOLVERS:
            raise argparse.ArgumentTypeError(
                f"unknown method {method!r}, pick from {', '.join(SOLVERS)}"
            )
    return methods


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mcreach", description=__doc__)
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", help="reachability probability of a chain file")
    solve.add_argument("--input", required=True, help="chain file to analyze")
    solve.add_argument("--method", choices=("jacobi", "bicgstab"), default="jacobi")
    solve.add_argument("--parallel", action="store_true", help="use the row-block parallel variant")
    solve.add_argument("--workers", type=int, default=None, help="worker count for --parallel")
    solve.add_argument("--tol", type=float, default=1e-10, help="solver tolerance")
    solve.add_argument("--max-iters", type=int, default=10_000, help="iteration budget")
    solve.add_argument("--seed", type=int, default=None,
                       help="start from a seeded random vector instead of zeros")
    solve.add_argument("--full-vector", action="store_true",
                       help="also print one '<state> <probability>' line per state")
    solve.set_defaults(func=_cmd_solve)

    bench = commands.add_parser("bench", help="timed sweep over generated systems, CSV output")
    bench.add_argument("--sizes", type=_comma_ints, default=None, help="comma-separated dimensions")
    bench.add_argument("--densities", type=_comma_floats, default=None,
                       help="comma-separated fill fractions")
    bench.add_argument("--table1", action="store_true",
                       help="run the 18 built-in reference shapes "
                            "(defaults to one trial of jacobi-seq)")
    bench.add_argument("--trials", type=int, default=None, help="trials per cell")
    bench.add_argument("--methods", type=_comma_methods, default=None,
                       help=f"comma-separated subset of: {', '.join(SOLVERS)}")
    bench.add_argument("--base-seed", type=int, default=0)
    bench.add_argument("--output", required=True, help="CSV file to write")
    bench.add_argument("--summarize", action="store_true",
                       help="also write per-cell mean/stddev CSV next to the output")
    bench.set_defaults(func=_cmd_bench)

    generate = commands.add_parser("generate", help="write a generated system to disk")
    generate.add_argument("--n", type=int, required=True, help="dimension")
    target = generate.add_mutually_exclusive_group(required=True)
    target.add_argument("--density", type=float, default=None, help="fill fraction")
    target.add_argument("--nnz", type=int, default=None, help="exact stored entry count")
    generate.add_argument("--seed", type=int, default=0)
    generate.add_argument("--out", required=True,
                          help="matrix file; the right-hand side goes to <out>.rhs")
    generate.set_defaults(func=_cmd_generate)

    return parser


def _cmd_solve(args) -> int:
    chain, goals = read_dtmc(args.input)
    config = SolverConfig(
        tolerance=args.tol,
        max_iterations=args.max_iters,
        guess_seed=args.seed,
        workers=args.workers,
    )
    method = f"{args.method}-{'par' if args.parallel else 'seq'}"
    x, _ = reachability_probabilities(chain, goals, method, config)
    print(f"{x[chain.initial]:.10g}")
    if args.full_vector:
        for state, value in enumerate(x):
            print(f"{state} {value:.10g}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    if args.table1:
        if args.sizes is not None or args.densities is not None:
            raise ValueError("--table1 cannot be combined with --sizes/--densities")
        plan = table1_plan(
            trials=args.trials if args.trials is not None else 1,
            methods=args.methods if args.methods is not None else ("jacobi-seq",),
            base_seed=args.base_seed,
        )
    else:
        plan = SweepPlan(
            sizes=args.sizes if args.sizes is not None else DEFAULT_SIZES,
            densities=args.densities if args.densities is not None else DEFAULT_DENSITIES,
            trials=args.trials if args.trials is not None else 20,
            methods=args.methods if args.methods is not None else tuple(SOLVERS),
            base_seed=args.base_seed,
        )
    records = run_sweep(plan, args.output)
    if args.summarize:
        write_summary(records, Path(args.output).with_suffix(".summary.csv"))
    return EXIT_OK


def _cmd_generate(args) -> int:
    spec = GenSpec(n=args.n, density=args.density, nnz=args.nnz, seed=args.seed)
    matrix = generate_dd_matrix(spec)
    rhs = generate_rhs(args.n, args.seed)
    write_matrix(matrix, args.out)
    write_vector(rhs, f"{args.out}.rhs")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SolverError as err:
        print(f"mcreach: solver error: {err}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as err:
        print(f"mcreach: i/o error: {err}", file=sys.stderr)
        return EXIT_IO
    except ValueError as err:
        print(f"mcreach: {err}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
