"""Timed sweeps over generated systems, recorded as CSV.

For every (size, target, method, trial) cell the sweep generates a fresh
system from a seed derived deterministically from the plan's base seed,
times the bare solver call with a monotonic clock (generation and I/O
are excluded), and appends one row.  Reruns with the same base seed
reproduce every column except ``wall_time_ns``.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from statistics import fmean, pstdev
from typing import Optional, Sequence

import numpy as np

from .generator import GenSpec, generate_dd_matrix, generate_rhs, TABLE1_SHAPES
from .solvers import SOLVERS, SolverConfig, SolverError

__all__ = [
    "TrialRecord",
    "SweepPlan",
    "run_sweep",
    "read_records",
    "summarize",
    "write_summary",
    "table1_plan",
    "CSV_HEADER",
    "DEFAULT_SIZES",
    "DEFAULT_DENSITIES",
]

CSV_HEADER = [
    "method", "n", "m", "density", "trial", "seed",
    "iterations", "converged", "residual_inf", "wall_time_ns",
]

SUMMARY_HEADER = [
    "method", "n", "m", "density", "trials",
    "iterations_mean", "wall_time_ns_mean", "wall_time_ns_stddev",
]

# Stand-in sweep grid used when no sizes/densities are given; chosen to
# span the sparse-to-dense transition, not taken from any measured data.
DEFAULT_SIZES = (1000, 5000, 10000)
DEFAULT_DENSITIES = (0.001, 0.005, 0.01, 0.05, 0.1)


@dataclass(frozen=True)
class TrialRecord:
    """One CSV row: a single timed solve of a generated system."""

    method: str
    n: int
    m: int
    density: float
    trial: int
    seed: int
    iterations: int
    converged: bool
    residual_inf: float
    wall_time_ns: int

    def __post_init__(self):
        if self.method not in SOLVERS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.density != self.m / (self.n * self.n):
            raise ValueError("density must equal m / n**2")
        if self.wall_time_ns <= 0:
            raise ValueError("wall_time_ns must be positive")

    def to_row(self) -> list[str]:
        return [
            self.method,
            str(self.n),
            str(self.m),
            format(self.density, ".17g"),
            str(self.trial),
            str(self.seed),
            str(self.iterations),
            "true" if self.converged else "false",
            format(self.residual_inf, ".17g"),
            str(self.wall_time_ns),
        ]

    @classmethod
    def from_row(cls, row: Sequence[str]) -> "TrialRecord":
        return cls(
            method=row[0],
            n=int(row[1]),
            m=int(row[2]),
            density=float(row[3]),
            trial=int(row[4]),
            seed=int(row[5]),
            iterations=int(row[6]),
            converged={"true": True, "false": False}[row[7]],
            residual_inf=float(row[8]),
            wall_time_ns=int(row[9]),
        )


@dataclass(frozen=True)
class SweepPlan:
    """What to benchmark: sizes crossed with densities, or exact
    (size, nnz) pairs when ``nnz`` is given (paired element-wise with
    ``sizes``)."""

    sizes: tuple[int, ...]
    densities: Optional[tuple[float, ...]] = None
    nnz: Optional[tuple[int, ...]] = None
    trials: int = 20
    methods: tuple[str, ...] = tuple(SOLVERS)
    base_seed: int = 0

    def __post_init__(self):
        if not self.sizes:
            raise ValueError("plan needs at least one size")
        if (self.densities is None) == (self.nnz is None):
            raise ValueError("exactly one of densities and nnz must be set")
        if self.densities is not None and not self.densities:
            raise ValueError("plan needs at least one density")
        if self.nnz is not None and len(self.nnz) != len(self.sizes):
            raise ValueError("nnz list must pair up with sizes")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.methods:
            raise ValueError("plan needs at least one method")
        for method in self.methods:
            if method not in SOLVERS:
                raise ValueError(f"unknown method {method!r}")

    def cells(self) -> list[tuple[int, Optional[float], Optional[int]]]:
        """(n, density, nnz) cells in sweep order."""
        if self.nnz is not None:
            return [(n, None, m) for n, m in zip(self.sizes, self.nnz)]
        return [(n, d, None) for n in self.sizes for d in self.densities]


def table1_plan(trials: int = 1, methods: tuple[str, ...] = ("jacobi-seq",),
                base_seed: int = 0) -> SweepPlan:
    """Plan replicating the 18 reference (size, nnz) shapes."""
    sizes = tuple(n for n, _ in TABLE1_SHAPES)
    nnz = tuple(m for _, m in TABLE1_SHAPES)
    return SweepPlan(sizes=sizes, nnz=nnz, trials=trials,
                     methods=methods, base_seed=base_seed)


def trial_seed(base_seed: int, n: int, density: Optional[float],
               nnz: Optional[int], trial: int) -> int:
    """Deterministic per-(cell, trial) seed, independent of the method.

    Mixes the cell coordinates into the base seed through a seed
    sequence, which is stable across runs and platforms.  All methods of
    one cell/trial therefore solve the same system.
    """
    if density is not None:
        target_key = int(np.float64(density).view(np.uint64))
    else:
        target_key = int(nnz)
    ss = np.random.SeedSequence([int(base_seed), int(n), target_key, int(trial)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_sweep(plan: SweepPlan, output, config: Optional[SolverConfig] = None) -> list[TrialRecord]:
    """Run the plan, write the CSV to ``output``, return the records.

    A solver failure (non-convergence or breakdown) is recorded in its
    row with ``converged = false`` and does not abort the sweep.
    """
    cfg = config or SolverConfig()
    records = []
    for n, dens, nnz in plan.cells():
        for method in plan.methods:
            solve = SOLVERS[method]
            for trial in range(plan.trials):
                seed = trial_seed(plan.base_seed, n, dens, nnz, trial)
                spec = GenSpec(n=n, density=dens, nnz=nnz, seed=seed)
                matrix = generate_dd_matrix(spec)
                rhs = generate_rhs(n, seed)
                begin = time.perf_counter_ns()
                try:
                    result = solve(matrix, rhs, cfg)
                except SolverError as err:
                    result = err.result
                elapsed = max(1, time.perf_counter_ns() - begin)
                records.append(TrialRecord(
                    method=method,
                    n=n,
                    m=matrix.m,
                    density=matrix.m / (n * n),
                    trial=trial,
                    seed=seed,
                    iterations=result.iterations,
                    converged=result.converged,
                    residual_inf=result.residual_inf,
                    wall_time_ns=elapsed,
                ))
    _write_records(records, output)
    return records


def _write_records(records: list[TrialRecord], output) -> None:
    with open(output, "w", encoding="ascii", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_HEADER)
        for record in records:
            writer.writerow(record.to_row())


def read_records(path) -> list[TrialRecord]:
    """Parse a sweep CSV back into records."""
    with open(path, "r", encoding="ascii", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        return [TrialRecord.from_row(row) for row in reader]


def summarize(records: list[TrialRecord]) -> list[list[str]]:
    """Mean/stddev rows per (method, n, m, density) cell, in first-seen
    order.  The stddev is the population standard deviation, 0 for a
    single trial."""
    groups: dict[tuple, list[TrialRecord]] = {}
    for record in records:
        key = (record.method, record.n, record.m, record.density)
        groups.setdefault(key, []).append(record)
    rows = []
    for (method, n, m, dens), group in groups.items():
        times = [r.wall_time_ns for r in group]
        rows.append([
            method,
            str(n),
            str(m),
            format(dens, ".17g"),
            str(len(group)),
            format(fmean(r.iterations for r in group), ".17g"),
            format(fmean(times), ".17g"),
            format(pstdev(times), ".17g"),
        ])
    return rows


def write_summary(records: list[TrialRecord], output) -> None:
    """Write the per-cell summary CSV next to the main output."""
    with open(output, "w", encoding="ascii", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(SUMMARY_HEADER)
        writer.writerows(summarize(records))
