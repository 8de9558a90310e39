"""Sequential and thread-parallel Jacobi and BiCGStab solvers for CSR systems.

The parallel variants split the rows into contiguous blocks, one per
worker, and keep every floating-point operation in the same order as the
sequential code: element-wise vector updates and matrix-vector products
run per block (each row is still summed left to right), while inner
products are always accumulated sequentially in ascending index order.
A parallel solve therefore returns bit-identical results to its
sequential counterpart, and the test suite asserts exactly that.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .sparse import CsrMatrix, DimensionMismatch, diagonal, matvec, without_diagonal

__all__ = [
    "SolverConfig",
    "SolveResult",
    "jacobi_solve",
    "jacobi_solve_parallel",
    "bicgstab_solve",
    "bicgstab_solve_parallel",
    "residual_inf_norm",
    "SOLVERS",
    "SolverError",
    "ZeroDiagonal",
    "NotConverged",
    "Breakdown",
]

# Denominators at or below this magnitude count as exact breakdowns.
_TINY = 1e-300


class SolverError(RuntimeError):
    """Base class for solver failures."""


class ZeroDiagonal(SolverError):
    """Jacobi requires a non-zero diagonal in every row."""

    def __init__(self, index: int):
        super().__init__(f"zero diagonal entry in row {index}")
        self.index = index


class NotConverged(SolverError):
    """Iteration budget exhausted before the stopping rule was met.

    The last iterate is still available through ``result``.
    """

    def __init__(self, result: "SolveResult"):
        super().__init__(
            f"no convergence after {result.iterations} iterations "
            f"(residual sup-norm {result.residual_inf:.3e})"
        )
        self.result = result
        self.iterations = result.iterations
        self.residual_inf = result.residual_inf


class Breakdown(SolverError):
    """A BiCGStab denominator vanished and the recurrence cannot continue."""

    def __init__(self, which: str, iteration: int, result: "SolveResult"):
        super().__init__(f"breakdown: {which} vanished at iteration {iteration}")
        self.which = which
        self.iteration = iteration
        self.result = result


@dataclass(frozen=True)
class SolverConfig:
    """Shared knobs for all four solver variants.

    ``guess_seed`` switches the initial iterate from the zero vector to a
    seeded uniform random vector.  ``workers`` only affects the parallel
    variants and defaults to the machine's hardware parallelism.
    ``parallel_dot_products`` is an experiment flag: inner products are
    then reduced per row block (partials combined in ascending block
    order), which is deterministic for a fixed worker count but no longer
    bit-identical to the sequential solver.
    """

    tolerance: float = 1e-10
    max_iterations: int = 10_000
    guess_seed: Optional[int] = None
    workers: Optional[int] = None
    parallel_dot_products: bool = False

    def __post_init__(self):
        if not self.tolerance > 0.0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.workers is not None and self.workers < 1:
            raise ValueError("workers must be at least 1")

    def resolved_workers(self) -> int:
        return self.workers if self.workers is not None else (os.cpu_count() or 1)


@dataclass(frozen=True, eq=False)
class SolveResult:
    """Solution vector plus convergence report for one solve."""

    x: np.ndarray
    iterations: int
    converged: bool
    residual_inf: float
    wall_time: float


def residual_inf_norm(m: CsrMatrix, x: np.ndarray, b: np.ndarray) -> float:
    """Sup-norm of the true residual ``b - m @ x``."""
    x = np.asarray(x, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if x.shape != (m.n,) or b.shape != (m.n,):
        raise DimensionMismatch(
            f"system of dimension {m.n} with x{x.shape}, b{b.shape}"
        )
    if m.n == 0:
        return 0.0
    return float(np.max(np.abs(b - matvec(m, x))))


def _dot_ascending(u: np.ndarray, v: np.ndarray) -> float:
    # cumsum pins a strict left-to-right accumulation of the rounded
    # products, matching a scalar loop bit for bit
    if len(u) == 0:
        return 0.0
    return float(np.cumsum(u * v)[-1])


def _check_system(m: CsrMatrix, b) -> np.ndarray:
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (m.n,):
        raise DimensionMismatch(
            f"right-hand side of shape {b.shape} against dimension {m.n}"
        )
    return b


def _initial_guess(n: int, cfg: SolverConfig) -> np.ndarray:
    if cfg.guess_seed is None:
        return np.zeros(n)
    return np.random.default_rng(cfg.guess_seed).random(n)


def _row_blocks(n: int, workers: int) -> list[tuple[int, int]]:
    """Contiguous, balanced row ranges; blocks may be empty if workers > n."""
    base, extra = divmod(n, workers)
    blocks = []
    start = 0
    for k in range(workers):
        size = base + (1 if k < extra else 0)
        blocks.append((start, start + size))
        start += size
    return blocks


def _empty_result(start: float) -> SolveResult:
    return SolveResult(np.zeros(0), 0, True, 0.0, time.perf_counter() - start)


def _finish(m, b, x, iterations, converged, start) -> SolveResult:
    residual = residual_inf_norm(m, x, b)
    result = SolveResult(x, iterations, converged, residual, time.perf_counter() - start)
    if not converged:
        raise NotConverged(result)
    return result


def _snapshot(m, b, x, iterations, start) -> SolveResult:
    return SolveResult(
        x.copy(), iterations, False,
        residual_inf_norm(m, x, b), time.perf_counter() - start,
    )


# ---------------------------------------------------------------------------
# Jacobi


def jacobi_solve(m: CsrMatrix, b, config: Optional[SolverConfig] = None) -> SolveResult:
    """Solve ``m @ x = b`` by Jacobi iteration.

    Each sweep computes, from the frozen previous iterate,

        ``x[i] = (b[i] - sum_{j != i} m[i, j] * x_prev[j]) / m[i, i]``

    with the row sum taken in ascending column order, and stops once the
    largest element-wise change between consecutive iterates is at most
    ``config.tolerance``.

    Raises
    ------
    ZeroDiagonal
        if any row has no stored diagonal entry.
    NotConverged
        after ``max_iterations`` sweeps; the exception carries the last
        iterate in its ``result`` attribute.
    """
    cfg = config or SolverConfig()
    b = _check_system(m, b)
    start = time.perf_counter()
    if m.n == 0:
        return _empty_result(start)
    diag = _jacobi_diagonal(m)
    off = without_diagonal(m)._scipy
    x = _initial_guess(m.n, cfg)
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        x_next = (b - off @ x) / diag
        done = float(np.max(np.abs(x_next - x))) <= cfg.tolerance
        x = x_next
        if done:
            converged = True
            break
    return _finish(m, b, x, iterations, converged, start)


def jacobi_solve_parallel(m: CsrMatrix, b, config: Optional[SolverConfig] = None) -> SolveResult:
    """Row-block parallel variant of :func:`jacobi_solve`.

    Rows are split into one contiguous block per worker.  Every sweep
    reads the frozen previous iterate, writes a disjoint slice of the
    next one (double buffering), and the pool drain acts as a full
    barrier between sweeps.  Convergence is the AND-reduction of the
    per-block checks, which decides exactly like the sequential sup-norm
    test; iterates are bit-identical to :func:`jacobi_solve`.
    """
    cfg = config or SolverConfig()
    b = _check_system(m, b)
    start = time.perf_counter()
    if m.n == 0:
        return _empty_result(start)
    diag = _jacobi_diagonal(m)
    off = without_diagonal(m)._scipy
    workers = cfg.resolved_workers()
    blocks = _row_blocks(m.n, workers)
    off_blocks = [off[i0:i1] for i0, i1 in blocks]
    x = _initial_guess(m.n, cfg)
    x_next = np.empty_like(x)
    converged = False
    iterations = 0

    with ThreadPoolExecutor(max_workers=workers) as pool:

        def sweep_block(k: int) -> bool:
            i0, i1 = blocks[k]
            if i0 == i1:
                return True
            xb = (b[i0:i1] - off_blocks[k] @ x) / diag[i0:i1]
            x_next[i0:i1] = xb
            return bool(np.max(np.abs(xb - x[i0:i1])) <= cfg.tolerance)

        for iterations in range(1, cfg.max_iterations + 1):
            flags = list(pool.map(sweep_block, range(workers)))
            x, x_next = x_next, x
            if all(flags):
                converged = True
                break
    return _finish(m, b, x, iterations, converged, start)


def _jacobi_diagonal(m: CsrMatrix) -> np.ndarray:
    diag = diagonal(m)
    zero_rows = np.flatnonzero(diag == 0.0)
    if zero_rows.size:
        raise ZeroDiagonal(int(zero_rows[0]))
    return diag


# ---------------------------------------------------------------------------
# BiCGStab


class _SeqOps:
    """Whole-vector operations for the sequential BiCGStab."""

    def __init__(self, m: CsrMatrix):
        self._matrix = m._scipy

    def mv(self, src):
        return self._matrix @ src

    def search_direction(self, r, beta, p, w, v):
        return r + beta * (p - w * v)

    def scaled_diff(self, u, c, w):
        return u - c * w

    def advance(self, x, a, p, w, s):
        return x + a * p + w * s

    def within_tolerance(self, u, tol):
        return bool(np.max(np.abs(u)) <= tol)

    def dot(self, u, v):
        return _dot_ascending(u, v)


class _ParOps:
    """Row-block operations running on a worker pool.

    Each method performs the same element-wise arithmetic as
    :class:`_SeqOps` on disjoint slices, so all produced vectors are
    bit-identical to the sequential ones.  ``dot`` stays sequential
    unless the experimental per-block reduction is enabled.
    """

    def __init__(self, m: CsrMatrix, pool: ThreadPoolExecutor,
                 blocks: list[tuple[int, int]], parallel_dots: bool):
        self._n = m.n
        self._pool = pool
        self._blocks = blocks
        self._mats = [m._scipy[i0:i1] for i0, i1 in blocks]
        self._parallel_dots = parallel_dots

    def _each(self, fn):
        return list(self._pool.map(fn, range(len(self._blocks))))

    def mv(self, src):
        out = np.empty(self._n)

        def task(k):
            i0, i1 = self._blocks[k]
            if i0 < i1:
                out[i0:i1] = self._mats[k] @ src

        self._each(task)
        return out

    def search_direction(self, r, beta, p, w, v):
        out = np.empty(self._n)

        def task(k):
            i0, i1 = self._blocks[k]
            out[i0:i1] = r[i0:i1] + beta * (p[i0:i1] - w * v[i0:i1])

        self._each(task)
        return out

    def scaled_diff(self, u, c, w):
        out = np.empty(self._n)

        def task(k):
            i0, i1 = self._blocks[k]
            out[i0:i1] = u[i0:i1] - c * w[i0:i1]

        self._each(task)
        return out

    def advance(self, x, a, p, w, s):
        out = np.empty(self._n)

        def task(k):
            i0, i1 = self._blocks[k]
            out[i0:i1] = x[i0:i1] + a * p[i0:i1] + w * s[i0:i1]

        self._each(task)
        return out

    def within_tolerance(self, u, tol):
        def task(k):
            i0, i1 = self._blocks[k]
            if i0 == i1:
                return True
            return bool(np.max(np.abs(u[i0:i1])) <= tol)

        return all(self._each(task))

    def dot(self, u, v):
        if not self._parallel_dots:
            return _dot_ascending(u, v)

        def task(k):
            i0, i1 = self._blocks[k]
            return _dot_ascending(u[i0:i1], v[i0:i1])

        partials = self._each(task)
        acc = 0.0
        for part in partials:  # combine in ascending block order
            acc += part
        return acc


def bicgstab_solve(m: CsrMatrix, b, config: Optional[SolverConfig] = None) -> SolveResult:
    """Solve ``m @ x = b`` with un-preconditioned BiCGStab.

    The shadow vector is fixed to the initial residual, which guarantees
    a non-zero starting inner product whenever the solve does not finish
    immediately.  Convergence is declared once every entry of the
    intermediate residual ``s`` is at most ``config.tolerance`` in
    magnitude; the solution and residual updates of that final iteration
    are still applied.  If the initial residual is already within
    tolerance the solver returns after zero iterations.

    Raises
    ------
    Breakdown
        when a denominator (previous inner product times stabilization
        weight, shadow-direction inner product, or the stabilization
        normalizer ``t . t``) is exactly zero or below 1e-300 while the
        iteration still has to make progress.
    NotConverged
        after ``max_iterations`` iterations, with the last iterate
        attached.
    """
    cfg = config or SolverConfig()
    b = _check_system(m, b)
    start = time.perf_counter()
    if m.n == 0:
        return _empty_result(start)
    return _bicgstab(m, b, cfg, _SeqOps(m), start)


def bicgstab_solve_parallel(m: CsrMatrix, b, config: Optional[SolverConfig] = None) -> SolveResult:
    """Row-block parallel variant of :func:`bicgstab_solve`.

    Element-wise vector updates and the two matrix-vector products per
    iteration run on the pool, one contiguous row block per worker, with
    a barrier between dependent steps.  Inner products are accumulated
    sequentially in ascending index order (unless the experimental
    ``parallel_dot_products`` flag is set), so results are bit-identical
    to the sequential solver.
    """
    cfg = config or SolverConfig()
    b = _check_system(m, b)
    start = time.perf_counter()
    if m.n == 0:
        return _empty_result(start)
    workers = cfg.resolved_workers()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        ops = _ParOps(m, pool, _row_blocks(m.n, workers), cfg.parallel_dot_products)
        return _bicgstab(m, b, cfg, ops, start)


def _bicgstab(m, b, cfg, ops, start) -> SolveResult:
    x = _initial_guess(m.n, cfg)
    r = ops.scaled_diff(b, 1.0, ops.mv(x))
    if ops.within_tolerance(r, cfg.tolerance):
        return _finish(m, b, x, 0, True, start)
    q = r.copy()  # shadow vector: q . r = |r|^2 > 0 here
    y = a = w = 1.0
    v = np.zeros(m.n)
    p = np.zeros(m.n)
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        y_prev = y
        y = ops.dot(q, r)
        denom = y_prev * w
        if denom == 0.0 or abs(denom) < _TINY:
            raise Breakdown("y_prev*w", iterations, _snapshot(m, b, x, iterations, start))
        beta = (y * a) / denom
        p = ops.search_direction(r, beta, p, w, v)
        v = ops.mv(p)
        qv = ops.dot(q, v)
        if qv == 0.0 or abs(qv) < _TINY:
            raise Breakdown("q*v", iterations, _snapshot(m, b, x, iterations, start))
        a = y / qv
        s = ops.scaled_diff(r, a, v)
        t = ops.mv(s)
        small = ops.within_tolerance(s, cfg.tolerance)
        tt = ops.dot(t, t)
        if tt == 0.0 or abs(tt) < _TINY:
            if not small:
                raise Breakdown("t*t", iterations, _snapshot(m, b, x, iterations, start))
            # s is already at tolerance (t = m @ s vanished with it), so
            # finish the update without the stabilization term
            w = 0.0
        else:
            w = ops.dot(t, s) / tt
        x = ops.advance(x, a, p, w, s)
        r = ops.scaled_diff(s, w, t)
        if small:
            converged = True
            break
    return _finish(m, b, x, iterations, converged, start)


SOLVERS: dict[str, Callable[..., SolveResult]] = {
    "jacobi-seq": jacobi_solve,
    "jacobi-par": jacobi_solve_parallel,
    "bicgstab-seq": bicgstab_solve,
    "bicgstab-par": bicgstab_solve_parallel,
}
