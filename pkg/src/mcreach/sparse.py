"""Compressed row storage (CSR) matrices and the row-wise kernels on them.

An ``n x n`` matrix keeps only its non-zero entries in three vectors:
``rstart`` (length ``n + 1``, cumulative entry count per row), ``col``
(column index of each stored entry) and ``nonzero`` (the values).  Rows
are kept sorted by column with no duplicates and no explicit zeros, so
every row-wise sum has a single well-defined left-to-right evaluation
order and results are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple

import numpy as np
import scipy.sparse

__all__ = [
    "Triplet",
    "CsrMatrix",
    "csr_from_triplets",
    "matvec",
    "diagonal",
    "density",
    "identity_minus",
    "without_diagonal",
    "triplets",
    "SparseError",
    "DuplicateEntry",
    "IndexOutOfRange",
    "DimensionMismatch",
    "ZeroDimension",
]


class SparseError(ValueError):
    """Base class for assembly and dimension errors."""


class DuplicateEntry(SparseError):
    """Two input triplets share the same (row, col) position."""

    def __init__(self, row: int, col: int):
        super().__init__(f"duplicate entry at ({row}, {col})")
        self.row = row
        self.col = col


class IndexOutOfRange(SparseError):
    """A row or column index does not fit the target dimension."""


class DimensionMismatch(SparseError):
    """Operand shapes do not agree."""


class ZeroDimension(SparseError):
    """The operation is undefined for an empty matrix."""


class Triplet(NamedTuple):
    """One matrix entry given as (row, col, value)."""

    row: int
    col: int
    value: float


@dataclass(frozen=True, eq=False)
class CsrMatrix:
    """Immutable square sparse matrix in compressed row storage.

    ``rstart[i]`` is the number of stored entries in the first ``i`` rows,
    so row ``i`` occupies the slice ``rstart[i]:rstart[i + 1]`` of ``col``
    and ``nonzero``.  Instances are safe to share read-only between any
    number of threads.
    """

    n: int
    rstart: np.ndarray
    col: np.ndarray
    nonzero: np.ndarray

    @property
    def m(self) -> int:
        """Number of stored entries."""
        return int(self.rstart[-1])

    @cached_property
    def _scipy(self) -> scipy.sparse.csr_matrix:
        # Shared read-only handle.  scipy's CSR matvec accumulates each row
        # strictly left to right, which is the summation order we guarantee
        # (asserted bitwise against a dense loop in the test suite).
        return scipy.sparse.csr_matrix(
            (self.nonzero, self.col, self.rstart), shape=(self.n, self.n)
        )


def check_invariants(a: CsrMatrix) -> None:
    """Raise :class:`SparseError` unless ``a`` is structurally sound."""
    rs, cols, vals = a.rstart, a.col, a.nonzero
    if rs.shape != (a.n + 1,) or rs[0] != 0:
        raise SparseError("malformed rstart vector")
    if int(rs[-1]) != len(cols) or len(cols) != len(vals):
        raise SparseError("rstart does not match the stored entry count")
    if np.any(np.diff(rs) < 0):
        raise SparseError("rstart must be nondecreasing")
    if len(cols):
        if int(cols.min()) < 0 or int(cols.max()) >= a.n:
            raise SparseError("column index out of range")
        rows = _row_of_entry(a)
        same_row = rows[1:] == rows[:-1]
        if np.any((cols[1:] <= cols[:-1]) & same_row):
            raise SparseError("columns must be strictly increasing within a row")
    if np.any(vals == 0.0):
        raise SparseError("explicit zero stored")


def _row_of_entry(a: CsrMatrix) -> np.ndarray:
    return np.repeat(np.arange(a.n, dtype=np.int64), np.diff(a.rstart))


def _assemble(n: int, rows: np.ndarray, cols: np.ndarray, vals: np.ndarray) -> CsrMatrix:
    """Build a matrix from entry arrays with unique positions.

    Explicit zeros are dropped and entries are sorted by (row, col); the
    caller guarantees there are no duplicate positions.
    """
    vals = np.asarray(vals, dtype=np.float64)
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    keep = vals != 0.0
    rows, cols, vals = rows[keep], cols[keep], vals[keep]
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    rstart = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=rstart[1:])
    out = CsrMatrix(n, rstart, cols, vals)
    check_invariants(out)
    return out


def csr_from_triplets(n: int, entries: Iterable[tuple]) -> CsrMatrix:
    """Assemble an ``n x n`` matrix from (row, col, value) entries.

    Zero-valued entries are dropped, every row ends up sorted by column.
    A position occurring twice is rejected even if one occurrence is zero,
    since duplicates indicate a malformed input rather than accumulation.
    """
    if n < 0:
        raise IndexOutOfRange(f"dimension must be nonnegative, got {n}")
    ent = [Triplet(int(e[0]), int(e[1]), float(e[2])) for e in entries]
    if not ent:
        empty = np.zeros(0)
        return _assemble(n, empty, empty, empty)
    rows = np.array([e.row for e in ent], dtype=np.int64)
    cols = np.array([e.col for e in ent], dtype=np.int64)
    vals = np.array([e.value for e in ent], dtype=np.float64)
    bad = (rows < 0) | (rows >= n) | (cols < 0) | (cols >= n)
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        raise IndexOutOfRange(
            f"entry ({rows[k]}, {cols[k]}) outside dimension {n}"
        )
    order = np.lexsort((cols, rows))
    dup = (rows[order][1:] == rows[order][:-1]) & (cols[order][1:] == cols[order][:-1])
    if np.any(dup):
        k = int(order[1:][np.flatnonzero(dup)[0]])
        raise DuplicateEntry(int(rows[k]), int(cols[k]))
    return _assemble(n, rows, cols, vals)


def triplets(a: CsrMatrix) -> list[Triplet]:
    """Stored entries in row-major, column-ascending order."""
    rows = _row_of_entry(a)
    return [
        Triplet(int(r), int(c), float(v))
        for r, c, v in zip(rows, a.col, a.nonzero)
    ]


def matvec(a: CsrMatrix, x: np.ndarray) -> np.ndarray:
    """Return ``a @ x`` with each row summed in ascending column order."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (a.n,):
        raise DimensionMismatch(
            f"vector of shape {x.shape} against dimension {a.n}"
        )
    return a._scipy @ x


def diagonal(a: CsrMatrix) -> np.ndarray:
    """Stored (i, i) values, with 0.0 where no diagonal entry is stored."""
    if a.n == 0:
        return np.zeros(0)
    return a._scipy.diagonal()


def density(a: CsrMatrix) -> float:
    """Fill fraction ``m / n**2``."""
    if a.n <= 0:
        raise ZeroDimension("density is undefined for an empty matrix")
    return a.m / (a.n * a.n)


def identity_minus(a: CsrMatrix) -> CsrMatrix:
    """Return ``I - a`` in CSR form.

    Off-diagonal entries are negated, diagonal entries become ``1 - v``
    (dropped when that difference is exactly zero), and rows without a
    stored diagonal gain an explicit 1.
    """
    rows = _row_of_entry(a)
    on_diag = rows == a.col
    new_diag = np.ones(a.n)
    new_diag[rows[on_diag]] = 1.0 - a.nonzero[on_diag]
    keep = new_diag != 0.0
    diag_idx = np.flatnonzero(keep)
    out_rows = np.concatenate([rows[~on_diag], diag_idx])
    out_cols = np.concatenate([a.col[~on_diag], diag_idx])
    out_vals = np.concatenate([-a.nonzero[~on_diag], new_diag[keep]])
    return _assemble(a.n, out_rows, out_cols, out_vals)


def without_diagonal(a: CsrMatrix) -> CsrMatrix:
    """Copy of ``a`` with every stored (i, i) entry removed."""
    rows = _row_of_entry(a)
    off = rows != a.col
    return _assemble(a.n, rows[off], a.col[off], a.nonzero[off])
