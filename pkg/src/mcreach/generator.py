"""Seeded generation of strictly diagonally dominant sparse test systems.

Off-diagonal entries are positive integers at uniformly sampled
positions; each diagonal entry is the absolute row sum of its
off-diagonals plus a positive integer slack, which makes the matrix
strictly diagonally dominant and hence solvable by both Jacobi and
BiCGStab.  Note these are dominance-guaranteed positive test matrices,
not reduced chain systems: their entries are random integers rather
than values derived from transition probabilities.

Everything is a pure function of the spec, including its seed: the same
spec always reproduces the same matrix bit for bit.  The diagonal
entries count toward the requested number of stored entries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .sparse import CsrMatrix, _assemble

__all__ = [
    "GenSpec",
    "generate_dd_matrix",
    "generate_rhs",
    "table1_specs",
    "InfeasibleSpec",
    "TABLE1_SHAPES",
]


class InfeasibleSpec(ValueError):
    """The requested shape cannot hold a full diagonal."""


@dataclass(frozen=True)
class GenSpec:
    """Shape request: dimension plus either a fill fraction or an exact
    stored-entry count, a seed, and the off-diagonal integer range."""

    n: int
    density: Optional[float] = None
    nnz: Optional[int] = None
    seed: int = 0
    value_range: tuple[int, int] = (1, 10)

    def __post_init__(self):
        if self.n < 1:
            raise InfeasibleSpec(f"dimension must be positive, got {self.n}")
        if (self.density is None) == (self.nnz is None):
            raise InfeasibleSpec("exactly one of density and nnz must be set")
        if self.density is not None and not 0.0 < self.density <= 1.0:
            raise InfeasibleSpec(f"density {self.density} outside (0, 1]")
        if self.nnz is not None and not self.n <= self.nnz <= self.n * self.n:
            raise InfeasibleSpec(
                f"nnz {self.nnz} outside [{self.n}, {self.n * self.n}]"
            )
        lo, hi = self.value_range
        if not 1 <= lo <= hi:
            raise InfeasibleSpec(f"value range [{lo}, {hi}] must be positive")

    def target_nnz(self) -> int:
        """Stored entries the generated matrix will have, diagonal included."""
        if self.nnz is not None:
            return self.nnz
        exact = self.density * self.n * self.n
        if exact < self.n:
            raise InfeasibleSpec(
                f"density {self.density} leaves no room for the diagonal at n={self.n}"
            )
        return max(self.n, round(exact))


def _sample_off_diagonal(rng: np.random.Generator, n: int, count: int) -> np.ndarray:
    """Uniform sample without replacement of off-diagonal position codes.

    Position code k encodes row k // (n-1) and the k % (n-1)-th column
    skipping the diagonal.  Codes are collected in draw order with
    rejection of repeats, so the result depends only on the rng stream.
    """
    total = n * (n - 1)
    if count == total:
        return np.arange(total, dtype=np.int64)
    chosen: list[int] = []
    seen: set[int] = set()
    while len(chosen) < count:
        batch = rng.integers(0, total, size=max(1024, 2 * (count - len(chosen))))
        for code in batch.tolist():
            if code not in seen:
                seen.add(code)
                chosen.append(code)
                if len(chosen) == count:
                    break
    return np.array(chosen, dtype=np.int64)


def generate_dd_matrix(spec: GenSpec) -> CsrMatrix:
    """Generate a strictly diagonally dominant matrix for ``spec``.

    All ``n`` diagonal entries are present; the remaining entries sit at
    positions sampled uniformly without replacement, with values drawn
    uniformly from ``spec.value_range``.  Each diagonal entry equals the
    row's absolute off-diagonal sum plus a uniform integer slack in
    ``[1, value_range[1]]``, so dominance is strict in every row.
    """
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    count = spec.target_nnz() - n
    lo, hi = spec.value_range
    codes = _sample_off_diagonal(rng, n, count)
    rows = codes // (n - 1) if n > 1 else np.zeros(0, dtype=np.int64)
    offs = codes % (n - 1) if n > 1 else np.zeros(0, dtype=np.int64)
    cols = offs + (offs >= rows)
    values = rng.integers(lo, hi, size=count, endpoint=True).astype(np.float64)
    row_sums = np.bincount(rows, weights=np.abs(values), minlength=n)
    slack = rng.integers(1, hi, size=n, endpoint=True).astype(np.float64)
    diag = row_sums + slack
    all_rows = np.concatenate([rows, np.arange(n, dtype=np.int64)])
    all_cols = np.concatenate([cols, np.arange(n, dtype=np.int64)])
    all_vals = np.concatenate([values, diag])
    return _assemble(n, all_rows, all_cols, all_vals)


def generate_rhs(n: int, seed: int) -> np.ndarray:
    """Length-``n`` right-hand side of uniform integers in [1, 10]."""
    if n < 1:
        raise InfeasibleSpec(f"dimension must be positive, got {n}")
    rng = np.random.default_rng(seed)
    return rng.integers(1, 10, size=n, endpoint=True).astype(np.float64)


# Reference (n, nnz) shapes of reduced uncertain-block systems emitted by a
# probabilistic model checker for two randomized algorithms; used by the
# benchmark's --table1 preset.
TABLE1_SHAPES: tuple[tuple[int, int], ...] = (
    # random quick sort series
    (92, 211),
    (118, 263),
    (142, 312),
    (173, 379),
    (198, 430),
    (228, 491),
    (250, 536),
    (284, 606),
    (313, 669),
    # biased die series
    (667, 1333),
    (1333, 2665),
    (2000, 3999),
    (2668, 5335),
    (3647, 7293),
    (4647, 9293),
    (5647, 11293),
    (6647, 13293),
    (7647, 15293),
)


def table1_specs(seed: int = 0, value_range: tuple[int, int] = (1, 10)) -> list[GenSpec]:
    """Exact-count generator specs for the 18 reference shapes."""
    return [
        GenSpec(n=n, nnz=m, seed=seed, value_range=value_range)
        for n, m in TABLE1_SHAPES
    ]
