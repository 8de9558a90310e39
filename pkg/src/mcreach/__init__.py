"""Reachability probabilities of discrete-time Markov chains.

The library partitions the state space against a goal set, builds the
reduced ``(I - A) @ x = b`` system over the uncertain states and solves
it with sequential or thread-parallel Jacobi and BiCGStab iterations on
compressed-row sparse storage.  A generator for strictly diagonally
dominant random systems and a CSV benchmark harness round out the
package; the ``mcreach`` command exposes all of it.
"""

from .sparse import (
    CsrMatrix,
    DimensionMismatch,
    DuplicateEntry,
    IndexOutOfRange,
    SparseError,
    Triplet,
    ZeroDimension,
    csr_from_triplets,
    density,
    diagonal,
    identity_minus,
    matvec,
    triplets,
    without_diagonal,
)
from .markov import (
    GoalSet,
    LinearSystem,
    MarkovChain,
    MarkovChainError,
    ProbabilityOutOfRange,
    RowSumError,
    StatePartition,
    build_system,
    one_step_probability,
    partition_states,
    reachability_probabilities,
    validate,
)
from .solvers import (
    SOLVERS,
    Breakdown,
    NotConverged,
    SolveResult,
    SolverConfig,
    SolverError,
    ZeroDiagonal,
    bicgstab_solve,
    bicgstab_solve_parallel,
    jacobi_solve,
    jacobi_solve_parallel,
    residual_inf_norm,
)
from .generator import (
    GenSpec,
    InfeasibleSpec,
    TABLE1_SHAPES,
    generate_dd_matrix,
    generate_rhs,
    table1_specs,
)
from .formats import (
    ParseError,
    read_dtmc,
    read_matrix,
    read_vector,
    write_dtmc,
    write_matrix,
    write_vector,
)
from .bench import (
    SweepPlan,
    TrialRecord,
    run_sweep,
    summarize,
    table1_plan,
)

__version__ = "0.1.0"
