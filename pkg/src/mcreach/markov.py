"""Discrete-time Markov chains and their goal-reachability linear systems.

A chain is a CSR transition matrix plus a start state.  Given a set of
goal states, the state space splits into the states that reach a goal
with probability one, with probability zero, and the "uncertain" rest.
Only the uncertain block needs a linear solve: with ``A`` the transition
probabilities restricted to it and ``b`` the per-state probability of
stepping straight into a goal, the hit probabilities solve
``(I - A) @ x = b``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .sparse import CsrMatrix, _assemble, _row_of_entry, identity_minus, matvec
from .solvers import SOLVERS, SolveResult, SolverConfig

__all__ = [
    "MarkovChain",
    "GoalSet",
    "StatePartition",
    "LinearSystem",
    "validate",
    "partition_states",
    "one_step_probability",
    "build_system",
    "reachability_probabilities",
    "MarkovChainError",
    "RowSumError",
    "ProbabilityOutOfRange",
    "ROW_SUM_TOL",
]

# Exact stochasticity cannot survive decimal file round-trips, so row sums
# get this much slack.
ROW_SUM_TOL = 1e-9


class MarkovChainError(ValueError):
    """A chain or goal set violates its invariants."""


class RowSumError(MarkovChainError):
    """A row of the transition matrix does not sum to one."""

    def __init__(self, state: int, total: float):
        super().__init__(f"row {state} sums to {total!r}, expected 1")
        self.state = state
        self.total = total


class ProbabilityOutOfRange(MarkovChainError):
    """A stored transition probability lies outside (0, 1]."""

    def __init__(self, src: int, dst: int, value: float):
        super().__init__(f"transition {src} -> {dst} has probability {value!r}")
        self.src = src
        self.dst = dst
        self.value = value


@dataclass(frozen=True, eq=False)
class MarkovChain:
    """A finite chain: state count, CSR transition matrix, start state."""

    n: int
    transitions: CsrMatrix
    initial: int


@dataclass(frozen=True)
class GoalSet:
    """Non-empty set of target states."""

    members: frozenset

    def __init__(self, members: Iterable[int]):
        object.__setattr__(self, "members", frozenset(int(s) for s in members))
        if not self.members:
            raise MarkovChainError("goal set must not be empty")


@dataclass(frozen=True, eq=False)
class StatePartition:
    """States split by their probability of ever hitting the goal set.

    ``uncertain`` lists the states with probability strictly between 0
    and 1 in ascending order; ``index_of`` maps each of them to its
    position, which is the row/column it occupies in the reduced system.
    """

    prob_one: frozenset
    prob_zero: frozenset
    uncertain: np.ndarray
    index_of: dict


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """Reduced system ``matrix @ x = rhs`` over the uncertain states.

    ``matrix`` is ``I - A`` with ``A`` the transition probabilities among
    uncertain states, reindexed by ``partition.index_of``; ``rhs`` holds
    each uncertain state's one-step probability of entering the goal set.
    """

    matrix: CsrMatrix
    rhs: np.ndarray
    partition: StatePartition


def validate(chain: MarkovChain) -> None:
    """Check the chain invariants, raising on the first violation.

    Every stored probability must lie in (0, 1], every row must sum to 1
    within ``ROW_SUM_TOL``, and the start state must exist.
    """
    p = chain.transitions
    if p.n != chain.n:
        raise MarkovChainError(
            f"matrix dimension {p.n} does not match state count {chain.n}"
        )
    if chain.n < 1:
        raise MarkovChainError("a chain needs at least one state")
    if not 0 <= chain.initial < chain.n:
        raise MarkovChainError(f"initial state {chain.initial} out of range")
    vals = p.nonzero
    bad = np.flatnonzero((vals <= 0.0) | (vals > 1.0))
    if bad.size:
        k = int(bad[0])
        src = int(np.searchsorted(p.rstart, k, side="right") - 1)
        raise ProbabilityOutOfRange(src, int(p.col[k]), float(vals[k]))
    sums = matvec(p, np.ones(chain.n))
    off = np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)
    if off.size:
        s = int(off[0])
        raise RowSumError(s, float(sums[s]))


def _check_goals(chain: MarkovChain, goals: GoalSet) -> None:
    if any(not 0 <= g < chain.n for g in goals.members):
        raise MarkovChainError(
            f"goal states {sorted(goals.members)} must lie below {chain.n}"
        )


def _reversed_adjacency(p: CsrMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Adjacency of the reversed underlying digraph (rstart, col form)."""
    n = p.n
    sources = _row_of_entry(p)
    rstart = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(p.col, minlength=n), out=rstart[1:])
    order = np.argsort(p.col, kind="stable")
    return rstart, sources[order]


def _backward_closure(rev_rstart, rev_col, seeds, n: int, blocked=None) -> np.ndarray:
    """Boolean mask of states with a (length >= 0) path into ``seeds``.

    States flagged in ``blocked`` are never entered, so paths through
    them do not count (seeds are assumed unblocked).
    """
    seen = np.zeros(n, dtype=bool)
    queue = deque()
    for s in seeds:
        s = int(s)
        if not seen[s]:
            seen[s] = True
            queue.append(s)
    while queue:
        s = queue.popleft()
        for t in rev_col[rev_rstart[s]:rev_rstart[s + 1]]:
            if not seen[t] and (blocked is None or not blocked[t]):
                seen[t] = True
                queue.append(t)
    return seen


def partition_states(chain: MarkovChain, goals: GoalSet) -> StatePartition:
    """Classify every state by its probability of ever reaching a goal.

    Two breadth-first searches over the reversed digraph (an edge exists
    wherever a transition probability is strictly positive): states with
    no path to any goal hit with probability zero.  States hit with
    probability one exactly when they cannot reach that zero-probability
    set on a path avoiding the goals; the avoidance matters because a
    run that touches a goal has already succeeded, no matter where it
    ends up afterwards.  In particular every goal state lands in
    ``prob_one``.  Everything else is uncertain, listed in ascending
    state order.
    """
    _check_goals(chain, goals)
    n = chain.n
    rev_rstart, rev_col = _reversed_adjacency(chain.transitions)
    reaches_goal = _backward_closure(rev_rstart, rev_col, goals.members, n)
    zero = ~reaches_goal
    goal_mask = _goal_mask(n, goals)
    reaches_zero = _backward_closure(
        rev_rstart, rev_col, np.flatnonzero(zero), n, blocked=goal_mask
    )
    one = ~reaches_zero
    uncertain = np.flatnonzero(~zero & ~one).astype(np.int64)
    index_of = {int(s): i for i, s in enumerate(uncertain)}
    return StatePartition(
        prob_one=frozenset(np.flatnonzero(one).tolist()),
        prob_zero=frozenset(np.flatnonzero(zero).tolist()),
        uncertain=uncertain,
        index_of=index_of,
    )


def _goal_mask(n: int, goals: GoalSet) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    mask[list(goals.members)] = True
    return mask


def _one_step(p: CsrMatrix, s: int, goal_mask: np.ndarray) -> float:
    lo, hi = int(p.rstart[s]), int(p.rstart[s + 1])
    sel = p.nonzero[lo:hi][goal_mask[p.col[lo:hi]]]
    return float(sel.sum())


def one_step_probability(chain: MarkovChain, s: int, goals: GoalSet) -> float:
    """Probability of entering the goal set in exactly one transition."""
    _check_goals(chain, goals)
    if not 0 <= s < chain.n:
        raise MarkovChainError(f"state {s} out of range")
    return _one_step(chain.transitions, s, _goal_mask(chain.n, goals))


def build_system(chain: MarkovChain, goals: GoalSet) -> LinearSystem:
    """Assemble the reduced linear system over the uncertain states.

    When no state is uncertain the system is empty (0 x 0 matrix, empty
    right-hand side) and needs no solver at all.
    """
    part = partition_states(chain, goals)
    p = chain.transitions
    k = len(part.uncertain)
    if k == 0:
        empty = np.zeros(0)
        return LinearSystem(_assemble(0, empty, empty, empty), np.zeros(0), part)
    remap = np.full(chain.n, -1, dtype=np.int64)
    remap[part.uncertain] = np.arange(k)
    rows = _row_of_entry(p)
    keep = (remap[rows] >= 0) & (remap[p.col] >= 0)
    a = _assemble(k, remap[rows[keep]], remap[p.col[keep]], p.nonzero[keep])
    goal_mask = _goal_mask(chain.n, goals)
    rhs = np.array([_one_step(p, int(s), goal_mask) for s in part.uncertain])
    return LinearSystem(identity_minus(a), rhs, part)


def reachability_probabilities(
    chain: MarkovChain,
    goals: GoalSet,
    method: str = "jacobi-seq",
    config: Optional[SolverConfig] = None,
) -> tuple[np.ndarray, SolveResult]:
    """Per-state probability of eventually reaching the goal set.

    Builds the reduced system and solves it with the selected method
    (one of ``jacobi-seq``, ``jacobi-par``, ``bicgstab-seq``,
    ``bicgstab-par``).  Certain states contribute exact 0/1 entries;
    solved entries are clamped into [0, 1], since an iterative
    approximation may overshoot by up to the tolerance.  Returns the
    full length-``n`` vector (the value at ``chain.initial`` is the
    answer for the chain) together with the solver report for the
    reduced system.  Solver failures propagate unchanged.
    """
    try:
        solve = SOLVERS[method]
    except KeyError:
        raise ValueError(
            f"unknown method {method!r}, expected one of {sorted(SOLVERS)}"
        ) from None
    system = build_system(chain, goals)
    part = system.partition
    x = np.zeros(chain.n)
    sure = sorted(part.prob_one)
    if sure:
        x[sure] = 1.0
    if len(part.uncertain) == 0:
        report = SolveResult(np.zeros(0), 0, True, 0.0, 0.0)
    else:
        report = solve(system.matrix, system.rhs, config)
        x[part.uncertain] = np.clip(report.x, 0.0, 1.0)
    return x, report
