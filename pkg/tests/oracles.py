"""Independent reference implementations the tests check against.

Everything here is deliberately naive: dense storage, scalar loops,
boolean closure.  None of it shares code with the library kernels.
"""

from __future__ import annotations

import numpy as np

from mcreach import CsrMatrix, GoalSet, MarkovChain, csr_from_triplets


def dense_from_csr(a: CsrMatrix) -> list[list[float]]:
    """Materialize a dense row-major copy as plain Python floats."""
    out = [[0.0] * a.n for _ in range(a.n)]
    for i in range(a.n):
        for k in range(int(a.rstart[i]), int(a.rstart[i + 1])):
            out[i][int(a.col[k])] = float(a.nonzero[k])
    return out


def matvec_rowwise(dense: list[list[float]], x) -> np.ndarray:
    """Triple-loop product, accumulating each row strictly left to right."""
    xs = [float(v) for v in x]
    out = []
    for row in dense:
        acc = 0.0
        for j, value in enumerate(row):
            acc += value * xs[j]
        out.append(acc)
    return np.array(out)


def solve_dense(a: CsrMatrix, b) -> np.ndarray:
    """Dense Gaussian elimination with partial pivoting (LAPACK)."""
    return np.linalg.solve(np.array(dense_from_csr(a)), np.asarray(b, dtype=float))


def _floyd_warshall_closure(adjacency: list[list[bool]]) -> list[list[bool]]:
    n = len(adjacency)
    reach = [[adjacency[i][j] or i == j for j in range(n)] for i in range(n)]
    for k in range(n):
        for i in range(n):
            if reach[i][k]:
                row_i, row_k = reach[i], reach[k]
                for j in range(n):
                    if row_k[j]:
                        row_i[j] = True
    return reach


def closure_partition(chain: MarkovChain, goals: GoalSet):
    """Partition oracle via boolean transitive closure (Floyd-Warshall).

    The probability-one closure runs on the graph with goal states made
    absorbing: a run entering a goal has already succeeded, so onward
    edges out of goals must not count when looking for escapes into the
    zero set.  Returns (prob_one, prob_zero, uncertain).
    """
    n = chain.n
    dense = dense_from_csr(chain.transitions)
    adjacency = [[dense[i][j] > 0.0 for j in range(n)] for i in range(n)]
    reach = _floyd_warshall_closure(adjacency)
    reaches_goal = {s for s in range(n) if any(reach[s][g] for g in goals.members)}
    prob_zero = set(range(n)) - reaches_goal
    cut = [
        [adjacency[i][j] and i not in goals.members for j in range(n)]
        for i in range(n)
    ]
    reach_cut = _floyd_warshall_closure(cut)
    reaches_zero = {s for s in range(n) if any(reach_cut[s][z] for z in prob_zero)}
    prob_one = set(range(n)) - reaches_zero - prob_zero
    uncertain = sorted(set(range(n)) - prob_zero - prob_one)
    return prob_one, prob_zero, uncertain


def reachability_dense(chain: MarkovChain, goals: GoalSet) -> np.ndarray:
    """Full reachability vector via the closure oracle plus a dense solve."""
    prob_one, prob_zero, uncertain = closure_partition(chain, goals)
    n = chain.n
    dense = dense_from_csr(chain.transitions)
    x = np.zeros(n)
    for s in prob_one:
        x[s] = 1.0
    if uncertain:
        k = len(uncertain)
        pos = {s: i for i, s in enumerate(uncertain)}
        m = np.eye(k)
        rhs = np.zeros(k)
        for s in uncertain:
            for t in range(n):
                p = dense[s][t]
                if p > 0.0 and t in pos:
                    m[pos[s], pos[t]] -= p
                if p > 0.0 and t in goals.members:
                    rhs[pos[s]] += p
        x[uncertain] = np.linalg.solve(m, rhs)
    return x


def random_chain(rng: np.random.Generator, n: int) -> MarkovChain:
    """Random valid chain: 1-3 targets per row, integer-ratio probabilities."""
    entries = []
    for s in range(n):
        k = int(rng.integers(1, min(3, n) + 1))
        targets = rng.choice(n, size=k, replace=False)
        weights = rng.integers(1, 10, size=k, endpoint=True).astype(float)
        total = float(weights.sum())
        for t, w in zip(targets, weights):
            entries.append((s, int(t), w / total))
    return MarkovChain(
        n=n,
        transitions=csr_from_triplets(n, entries),
        initial=int(rng.integers(0, n)),
    )


def random_goals(rng: np.random.Generator, n: int) -> GoalSet:
    k = int(rng.integers(1, n + 1))
    return GoalSet(int(g) for g in rng.choice(n, size=k, replace=False))
