"""Plain-text readers and writers for matrices, vectors and chain files.

All three formats are ASCII, whitespace-separated, with ``#`` starting a
comment that runs to the end of the line and blank lines ignored.
Values are written with 17 significant digits, so a written file parses
back into a bit-identical structure.

Matrix (triplet) format::

    matrix <n> <m>
    <row> <col> <value>     # m such lines

Vector format::

    vector <n>
    <value>                 # n such lines

Chain format::

    dtmc
    states <n>
    initial <s0>
    goal <g1> <g2> ... <gk>
    <src> <dst> <prob>      # one line per positive transition, any order
"""

from __future__ import annotations

from pathlib import Path
from typing import Union

import numpy as np

from .markov import GoalSet, MarkovChain, validate
from .sparse import CsrMatrix, csr_from_triplets, triplets

__all__ = [
    "ParseError",
    "read_matrix",
    "write_matrix",
    "read_vector",
    "write_vector",
    "read_dtmc",
    "write_dtmc",
]

PathLike = Union[str, Path]


class ParseError(ValueError):
    """Malformed input file; carries the 1-based offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _tokenized_lines(path: PathLike):
    """Yield (line_number, tokens) for every significant line."""
    with open(path, "r", encoding="ascii") as handle:
        for number, raw in enumerate(handle, start=1):
            text = raw.split("#", 1)[0].strip()
            if text:
                yield number, text.split()


def _parse_int(token: str, line: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"expected an integer {what}, got {token!r}", line) from None


def _parse_float(token: str, line: int, what: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"expected a number {what}, got {token!r}", line) from None


# ---------------------------------------------------------------------------
# Triplet matrix files


def read_matrix(path: PathLike) -> CsrMatrix:
    """Parse a triplet-format matrix file."""
    lines = _tokenized_lines(path)
    try:
        number, tokens = next(lines)
    except StopIteration:
        raise ParseError("empty matrix file") from None
    if len(tokens) != 3 or tokens[0] != "matrix":
        raise ParseError("expected header 'matrix <n> <m>'", number)
    n = _parse_int(tokens[1], number, "dimension")
    m = _parse_int(tokens[2], number, "entry count")
    entries = []
    for number, tokens in lines:
        if len(tokens) != 3:
            raise ParseError("expected '<row> <col> <value>'", number)
        entries.append(
            (
                _parse_int(tokens[0], number, "row index"),
                _parse_int(tokens[1], number, "column index"),
                _parse_float(tokens[2], number, "value"),
            )
        )
    if len(entries) != m:
        raise ParseError(f"header promised {m} entries, file has {len(entries)}")
    return csr_from_triplets(n, entries)


def write_matrix(a: CsrMatrix, path: PathLike) -> None:
    """Write ``a`` in triplet format (entries in row-major order)."""
    with open(path, "w", encoding="ascii") as handle:
        handle.write(f"matrix {a.n} {a.m}\n")
        for row, col, value in triplets(a):
            handle.write(f"{row} {col} {_fmt(value)}\n")


# ---------------------------------------------------------------------------
# Vector files


def read_vector(path: PathLike) -> np.ndarray:
    """Parse a vector file."""
    lines = _tokenized_lines(path)
    try:
        number, tokens = next(lines)
    except StopIteration:
        raise ParseError("empty vector file") from None
    if len(tokens) != 2 or tokens[0] != "vector":
        raise ParseError("expected header 'vector <n>'", number)
    n = _parse_int(tokens[1], number, "length")
    values = []
    for number, tokens in lines:
        if len(tokens) != 1:
            raise ParseError("expected one value per line", number)
        values.append(_parse_float(tokens[0], number, "value"))
    if len(values) != n:
        raise ParseError(f"header promised {n} values, file has {len(values)}")
    return np.array(values, dtype=np.float64)


def write_vector(v: np.ndarray, path: PathLike) -> None:
    """Write ``v`` in vector format."""
    with open(path, "w", encoding="ascii") as handle:
        handle.write(f"vector {len(v)}\n")
        for value in np.asarray(v, dtype=np.float64):
            handle.write(f"{_fmt(value)}\n")


# ---------------------------------------------------------------------------
# Chain files


def read_dtmc(path: PathLike) -> tuple[MarkovChain, GoalSet]:
    """Parse a chain file and validate the resulting chain.

    Enforces all chain invariants (probabilities in (0, 1], rows summing
    to one, start state in range), so a successfully parsed chain is
    ready to analyze.
    """
    n = None
    initial = None
    goals = None
    transitions = []
    seen: dict[tuple[int, int], int] = {}
    lines = _tokenized_lines(path)
    try:
        number, tokens = next(lines)
    except StopIteration:
        raise ParseError("empty chain file") from None
    if tokens != ["dtmc"]:
        raise ParseError("expected 'dtmc' as the first line", number)
    for number, tokens in lines:
        key = tokens[0]
        if key == "states":
            if n is not None:
                raise ParseError("duplicate 'states' line", number)
            if len(tokens) != 2:
                raise ParseError("expected 'states <n>'", number)
            n = _parse_int(tokens[1], number, "state count")
        elif key == "initial":
            if initial is not None:
                raise ParseError("duplicate 'initial' line", number)
            if len(tokens) != 2:
                raise ParseError("expected 'initial <s0>'", number)
            initial = _parse_int(tokens[1], number, "initial state")
        elif key == "goal":
            if goals is not None:
                raise ParseError("duplicate 'goal' line", number)
            if len(tokens) < 2:
                raise ParseError("expected 'goal <g1> ...' with at least one state", number)
            goals = [_parse_int(t, number, "goal state") for t in tokens[1:]]
        else:
            if len(tokens) != 3:
                raise ParseError("expected '<src> <dst> <prob>'", number)
            src = _parse_int(tokens[0], number, "source state")
            dst = _parse_int(tokens[1], number, "target state")
            prob = _parse_float(tokens[2], number, "probability")
            if (src, dst) in seen:
                raise ParseError(
                    f"duplicate transition {src} -> {dst} "
                    f"(first on line {seen[(src, dst)]})",
                    number,
                )
            seen[(src, dst)] = number
            transitions.append((src, dst, prob))
    if n is None:
        raise ParseError("missing 'states' line")
    if initial is None:
        raise ParseError("missing 'initial' line")
    if goals is None:
        raise ParseError("missing 'goal' line")
    for s in goals:
        if not 0 <= s < n:
            raise ParseError(f"goal state {s} outside 0..{n - 1}")
    for src, dst, _ in transitions:
        if not 0 <= src < n or not 0 <= dst < n:
            raise ParseError(
                f"transition {src} -> {dst} outside 0..{n - 1} "
                f"(line {seen[(src, dst)]})"
            )
    chain = MarkovChain(n=n, transitions=csr_from_triplets(n, transitions), initial=initial)
    validate(chain)
    return chain, GoalSet(goals)


def write_dtmc(chain: MarkovChain, goals: GoalSet, path: PathLike) -> None:
    """Write a chain and its goal set in chain-file format."""
    with open(path, "w", encoding="ascii") as handle:
        handle.write("dtmc\n")
        handle.write(f"states {chain.n}\n")
        handle.write(f"initial {chain.initial}\n")
        handle.write("goal " + " ".join(str(g) for g in sorted(goals.members)) + "\n")
        for src, dst, prob in triplets(chain.transitions):
            handle.write(f"{src} {dst} {_fmt(prob)}\n")
