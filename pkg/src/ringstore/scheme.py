"""Storage schemes on a unidirectional ring.

Node ``i`` (1-based) owns the contiguous column block
``[(i-1)*alpha, i*alpha)`` of the generator matrix and stores the matching
coordinates of ``X @ G``. Data flows from node ``i+1`` to node ``i``; node 1
sends to node ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence

from .algebra import FieldSpec, Matrix, mat_rank, rank_of_columns, vec_mat
from .errors import (
    BadNodeIndex,
    DimensionMismatch,
    NotFullRank,
    PartitionMismatch,
    TooFewNodes,
)

# link endpoint standing for the user attached to a node
USER = 0


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True, eq=True)
class Scheme:
    n: int
    alpha: int
    m: int
    field: FieldSpec
    g: Matrix = dc_field(repr=False)

    @property
    def k(self) -> int:
        """Minimum number of nodes that must transmit to reconstruct."""
        return ceil_div(self.m, self.alpha)

    @property
    def gamma(self) -> int:
        """Symbols the k-th node contributes; 0 < gamma <= alpha."""
        return self.m - (self.k - 1) * self.alpha

    def wrap(self, i: int) -> int:
        """Map any integer onto the ring's 1-based node indices."""
        return (i - 1) % self.n + 1

    def node_columns(self, i: int) -> range:
        if not 1 <= i <= self.n:
            raise BadNodeIndex(f"node {i} outside 1..{self.n}")
        return range((i - 1) * self.alpha, i * self.alpha)

    def node_matrix(self, i: int) -> Matrix:
        return self.g.columns(self.node_columns(i))

    def window_columns(self, start: int, count: int) -> list[int]:
        """Columns of ``count`` adjacent nodes starting at ``start`` (cyclic)."""
        cols: list[int] = []
        for j in range(count):
            cols.extend(self.node_columns(self.wrap(start + j)))
        return cols


def make_scheme(g: Matrix, n: int, alpha: int) -> Scheme:
    if n <= 0 or alpha <= 0:
        raise PartitionMismatch(f"n and alpha must be positive, got n={n}, alpha={alpha}")
    if g.cols != n * alpha:
        raise PartitionMismatch(f"{g.cols} columns cannot be split into {n} nodes of {alpha}")
    if n < ceil_div(g.rows, alpha):
        raise TooFewNodes(f"{n} nodes of capacity {alpha} cannot hold {g.rows} symbols")
    r = mat_rank(g)
    if r != g.rows:
        raise NotFullRank(f"generator matrix has rank {r} < {g.rows}")
    return Scheme(n=n, alpha=alpha, m=g.rows, field=g.field, g=g)


@dataclass(frozen=True)
class StoredState:
    """``symbols[i][j]`` is the j-th symbol of node ``i+1``.

    A node whose contents were lost is recorded as ``None``.
    """

    symbols: tuple[tuple[int, ...] | None, ...]

    def node(self, i: int) -> tuple[int, ...]:
        row = self.symbols[i - 1]
        if row is None:
            raise LookupError(f"node {i} holds no data")
        return row

    def erase(self, i: int) -> "StoredState":
        rows = list(self.symbols)
        rows[i - 1] = None
        return StoredState(tuple(rows))

    def install(self, i: int, row: Sequence[int]) -> "StoredState":
        rows = list(self.symbols)
        rows[i - 1] = tuple(row)
        return StoredState(tuple(rows))


def encode(s: Scheme, x: Sequence[int]) -> StoredState:
    if len(x) != s.m:
        raise DimensionMismatch(f"data of length {len(x)} for M={s.m}")
    coded = vec_mat(x, s.g)
    a = s.alpha
    return StoredState(tuple(coded[i * a:(i + 1) * a] for i in range(s.n)))


@dataclass(frozen=True)
class ValidationReport:
    is_ordss: bool
    failed_window_condition_i: tuple[int, ...]
    failed_window_condition_ii: tuple[int, ...]


def validate_ordss(s: Scheme) -> ValidationReport:
    """Check both window conditions for every starting node.

    (i)  the ``(k-1)*alpha`` columns of any ``k-1`` adjacent nodes are
         independent;
    (ii) any ``k`` adjacent nodes span the whole data space.
    """
    k = s.k
    bad_i: list[int] = []
    bad_ii: list[int] = []
    for start in range(1, s.n + 1):
        if k > 1 and rank_of_columns(s.g, s.window_columns(start, k - 1)) != (k - 1) * s.alpha:
            bad_i.append(start)
        if rank_of_columns(s.g, s.window_columns(start, k)) != s.m:
            bad_ii.append(start)
    return ValidationReport(not bad_i and not bad_ii, tuple(bad_i), tuple(bad_ii))


def reconstruct_lower_bound(n: int, alpha: int, m: int) -> int:
    k = ceil_div(m, alpha)
    if n < k:
        raise TooFewNodes(f"{n} nodes of capacity {alpha} cannot hold {m} symbols")
    twice = (k - 1) * k * alpha
    assert twice % 2 == 0
    return k * m - twice // 2


def repair_lower_bound(s: Scheme) -> int:
    return s.m


@dataclass(frozen=True)
class CutConstraint:
    """Minimum load of one ring link, user attached at node 1.

    ``link = (i, i-1)`` with ``USER`` (0) standing for the user.
    """

    link: tuple[int, int]
    min_symbols: int


def cut_constraints(n: int, alpha: int, m: int) -> list[CutConstraint]:
    k = ceil_div(m, alpha)
    if n < k:
        raise TooFewNodes(f"{n} nodes of capacity {alpha} cannot hold {m} symbols")
    return [CutConstraint((i, i - 1), m - (i - 1) * alpha) for i in range(1, k + 1)]


def rotate(s: Scheme, offset: int) -> Scheme:
    """Same scheme with node ``i`` renamed ``i - offset`` (cyclically)."""
    shift = (offset % s.n) * s.alpha
    order = [(j + shift) % s.g.cols for j in range(s.g.cols)]
    return Scheme(s.n, s.alpha, s.m, s.field, s.g.columns(order))
