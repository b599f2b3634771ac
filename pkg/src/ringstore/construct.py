"""Generator-matrix constructions and brute-force property checks.

Two families are built here:

* ED-matrices over GF(2), obtained from the Euclidean division chain of the
  matrix dimensions. They only guarantee that every window of ``rows``
  cyclically adjacent columns is independent (weak-column MDS), which is
  all a ring needs.
* Full MDS generators over GF(p), either the deterministic systematic
  Cauchy matrix or the seeded greedy column selection.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb, gcd

import numpy as np

from .algebra import FieldSpec, IncrementalBasis, Matrix, rank_of_columns, rref
from .errors import (
    BadArguments,
    FieldTooSmall,
    InstanceTooLarge,
    NonTermination,
    ShapeError,
)

GF2 = FieldSpec(2)

SUBSET_LIMIT = 10**6

LCG_MULTIPLIER = 6364136223846793005
LCG_INCREMENT = 1442695040888963407
_MASK64 = (1 << 64) - 1


class Lcg64:
    """64-bit linear congruential stream; outputs are the high 32 bits."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u32(self) -> int:
        self.state = (self.state * LCG_MULTIPLIER + LCG_INCREMENT) & _MASK64
        return self.state >> 32

    def residue(self, p: int) -> int:
        return self.next_u32() % p

    def vector(self, length: int, p: int) -> tuple[int, ...]:
        return tuple(self.residue(p) for _ in range(length))


@dataclass(frozen=True)
class EuclidChain:
    m: tuple[int, ...]
    p: tuple[int, ...]

    @property
    def gcd(self) -> int:
        return self.m[-1]


def euclid_chain(m0: int, m1: int) -> EuclidChain:
    if not 0 < m1 < m0:
        raise BadArguments(f"need 0 < m1 < m0, got m0={m0}, m1={m1}")
    ms = [m0, m1]
    ps = []
    while True:
        q, r = divmod(ms[-2], ms[-1])
        ps.append(q)
        if r == 0:
            break
        ms.append(r)
    chain = EuclidChain(tuple(ms), tuple(ps))
    assert chain.gcd == gcd(m0, m1)
    return chain


def _ed_array(chain: EuclidChain, level: int) -> np.ndarray:
    # M_{level+1} x M_level block; recursion bottoms out at the exact division
    rows, cols = chain.m[level + 1], chain.m[level]
    reps = chain.p[level]
    left = np.tile(np.eye(rows, dtype=np.int64), (1, reps))
    if level + 2 == len(chain.m):
        assert left.shape == (rows, cols)
        return left
    return np.hstack([left, _ed_array(chain, level + 1).T])


def build_ed_matrix(m1: int, m0: int) -> Matrix:
    """The ``m1 x m0`` ED-matrix over GF(2).

    ``ED(M0, M1) = [I_{M1} ... I_{M1} | ED(M1, M2)^T]`` with ``P1`` identity
    copies, ending at ``[I_{Mk} ... I_{Mk}]`` once the division is exact.
    """
    chain = euclid_chain(m0, m1)
    return Matrix._wrap(_ed_array(chain, 0), GF2)


def _window_ranks_ok(arr: np.ndarray, width: int, p: int) -> bool:
    n = arr.shape[1]
    for start in range(n):
        idx = [(start + i) % n for i in range(width)]
        if len(rref(arr[:, idx], p)[1]) != width:
            return False
    return True


def check_weak_column_mds(a: Matrix) -> bool:
    """Every ``a.rows`` cyclically adjacent columns are independent."""
    if a.rows > a.cols:
        raise ShapeError(f"weak-column MDS needs rows <= cols, got {a.shape}")
    return _window_ranks_ok(a.array, a.rows, a.field.p)


def check_weak_row_mds(a: Matrix) -> bool:
    """Every ``a.cols`` cyclically adjacent rows are independent."""
    if a.rows <= a.cols:
        raise ShapeError(f"weak-row MDS needs rows > cols, got {a.shape}")
    return _window_ranks_ok(a.array.T, a.cols, a.field.p)


def check_full_mds(a: Matrix) -> bool:
    """Every ``a.rows``-subset of columns is independent (exhaustive)."""
    if a.rows > a.cols:
        raise ShapeError(f"full MDS needs rows <= cols, got {a.shape}")
    if comb(a.cols, a.rows) > SUBSET_LIMIT:
        raise InstanceTooLarge(
            f"C({a.cols}, {a.rows}) = {comb(a.cols, a.rows)} subsets exceeds {SUBSET_LIMIT}"
        )
    return all(
        rank_of_columns(a, cols) == a.rows for cols in combinations(range(a.cols), a.rows)
    )


def build_cauchy_mds(m: int, n_cols: int, field: FieldSpec) -> Matrix:
    """Systematic ``[I_m | C]`` with ``C[i][j] = 1 / (i - (m + j))``."""
    if not 0 < m <= n_cols:
        raise BadArguments(f"need 0 < m <= n_cols, got m={m}, n_cols={n_cols}")
    if field.p < n_cols:
        raise FieldTooSmall(f"Cauchy construction with {n_cols} columns needs p >= {n_cols}")
    p = field.p
    cauchy = [[field.inv(i - (m + j)) for j in range(n_cols - m)] for i in range(m)]
    arr = np.eye(m, dtype=np.int64).astype(field.dtype)
    if n_cols > m:
        arr = np.hstack([arr, np.array(cauchy, dtype=object).astype(field.dtype) % p])
    return Matrix._wrap(arr, field)


def greedy_mds_columns(m: int, n_cols: int, field: FieldSpec, seed: int) -> Matrix:
    """Greedy MDS generator: ``I_m`` followed by seeded random columns.

    A candidate column is kept only if it avoids the span of every
    ``(m-1)``-subset of the columns chosen so far. Termination is
    guaranteed when ``p > C(n_cols - 1, m - 1)``.
    """
    if not 0 < m <= n_cols:
        raise BadArguments(f"need 0 < m <= n_cols, got m={m}, n_cols={n_cols}")
    bound = comb(n_cols - 1, m - 1)
    if field.p <= bound:
        raise FieldTooSmall(f"greedy construction needs p > C({n_cols - 1}, {m - 1}) = {bound}")
    if comb(n_cols, m) > SUBSET_LIMIT:
        raise InstanceTooLarge(f"C({n_cols}, {m}) subsets exceeds {SUBSET_LIMIT}")

    rng = Lcg64(seed)
    p = field.p
    cols: list[tuple[int, ...]] = [tuple(int(i == j) for i in range(m)) for j in range(m)]
    budget = 10 * p * n_cols
    draws = 0
    while len(cols) < n_cols:
        if draws >= budget:
            raise NonTermination(f"no admissible column after {draws} draws")
        draws += 1
        cand = rng.vector(m, p)
        if _avoids_all_hyperplanes(cand, cols, m, field):
            cols.append(cand)
    return Matrix.from_columns(cols, field)


def _avoids_all_hyperplanes(
    cand: tuple[int, ...], cols: list[tuple[int, ...]], m: int, field: FieldSpec
) -> bool:
    for subset in combinations(range(len(cols)), m - 1):
        basis = IncrementalBasis(m, field)
        for j in subset:
            basis.add(cols[j])
        if basis.contains(cand):
            return False
    return True
