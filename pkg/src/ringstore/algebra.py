"""Exact arithmetic over prime fields GF(p) and dense matrices over them.

Matrices wrap a read-only numpy integer array. For p < 2**31 the array is
int64 (products of two residues fit without overflow); larger primes fall
back to object arrays of Python ints, which are slower but still exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    FieldMismatch,
    NotPrime,
    Singular,
    WidthTooLarge,
    ZeroInverse,
)

_INT64_SAFE = 1 << 31


_TRIAL_LIMIT = 1 << 32
# Miller-Rabin with these bases is exact below 3.3e24
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    if p >= _TRIAL_LIMIT:
        return _miller_rabin(p)
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


def _miller_rabin(p: int) -> bool:
    d, s = p - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        if p % a == 0:
            return p == a
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(s - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    p = max(2, n)
    while not is_prime(p):
        p += 1
    return p


@dataclass(frozen=True)
class FieldSpec:
    p: int

    def __post_init__(self) -> None:
        if not isinstance(self.p, (int, np.integer)) or not is_prime(int(self.p)):
            raise NotPrime(f"field modulus must be prime, got {self.p!r}")
        object.__setattr__(self, "p", int(self.p))

    @property
    def dtype(self):
        return np.int64 if self.p < _INT64_SAFE else object

    def __call__(self, value: int) -> "FieldElement":
        return FieldElement(value % self.p, self)

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroInverse(f"0 has no inverse in GF({self.p})")
        return pow(a, -1, self.p)

    def __str__(self) -> str:
        return f"GF({self.p})"


@dataclass(frozen=True)
class FieldElement:
    value: int
    field: FieldSpec

    def __post_init__(self) -> None:
        if not 0 <= self.value < self.field.p:
            raise ValueError(f"{self.value} is not a residue mod {self.field.p}")

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldMismatch(f"{self.field} vs {other.field}")
            return other.value
        return int(other)

    def __add__(self, other):
        return self.field(self.value + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self.field(self.value - self._coerce(other))

    def __rsub__(self, other):
        return self.field(self._coerce(other) - self.value)

    def __mul__(self, other):
        return self.field(self.value * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self.field(-self.value)

    def __truediv__(self, other):
        return self * fe_inv(self.field(self._coerce(other)))

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.field.p})"


def fe_inv(a: FieldElement) -> FieldElement:
    if a.value == 0:
        raise ZeroInverse(f"0 has no inverse in {a.field}")
    return FieldElement(pow(a.value, -1, a.field.p), a.field)


class Matrix:
    """Immutable dense matrix over a prime field."""

    __slots__ = ("_a", "field")

    def __init__(self, entries, field: FieldSpec):
        a = np.array(entries, dtype=object)
        if a.ndim != 2 or a.shape[0] == 0 or a.shape[1] == 0:
            raise DimensionMismatch(f"expected a non-empty 2-D array, got shape {a.shape}")
        a = np.vectorize(lambda v: int(v) % field.p, otypes=[object])(a)
        self._a = _freeze(a.astype(field.dtype))
        self.field = field

    @classmethod
    def _wrap(cls, arr: np.ndarray, field: FieldSpec) -> "Matrix":
        # trusted path: arr already reduced mod p with the right dtype
        m = cls.__new__(cls)
        m._a = _freeze(arr)
        m.field = field
        return m

    @classmethod
    def identity(cls, n: int, field: FieldSpec) -> "Matrix":
        return cls._wrap(np.eye(n, dtype=np.int64).astype(field.dtype), field)

    @classmethod
    def zeros(cls, rows: int, cols: int, field: FieldSpec) -> "Matrix":
        return cls._wrap(np.zeros((rows, cols), dtype=np.int64).astype(field.dtype), field)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], field: FieldSpec) -> "Matrix":
        return cls(columns, field).T

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    @property
    def array(self) -> np.ndarray:
        """Read-only view of the entries."""
        return self._a

    @property
    def T(self) -> "Matrix":
        return Matrix._wrap(self._a.T.copy(), self.field)

    def __getitem__(self, key: tuple[int, int]) -> int:
        return int(self._a[key])

    def element(self, i: int, j: int) -> FieldElement:
        return FieldElement(int(self._a[i, j]), self.field)

    def row(self, i: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self._a[i])

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self._a[:, j])

    def columns(self, indices: Iterable[int]) -> "Matrix":
        idx = list(indices)
        if not idx:
            raise DimensionMismatch("empty column selection")
        return Matrix._wrap(self._a[:, idx].copy(), self.field)

    def to_lists(self) -> list[list[int]]:
        return [[int(v) for v in r] for r in self._a]

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return mat_mul(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.field == other.field and self.shape == other.shape and bool(
            np.array_equal(self._a, other._a)
        )

    def __hash__(self) -> int:
        return hash((self.field.p, self.shape, tuple(int(v) for v in self._a.flat)))

    def __repr__(self) -> str:
        return f"Matrix({self.to_lists()}, {self.field})"


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def _check_same_field(a: Matrix, b: Matrix) -> None:
    if a.field != b.field:
        raise FieldMismatch(f"{a.field} vs {b.field}")


def transpose(a: Matrix) -> Matrix:
    return a.T


def hstack(blocks: Sequence[Matrix]) -> Matrix:
    for b in blocks[1:]:
        _check_same_field(blocks[0], b)
    if len({b.rows for b in blocks}) != 1:
        raise DimensionMismatch("blocks have different row counts")
    return Matrix._wrap(np.hstack([b.array for b in blocks]), blocks[0].field)


def vstack(blocks: Sequence[Matrix]) -> Matrix:
    return hstack([b.T for b in blocks]).T


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    _check_same_field(a, b)
    if a.cols != b.rows:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return Matrix._wrap((a.array @ b.array) % a.field.p, a.field)


def vec_mat(x: Sequence[int], a: Matrix) -> tuple[int, ...]:
    """Row vector times matrix, as a tuple of residues."""
    if len(x) != a.rows:
        raise DimensionMismatch(f"vector of length {len(x)} against {a.rows} rows")
    v = np.array([int(t) % a.field.p for t in x], dtype=a.field.dtype)
    return tuple(int(t) for t in (v @ a.array) % a.field.p)


def rref(arr: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(p) and the pivot columns.

    Pivots are taken as the first nonzero entry scanning down each column,
    columns in left-to-right order.
    """
    a = np.array(arr, copy=True)
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        a[r] = (a[r] * pow(int(a[r, c]), -1, p)) % p
        factors = a[:, c].copy()
        factors[r] = 0
        a = (a - np.outer(factors, a[r])) % p
        pivots.append(c)
        r += 1
    return a, pivots


def mat_rank(a: Matrix) -> int:
    return len(rref(a.array, a.field.p)[1])


def rank_of_columns(a: Matrix, indices: Sequence[int]) -> int:
    return len(rref(a.array[:, list(indices)], a.field.p)[1])


def mat_inverse(a: Matrix) -> Matrix:
    if a.rows != a.cols:
        raise DimensionMismatch(f"inverse of non-square {a.shape} matrix")
    n = a.rows
    eye = np.eye(n, dtype=np.int64).astype(a.field.dtype)
    red, pivots = rref(np.hstack([a.array, eye]), a.field.p)
    if pivots[:n] != list(range(n)):
        raise Singular(f"{n}x{n} matrix over {a.field} is singular")
    return Matrix._wrap(red[:, n:].copy(), a.field)


def row_vec_solve(g_sub: Matrix, y: Sequence[int]) -> tuple[int, ...]:
    """Solve ``x @ g_sub == y`` for the row vector ``x``."""
    if g_sub.rows != g_sub.cols:
        raise DimensionMismatch(f"expected a square system, got {g_sub.shape}")
    if len(y) != g_sub.cols:
        raise DimensionMismatch(f"right-hand side of length {len(y)} for {g_sub.shape} system")
    return vec_mat(y, mat_inverse(g_sub))


def columns_cyclic_window(a: Matrix, start: int, width: int) -> Matrix:
    if width > a.cols:
        raise WidthTooLarge(f"window of width {width} on {a.cols} columns")
    if not 0 <= start < a.cols:
        raise WidthTooLarge(f"start {start} outside [0, {a.cols})")
    if width <= 0:
        raise WidthTooLarge(f"window width must be positive, got {width}")
    return a.columns((start + i) % a.cols for i in range(width))


class IncrementalBasis:
    """Span of a growing set of vectors in GF(p)^dim, kept in reduced form.

    ``add`` reduces a candidate against the current basis and keeps it only
    when it is independent, which makes greedy rank extension O(dim * rank)
    per candidate instead of a full elimination.
    """

    def __init__(self, dim: int, field: FieldSpec):
        self.dim = dim
        self.field = field
        self._rows: list[np.ndarray] = []
        self._pivots: list[int] = []

    @property
    def rank(self) -> int:
        return len(self._rows)

    def _reduce(self, vec: Sequence[int]) -> np.ndarray:
        p = self.field.p
        v = np.array([int(t) % p for t in vec], dtype=self.field.dtype)
        if v.shape != (self.dim,):
            raise DimensionMismatch(f"vector of length {v.size}, expected {self.dim}")
        for piv, row in zip(self._pivots, self._rows):
            c = v[piv]
            if c:
                v = (v - c * row) % p
        return v

    def contains(self, vec: Sequence[int]) -> bool:
        return not self._reduce(vec).any()

    def add(self, vec: Sequence[int]) -> bool:
        v = self._reduce(vec)
        nz = np.flatnonzero(v)
        if nz.size == 0:
            return False
        piv = int(nz[0])
        p = self.field.p
        v = (v * pow(int(v[piv]), -1, p)) % p
        # keep earlier rows reduced in the new pivot column
        for i, row in enumerate(self._rows):
            c = row[piv]
            if c:
                self._rows[i] = (row - c * v) % p
        self._rows.append(v)
        self._pivots.append(piv)
        return True
