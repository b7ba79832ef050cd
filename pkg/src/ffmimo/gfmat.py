"""Exact arithmetic and linear algebra over the prime field Z_p.

Scalars are :class:`FieldElem`, matrices are :class:`GfMatrix` (an immutable
wrapper around an ``int64`` array whose entries lie in ``[0, p)``).  All
elimination is done in integers modulo ``p``; nothing here touches floating
point except the entropy weights handed to :func:`greedy_row_select`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Literal, Sequence

import numpy as np

from .errors import InfeasibleSelectionError, RankDeficientError


@lru_cache(maxsize=None)
def check_prime(p: int) -> int:
    """Return ``p`` if it is prime, raise ``ValueError`` otherwise (trial division)."""
    p = int(p)
    if p < 2:
        raise ValueError(f"field size must be a prime >= 2, got {p}")
    d = 2
    while d * d <= p:
        if p % d == 0:
            raise ValueError(f"field size must be prime, got {p} = {d} * {p // d}")
        d += 1
    return p


def inv_mod(a: int, p: int) -> int:
    a = int(a) % p
    if a == 0:
        raise ZeroDivisionError(f"0 has no inverse in Z_{p}")
    return pow(a, -1, p)


@dataclass(frozen=True)
class FieldElem:
    """An element of Z_p."""

    value: int
    p: int

    def __post_init__(self):
        check_prime(self.p)
        object.__setattr__(self, "value", int(self.value) % self.p)

    def _check(self, other: FieldElem | int) -> int:
        if isinstance(other, FieldElem):
            if other.p != self.p:
                raise ValueError(f"modulus mismatch: Z_{self.p} vs Z_{other.p}")
            return other.value
        return int(other)

    def __add__(self, other):
        return FieldElem(self.value + self._check(other), self.p)

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElem(self.value - self._check(other), self.p)

    def __rsub__(self, other):
        return FieldElem(self._check(other) - self.value, self.p)

    def __mul__(self, other):
        return FieldElem(self.value * self._check(other), self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElem(-self.value, self.p)

    def __truediv__(self, other):
        return self * FieldElem(self._check(other), self.p).inv()

    def inv(self) -> FieldElem:
        return FieldElem(inv_mod(self.value, self.p), self.p)

    def __int__(self):
        return self.value

    def __index__(self):
        return self.value


def field_op(a: FieldElem, b: FieldElem | None, kind: Literal["add", "sub", "mul", "inv"]) -> FieldElem:
    """Apply ``kind`` to ``a`` (and ``b``); ``inv`` ignores ``b``."""
    if kind == "inv":
        return a.inv()
    if b is None:
        raise ValueError(f"operation {kind!r} needs two operands")
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    raise ValueError(f"unknown field operation {kind!r}")


class GfMatrix:
    """Immutable matrix over Z_p.

    Parameters
    ----------
    entries : array_like
        2-D integer array (a 1-D input is treated as a column).  Entries are
        reduced modulo ``p``.
    p : int
        Prime modulus.
    """

    __slots__ = ("_a", "p")

    def __init__(self, entries, p: int):
        self.p = check_prime(p)
        a = np.asarray(entries)
        if a.ndim == 1:
            a = a.reshape(-1, 1)
        if a.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {a.shape}")
        if a.size and not np.issubdtype(a.dtype, np.integer):
            if not np.all(np.equal(np.mod(a, 1), 0)):
                raise ValueError("GF(p) matrix entries must be integers")
        a = np.mod(a.astype(np.int64), self.p)
        a.setflags(write=False)
        self._a = a

    @classmethod
    def identity(cls, n: int, p: int) -> GfMatrix:
        return cls(np.eye(n, dtype=np.int64), p)

    @classmethod
    def zeros(cls, rows: int, cols: int, p: int) -> GfMatrix:
        return cls(np.zeros((rows, cols), dtype=np.int64), p)

    @property
    def array(self) -> np.ndarray:
        """Read-only view of the entries."""
        return self._a

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    def __getitem__(self, idx):
        return self._a[idx]

    def take_rows(self, idx: Iterable[int]) -> GfMatrix:
        return GfMatrix(self._a[list(idx), :], self.p)

    @property
    def T(self) -> GfMatrix:
        return GfMatrix(self._a.T, self.p)

    def __matmul__(self, other):
        if isinstance(other, GfMatrix):
            if other.p != self.p:
                raise ValueError(f"modulus mismatch: Z_{self.p} vs Z_{other.p}")
            return GfMatrix(self._a @ other._a, self.p)
        v = np.asarray(other, dtype=np.int64)
        return np.mod(self._a @ v, self.p)

    def __eq__(self, other):
        if not isinstance(other, GfMatrix):
            return NotImplemented
        return self.p == other.p and np.array_equal(self._a, other._a)

    def __hash__(self):
        return hash((self.p, self.shape, self._a.tobytes()))

    def __repr__(self):
        return f"GfMatrix({self._a.tolist()}, p={self.p})"

    def rank(self) -> int:
        return mat_rank(self)

    def inverse(self) -> GfMatrix:
        return mat_inverse(self)


def _row_reduce(a: np.ndarray, p: int, *, full: bool = False) -> tuple[np.ndarray, list[int]]:
    """Row echelon form of ``a`` over Z_p; returns (reduced copy, pivot columns).

    With ``full=True`` the result is reduced row echelon form (pivots = 1 and
    cleared above as well as below).
    """
    a = np.array(a, dtype=np.int64) % p
    nrows, ncols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            a[[r, k]] = a[[k, r]]
        a[r] = (a[r] * inv_mod(a[r, c], p)) % p
        targets = range(nrows) if full else range(r + 1, nrows)
        for i in targets:
            if i != r and a[i, c]:
                a[i] = (a[i] - a[i, c] * a[r]) % p
        pivots.append(c)
        r += 1
    return a, pivots


def mat_rank(M: GfMatrix) -> int:
    """Rank of ``M`` over Z_p."""
    if M.rows == 0 or M.cols == 0:
        return 0
    return len(_row_reduce(M.array, M.p)[1])


def mat_inverse(M: GfMatrix) -> GfMatrix:
    """Inverse of a square full-rank matrix over Z_p.

    Raises
    ------
    RankDeficientError
        If ``M`` is singular (the exception carries the computed rank).
    """
    n, m = M.shape
    if n != m:
        raise ValueError(f"inverse needs a square matrix, got {n}x{m}")
    aug = np.concatenate([M.array, np.eye(n, dtype=np.int64)], axis=1)
    red, pivots = _row_reduce(aug, M.p, full=True)
    rank = sum(1 for c in pivots if c < n)
    if rank < n:
        raise RankDeficientError(rank, n, f"singular {n}x{n} matrix over Z_{M.p} (rank {rank})")
    return GfMatrix(red[:, n:], M.p)


def solve(M: GfMatrix, b) -> np.ndarray:
    """Solve ``M x = b`` for square invertible ``M``."""
    return mat_inverse(M) @ b


def greedy_row_select(Q: GfMatrix, entropies: Sequence[float], n_select: int | None = None) -> tuple[int, ...]:
    """Minimum-weight basis of the row matroid of ``Q``.

    Rows are scanned in ascending order of ``entropies`` (ties: lower index
    first) and a row is kept iff it is linearly independent of the rows kept so
    far.  Because linear independence defines a matroid, the result minimises
    the total entropy over all independent ``n_select``-subsets.

    Parameters
    ----------
    Q : GfMatrix
        ``N_r x N_t`` system matrix.
    entropies : sequence of float
        One weight per row.
    n_select : int, optional
        Subset size, defaults to ``Q.cols``.

    Returns
    -------
    tuple of int
        Selected 0-based row indices, sorted ascending.
    """
    n = Q.cols if n_select is None else int(n_select)
    w = np.asarray(entropies, dtype=float)
    if w.shape != (Q.rows,):
        raise ValueError(f"need {Q.rows} entropies, got shape {w.shape}")
    rank = mat_rank(Q)
    if rank < n:
        raise InfeasibleSelectionError(rank, n, f"rank {rank} < {n}: no independent {n}-subset of rows")
    p = Q.p
    basis: list[tuple[int, np.ndarray]] = []
    chosen: list[int] = []
    for i in np.argsort(w, kind="stable"):
        v = Q.array[i].copy()
        for pc, b in basis:
            if v[pc]:
                v = (v - v[pc] * b) % p
        nz = np.nonzero(v)[0]
        if nz.size == 0:
            continue
        pc = int(nz[0])
        basis.append((pc, (v * inv_mod(v[pc], p)) % p))
        chosen.append(int(i))
        if len(chosen) == n:
            break
    return tuple(sorted(chosen))
