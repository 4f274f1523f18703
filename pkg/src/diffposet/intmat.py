"""Exact dense integer matrix algebra.

Smith and Hermite normal forms with unimodular transformation certificates,
saturated kernels, integer preimages, determinants, and characteristic
polynomials.  Everything is arbitrary precision; matrix products take a
guarded numpy int64 fast path only when an a-priori bound proves the result
cannot overflow.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .intpoly import IntPoly

_INT64_SAFE = 2**62


@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    data: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if len(self.data) != self.rows:
            raise ValueError("row count mismatch")
        if any(len(r) != self.cols for r in self.data):
            raise ValueError("ragged rows")

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]]) -> "IntMatrix":
        data = tuple(tuple(int(v) for v in r) for r in rows)
        ncols = len(data[0]) if data else 0
        return cls(len(data), ncols, data)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, tuple((0,) * cols for _ in range(rows)))

    @classmethod
    def diagonal(cls, entries: Sequence[int], rows: int | None = None, cols: int | None = None) -> "IntMatrix":
        k = len(entries)
        rows = k if rows is None else rows
        cols = k if cols is None else cols
        data = [[0] * cols for _ in range(rows)]
        for i, e in enumerate(entries):
            data[i][i] = int(e)
        return cls.from_rows(data)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]]) -> "IntMatrix":
        if not columns:
            return cls.zeros(0, 0)
        n = len(columns[0])
        return cls.from_rows([[int(c[i]) for c in columns] for i in range(n)])

    # -- basic structure ---------------------------------------------------

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def at(self, i: int, j: int) -> int:
        return self.data[i][j]

    def row(self, i: int) -> tuple[int, ...]:
        return self.data[i]

    def col(self, j: int) -> tuple[int, ...]:
        return tuple(r[j] for r in self.data)

    def columns(self) -> list[tuple[int, ...]]:
        return [self.col(j) for j in range(self.cols)]

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows, tuple(zip(*self.data)) if self.data else ())

    def max_abs(self) -> int:
        return max((abs(v) for r in self.data for v in r), default=0)

    def to_lists(self) -> list[list[int]]:
        return [list(r) for r in self.data]

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        self._shape_check(other)
        return IntMatrix(self.rows, self.cols, tuple(
            tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(self.data, other.data)))

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        self._shape_check(other)
        return IntMatrix(self.rows, self.cols, tuple(
            tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(self.data, other.data)))

    def __neg__(self) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, tuple(tuple(-v for v in r) for r in self.data))

    def __mul__(self, c: int) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, tuple(tuple(v * c for v in r) for r in self.data))

    __rmul__ = __mul__

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        inner = self.cols
        if inner == 0 or self.rows == 0 or other.cols == 0:
            return IntMatrix.zeros(self.rows, other.cols)
        # int64 is exact whenever every partial dot product provably fits
        if inner * self.max_abs() * other.max_abs() < _INT64_SAFE:
            prod = np.array(self.data, dtype=np.int64) @ np.array(other.data, dtype=np.int64)
            return IntMatrix(self.rows, other.cols, tuple(tuple(int(v) for v in r) for r in prod))
        bt = other.transpose().data
        return IntMatrix(self.rows, other.cols, tuple(
            tuple(sum(a * b for a, b in zip(ra, cb)) for cb in bt) for ra in self.data))

    def mat_vec(self, v: Sequence[int]) -> tuple[int, ...]:
        if len(v) != self.cols:
            raise ValueError("vector length mismatch")
        return tuple(sum(a * b for a, b in zip(r, v)) for r in self.data)

    def _shape_check(self, other: "IntMatrix") -> None:
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")

    def __str__(self) -> str:
        return "\n".join(" ".join(str(v) for v in r) for r in self.data)


# -- elementary-operation helpers on mutable list-of-list matrices ----------


def _swap_rows(m: list[list[int]], t: list[list[int]] | None, i: int, j: int) -> None:
    m[i], m[j] = m[j], m[i]
    if t is not None:
        t[i], t[j] = t[j], t[i]


def _swap_cols(m: list[list[int]], t: list[list[int]] | None, i: int, j: int) -> None:
    for r in m:
        r[i], r[j] = r[j], r[i]
    if t is not None:
        for r in t:
            r[i], r[j] = r[j], r[i]


def _add_row(m: list[list[int]], t: list[list[int]] | None, dst: int, src: int, f: int) -> None:
    """row[dst] += f * row[src]"""
    if f == 0:
        return
    ms, md = m[src], m[dst]
    for k in range(len(md)):
        md[k] += f * ms[k]
    if t is not None:
        ts, td = t[src], t[dst]
        for k in range(len(td)):
            td[k] += f * ts[k]


def _add_col(m: list[list[int]], t: list[list[int]] | None, dst: int, src: int, f: int) -> None:
    """col[dst] += f * col[src]"""
    if f == 0:
        return
    for r in m:
        r[dst] += f * r[src]
    if t is not None:
        for r in t:
            r[dst] += f * r[src]


def _negate_row(m: list[list[int]], t: list[list[int]] | None, i: int) -> None:
    m[i] = [-v for v in m[i]]
    if t is not None:
        t[i] = [-v for v in t[i]]


def _round_div(a: int, b: int) -> int:
    """Quotient with remainder of minimal absolute value."""
    q, r = divmod(a, b)
    if 2 * abs(r) > abs(b):
        q += 1
    return q


def _min_pivot(m: list[list[int]], t: int, rows: int, cols: int) -> tuple[int, int] | None:
    """Nonzero entry of minimal |value| in the trailing submatrix, ties by (row, col)."""
    best = None
    best_abs = None
    for i in range(t, rows):
        ri = m[i]
        for j in range(t, cols):
            v = ri[j]
            if v:
                a = abs(v)
                if best_abs is None or a < best_abs:
                    best, best_abs = (i, j), a
                    if a == 1:
                        return best
    return best


# -- Smith normal form -------------------------------------------------------


@dataclass(frozen=True)
class SNFCertificate:
    """Unimodular P, Q with P*A*Q = D diagonal, diag non-negative and chained."""

    P: IntMatrix
    D: IntMatrix
    Q: IntMatrix
    diag: tuple[int, ...]

    def verify(self, a: IntMatrix) -> bool:
        if self.P.rows != a.rows or self.Q.rows != a.cols:
            return False
        if (self.P @ a) @ self.Q != self.D:
            return False
        if abs(det(self.P)) != 1 or abs(det(self.Q)) != 1:
            return False
        d = self.diag
        if any(v < 0 for v in d):
            return False
        for x, y in zip(d, d[1:]):
            if x == 0 and y != 0:
                return False
            if x != 0 and y % x != 0:
                return False
        for i in range(self.D.rows):
            for j in range(self.D.cols):
                expect = d[i] if i == j and i < len(d) else 0
                if self.D.at(i, j) != expect:
                    return False
        return True


def _smith(a: IntMatrix, want_transforms: bool):
    m, n = a.rows, a.cols
    M = a.to_lists()
    P = [[int(i == j) for j in range(m)] for i in range(m)] if want_transforms else None
    Q = [[int(i == j) for j in range(n)] for i in range(n)] if want_transforms else None
    k = min(m, n)
    for t in range(k):
        piv = _min_pivot(M, t, m, n)
        if piv is None:
            break
        while True:
            i0, j0 = piv
            if i0 != t:
                _swap_rows(M, P, t, i0)
            if j0 != t:
                _swap_cols(M, Q, t, j0)
            p = M[t][t]
            clean = True
            for i in range(t + 1, m):
                if M[i][t]:
                    _add_row(M, P, i, t, -_round_div(M[i][t], p))
                    if M[i][t]:
                        clean = False
            for j in range(t + 1, n):
                if M[t][j]:
                    _add_col(M, Q, j, t, -_round_div(M[t][j], p))
                    if M[t][j]:
                        clean = False
            if not clean:
                piv = _min_pivot(M, t, m, n)
                continue
            p = M[t][t]
            bad = None
            for i in range(t + 1, m):
                ri = M[i]
                for j in range(t + 1, n):
                    if ri[j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            # pull a non-divisible row up so the next pass shrinks the pivot
            _add_row(M, P, t, bad, 1)
            piv = _min_pivot(M, t, m, n)
    for i in range(k):
        if M[i][i] < 0:
            _negate_row(M, P, i)
    diag = tuple(M[i][i] for i in range(k))
    return diag, M, P, Q


def snf(a: IntMatrix) -> SNFCertificate:
    """Smith normal form with transformation certificate: P*A*Q = D."""
    diag, M, P, Q = _smith(a, want_transforms=True)
    return SNFCertificate(
        P=IntMatrix.from_rows(P) if a.rows else IntMatrix.zeros(0, 0),
        D=IntMatrix(a.rows, a.cols, tuple(tuple(r) for r in M)),
        Q=IntMatrix.from_rows(Q) if a.cols else IntMatrix.zeros(0, 0),
        diag=diag,
    )


def ds(a: IntMatrix) -> tuple[int, ...]:
    """Non-negative diagonal of the Smith normal form."""
    diag, _, _, _ = _smith(a, want_transforms=False)
    return diag


def is_surjective_over_Z(a: IntMatrix) -> bool:
    """The map Z^cols -> Z^rows is onto iff the SNF diagonal is `rows` ones."""
    if a.rows > a.cols:
        return False
    d = ds(a)
    return len(d) == a.rows and all(v == 1 for v in d)


def has_free_cokernel(a: IntMatrix) -> bool:
    """True iff every nonzero SNF diagonal entry equals 1."""
    return all(v in (0, 1) for v in ds(a))


# -- Hermite normal form ------------------------------------------------------


def hnf(a: IntMatrix) -> tuple[IntMatrix, IntMatrix]:
    """Row-style Hermite normal form: U*A = H with U unimodular.

    H is in row echelon form with positive pivots and entries above each
    pivot reduced to [0, pivot).
    """
    m, n = a.rows, a.cols
    H = a.to_lists()
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    r = 0
    for j in range(n):
        if r == m:
            break
        while True:
            i0 = None
            best = None
            for i in range(r, m):
                v = H[i][j]
                if v and (best is None or abs(v) < best):
                    i0, best = i, abs(v)
            if i0 is None:
                break
            if i0 != r:
                _swap_rows(H, U, r, i0)
            clean = True
            for i in range(r + 1, m):
                if H[i][j]:
                    _add_row(H, U, i, r, -_round_div(H[i][j], H[r][j]))
                    if H[i][j]:
                        clean = False
            if clean:
                break
        if r < m and H[r][j]:
            if H[r][j] < 0:
                _negate_row(H, U, r)
            p = H[r][j]
            for i in range(r):
                q = H[i][j] // p
                if q:
                    _add_row(H, U, i, r, -q)
            r += 1
    return IntMatrix.from_rows(H) if m else IntMatrix.zeros(0, n), \
        IntMatrix.from_rows(U) if m else IntMatrix.zeros(0, 0)


def inverse_unimodular(a: IntMatrix) -> IntMatrix:
    """Exact inverse of a matrix with determinant +-1."""
    if not a.is_square:
        raise ValueError("inverse requires a square matrix")
    h, u = hnf(a)
    if h != IntMatrix.identity(a.rows):
        raise ValueError("matrix is not unimodular")
    return u


# -- kernels and preimages ----------------------------------------------------


@dataclass(frozen=True)
class KernelBasis:
    """Basis of the saturated integer kernel (full lattice of solutions of Ax=0)."""

    vectors: tuple[tuple[int, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.vectors)

    def matrix(self) -> IntMatrix:
        return IntMatrix.from_columns(self.vectors)


class PreimageSolver:
    """Reusable exact solver for A x = b over Z, factoring A once."""

    def __init__(self, a: IntMatrix):
        self.a = a
        self.cert = snf(a)

    def solve(self, b: Sequence[int]) -> tuple[int, ...] | None:
        a = self.a
        if len(b) != a.rows:
            raise ValueError("rhs length mismatch")
        y = self.cert.P.mat_vec(b)
        d = self.cert.diag
        x = [0] * a.cols
        for i in range(a.rows):
            di = d[i] if i < len(d) else 0
            if di == 0:
                if y[i] != 0:
                    return None
            else:
                q, r = divmod(y[i], di)
                if r:
                    return None
                x[i] = q
        return self.cert.Q.mat_vec(x)

    def kernel(self) -> KernelBasis:
        d = self.cert.diag
        cols = [j for j in range(self.a.cols) if j >= len(d) or d[j] == 0]
        return KernelBasis(tuple(self.cert.Q.col(j) for j in cols))


def solve_preimage(a: IntMatrix, b: Sequence[int]) -> tuple[int, ...] | None:
    """Some integer solution of A x = b, or None when no such solution exists."""
    return PreimageSolver(a).solve(b)


def kernel_basis(a: IntMatrix) -> KernelBasis:
    """Saturated basis of {x in Z^cols : A x = 0}."""
    return PreimageSolver(a).kernel()


# -- determinants, rank, characteristic polynomial ----------------------------


def det(a: IntMatrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    if not a.is_square:
        raise ValueError("determinant requires a square matrix")
    n = a.rows
    if n == 0:
        return 1
    M = a.to_lists()
    sign = 1
    prev = 1
    for t in range(n - 1):
        i0 = None
        best = None
        for i in range(t, n):
            v = M[i][t]
            if v and (best is None or abs(v) < best):
                i0, best = i, abs(v)
        if i0 is None:
            return 0
        if i0 != t:
            M[t], M[i0] = M[i0], M[t]
            sign = -sign
        p = M[t][t]
        for i in range(t + 1, n):
            mi = M[i]
            f = mi[t]
            mt = M[t]
            for j in range(t + 1, n):
                mi[j] = (mi[j] * p - f * mt[j]) // prev
            mi[t] = 0
        prev = p
    return sign * M[n - 1][n - 1]


def rank(a: IntMatrix) -> int:
    """Rank over Q via fraction-free elimination with full pivoting."""
    m, n = a.rows, a.cols
    M = a.to_lists()
    prev = 1
    r = 0
    while True:
        piv = _min_pivot(M, r, m, n)
        if piv is None:
            return r
        i0, j0 = piv
        if i0 != r:
            M[i0], M[r] = M[r], M[i0]
        if j0 != r:
            for row in M:
                row[j0], row[r] = row[r], row[j0]
        p = M[r][r]
        for i in range(r + 1, m):
            mi = M[i]
            f = mi[r]
            mr = M[r]
            for j in range(r + 1, n):
                mi[j] = (mi[j] * p - f * mr[j]) // prev
            mi[r] = 0
        prev = p
        r += 1
        if r == min(m, n):
            return r


@lru_cache(maxsize=256)
def char_poly(a: IntMatrix) -> IntPoly:
    """Exact monic characteristic polynomial det(xI - A).

    Delegates to sympy's exact DomainMatrix over ZZ, which stays fast at the
    matrix sizes the verification pipeline reaches.
    """
    if not a.is_square:
        raise ValueError("characteristic polynomial requires a square matrix")
    if a.rows == 0:
        return IntPoly((1,))
    from sympy import ZZ
    from sympy.polys.matrices import DomainMatrix

    dm = DomainMatrix([[ZZ(v) for v in row] for row in a.data], (a.rows, a.cols), ZZ)
    coeffs = dm.charpoly()  # highest degree first, monic
    return IntPoly(tuple(int(c) for c in reversed(coeffs)))


def is_basis(vectors: Sequence[Sequence[int]]) -> bool:
    """True iff the vectors form a Z-basis of Z^n (square with det +-1)."""
    if not vectors:
        return True
    n = len(vectors[0])
    if len(vectors) != n or any(len(v) != n for v in vectors):
        return False
    return abs(det(IntMatrix.from_columns(vectors))) == 1
