"""Polynomial matrices over Z[x]: companion blocks and SNF certificates.

Z[x] is not a PID, so a Smith normal form need not exist; everything here is
either a deterministic construction that provably succeeds (companion pencils)
or a bounded heuristic whose output is replay-verified.  A failed reduction is
reported as inconclusive, never as a nonexistence claim.

Exact products of large polynomial matrices use Kronecker substitution: each
entry is packed into one integer at a power-of-two base chosen from a rigorous
coefficient bound, multiplied as integers, and unpacked with balanced digits.
Uniqueness of the balanced base-B representation makes the packed product a
proof of the polynomial product.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .intmat import IntMatrix
from .intpoly import IntPoly, divisibility_chain_holds

_DIRECT_DET_LIMIT = 12  # direct Z[x] determinants up to this size; pencil shortcut above
_ONE = IntPoly((1,))
_ZERO = IntPoly()


@dataclass(frozen=True)
class PolyMatrix:
    rows: int
    cols: int
    data: tuple[tuple[IntPoly, ...], ...]

    def __post_init__(self) -> None:
        if len(self.data) != self.rows or any(len(r) != self.cols for r in self.data):
            raise ValueError("shape mismatch")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[IntPoly]]) -> "PolyMatrix":
        data = tuple(tuple(r) for r in rows)
        return cls(len(data), len(data[0]) if data else 0, data)

    @classmethod
    def identity(cls, n: int) -> "PolyMatrix":
        return cls(n, n, tuple(tuple(_ONE if i == j else _ZERO for j in range(n)) for i in range(n)))

    @classmethod
    def diagonal(cls, entries: Sequence[IntPoly]) -> "PolyMatrix":
        n = len(entries)
        return cls(n, n, tuple(tuple(entries[i] if i == j else _ZERO for j in range(n)) for i in range(n)))

    @classmethod
    def from_int_matrix(cls, a: IntMatrix) -> "PolyMatrix":
        return cls(a.rows, a.cols, tuple(tuple(IntPoly((v,)) if v else _ZERO for v in r) for r in a.data))

    def at(self, i: int, j: int) -> IntPoly:
        return self.data[i][j]

    def diag(self) -> tuple[IntPoly, ...]:
        return tuple(self.data[i][i] for i in range(min(self.rows, self.cols)))

    def max_entry_degree(self) -> int:
        return max((p.degree for r in self.data for p in r), default=-1)

    def evaluate(self, t: int) -> IntMatrix:
        return IntMatrix(self.rows, self.cols, tuple(tuple(p(t) for p in r) for r in self.data))

    def substitute_neg_x(self) -> "PolyMatrix":
        return PolyMatrix(self.rows, self.cols,
                          tuple(tuple(p.substitute_neg_x() for p in r) for r in self.data))

    def __add__(self, other: "PolyMatrix") -> "PolyMatrix":
        return PolyMatrix(self.rows, self.cols, tuple(
            tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(self.data, other.data)))

    def __sub__(self, other: "PolyMatrix") -> "PolyMatrix":
        return PolyMatrix(self.rows, self.cols, tuple(
            tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(self.data, other.data)))

    def __matmul__(self, other: "PolyMatrix") -> "PolyMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        return _kronecker_mul(self, other)

    def __str__(self) -> str:
        return "\n".join("[" + ", ".join(str(p) for p in r) + "]" for r in self.data)


# -- exact multiplication via Kronecker packing --------------------------------


def _kronecker_mul(a: PolyMatrix, b: PolyMatrix) -> PolyMatrix:
    if a.rows == 0 or b.cols == 0 or a.cols == 0:
        return PolyMatrix(a.rows, b.cols, tuple(tuple(_ZERO for _ in range(b.cols)) for _ in range(a.rows)))
    na = max((p.one_norm() for r in a.data for p in r), default=0)
    nb = max((p.one_norm() for r in b.data for p in r), default=0)
    bound = a.cols * na * nb
    shift = bound.bit_length() + 2  # half-base strictly exceeds any result coefficient
    pa = [[_pack(p, shift) for p in r] for r in a.data]
    pb_t = [[_pack(b.data[i][j], shift) for i in range(b.rows)] for j in range(b.cols)]
    max_deg = a.max_entry_degree() + b.max_entry_degree() + 1
    out = []
    for ra in pa:
        row = []
        for cb in pb_t:
            row.append(_unpack(sum(x * y for x, y in zip(ra, cb)), shift, max_deg))
        out.append(tuple(row))
    return PolyMatrix(a.rows, b.cols, tuple(out))


def _pack(p: IntPoly, shift: int) -> int:
    v = 0
    for c in reversed(p.coeffs):
        v = (v << shift) + c
    return v


def _unpack(v: int, shift: int, max_deg: int) -> IntPoly:
    base = 1 << shift
    half = base >> 1
    coeffs = []
    while v:
        d = ((v + half) & (base - 1)) - half
        coeffs.append(d)
        v = (v - d) >> shift
        if len(coeffs) > max_deg + 1:
            raise ArithmeticError("packed product exceeded its degree bound")
    return IntPoly(tuple(coeffs))


# -- pencils and companion matrices ---------------------------------------------


def x_plus_shift_matrix(a: IntMatrix, c: int = 0, sign: int = 1) -> PolyMatrix:
    """The pencil sign*x*I + c*I - A; sign=+1, c=0 gives the usual xI - A."""
    if not a.is_square:
        raise ValueError("pencil requires a square matrix")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    rows = []
    for i in range(a.rows):
        row = []
        for j in range(a.cols):
            const = (c if i == j else 0) - a.at(i, j)
            coeffs = (const, sign) if i == j else (const,)
            row.append(IntPoly(coeffs))
        rows.append(tuple(row))
    return PolyMatrix(a.rows, a.cols, tuple(rows))


def char_pencil(a: IntMatrix) -> PolyMatrix:
    """xI - A."""
    return x_plus_shift_matrix(a, 0, 1)


def pencil_part(m: PolyMatrix) -> IntMatrix | None:
    """Recover A when m == xI - A, else None."""
    if m.rows != m.cols:
        return None
    rows = []
    for i in range(m.rows):
        row = []
        for j in range(m.cols):
            p = m.at(i, j)
            if p.degree > 1:
                return None
            if p.coeff(1) != (1 if i == j else 0):
                return None
            row.append(-p.coeff(0))
        rows.append(row)
    return IntMatrix.from_rows(rows) if m.rows else IntMatrix.zeros(0, 0)


@dataclass(frozen=True)
class CompanionBlock:
    """A monic polynomial with its companion matrix.

    Convention: ones on the subdiagonal, negated coefficients down the last
    column, so char_poly(matrix) == poly.
    """

    poly: IntPoly
    matrix: IntMatrix


def companion(a: IntPoly) -> CompanionBlock:
    if not a.is_monic or a.degree < 1:
        raise ValueError("companion matrix needs a monic non-constant polynomial")
    d = a.degree
    data = [[0] * d for _ in range(d)]
    for i in range(d):
        data[i][d - 1] = -a.coeffs[i]
    for i in range(d - 1):
        data[i + 1][i] = 1
    return CompanionBlock(a, IntMatrix.from_rows(data))


def block_companion_matrix(polys: Sequence[IntPoly]) -> IntMatrix:
    """Direct sum of the companion matrices of the given monic polynomials."""
    blocks = [companion(p).matrix for p in polys]
    n = sum(b.rows for b in blocks)
    data = [[0] * n for _ in range(n)]
    off = 0
    for b in blocks:
        for i in range(b.rows):
            for j in range(b.cols):
                data[off + i][off + j] = b.at(i, j)
        off += b.rows
    return IntMatrix.from_rows(data) if n else IntMatrix.zeros(0, 0)


def match_block_companion(a: IntMatrix) -> tuple[IntPoly, ...] | None:
    """Recover the polynomial list when a is a block-companion direct sum."""
    if not a.is_square or a.rows == 0:
        return None
    n = a.rows
    polys = []
    start = 0
    while start < n:
        end = start
        while end + 1 < n and a.at(end + 1, end) == 1:
            end += 1
        d = end - start + 1
        coeffs = [-a.at(start + i, end) for i in range(d)] + [1]
        block = companion(IntPoly(tuple(coeffs))).matrix
        for i in range(d):
            for j in range(d):
                if a.at(start + i, start + j) != block.at(i, j):
                    return None
        for i in range(start, end + 1):
            for j in range(n):
                if not (start <= j <= end) and (a.at(i, j) != 0 or a.at(j, i) != 0):
                    return None
        polys.append(IntPoly(tuple(coeffs)))
        start = end + 1
    return tuple(polys)


# -- certificates -----------------------------------------------------------------


@dataclass(frozen=True)
class PolySNFCertificate:
    """Unimodular Px, Qx over Z[x] with Px*M*Qx = Dx diagonal and chained."""

    Px: PolyMatrix
    Dx: PolyMatrix
    Qx: PolyMatrix
    diag: tuple[IntPoly, ...]


class ReductionFailure(Exception):
    """Heuristic SNF reduction got stuck; carries the state for diagnostics.

    Inconclusive by design: Z[x] is not a PID and this artifact never
    certifies nonexistence.
    """

    def __init__(self, message: str, stuck: PolyMatrix):
        super().__init__(message)
        self.stuck = stuck


# -- tracked elementary operations -------------------------------------------------


class _Tracked:
    """Row/column operations on M with P, Q accumulating the transforms.

    Invariant: P @ M0 @ Q == current M, with P and Q products of elementary
    (hence unimodular) matrices over Z[x].
    """

    def __init__(self, m: PolyMatrix):
        self.m = [list(r) for r in m.data]
        self.rows = m.rows
        self.cols = m.cols
        self.p = [[_ONE if i == j else _ZERO for j in range(self.rows)] for i in range(self.rows)]
        self.q = [[_ONE if i == j else _ZERO for j in range(self.cols)] for i in range(self.cols)]

    def row_swap(self, i: int, j: int) -> None:
        if i != j:
            self.m[i], self.m[j] = self.m[j], self.m[i]
            self.p[i], self.p[j] = self.p[j], self.p[i]

    def col_swap(self, i: int, j: int) -> None:
        if i != j:
            for r in self.m:
                r[i], r[j] = r[j], r[i]
            for r in self.q:
                r[i], r[j] = r[j], r[i]

    def row_add(self, dst: int, src: int, f: IntPoly) -> None:
        if f.is_zero:
            return
        self.m[dst] = [a + f * b for a, b in zip(self.m[dst], self.m[src])]
        self.p[dst] = [a + f * b for a, b in zip(self.p[dst], self.p[src])]

    def col_add(self, dst: int, src: int, f: IntPoly) -> None:
        if f.is_zero:
            return
        for r in self.m:
            r[dst] = r[dst] + f * r[src]
        for r in self.q:
            r[dst] = r[dst] + f * r[src]

    def row_negate(self, i: int) -> None:
        self.m[i] = [-v for v in self.m[i]]
        self.p[i] = [-v for v in self.p[i]]

    def entry(self, i: int, j: int) -> IntPoly:
        return self.m[i][j]

    def certificate(self) -> PolySNFCertificate:
        d = PolyMatrix.from_rows(self.m)
        return PolySNFCertificate(
            Px=PolyMatrix.from_rows(self.p),
            Dx=d,
            Qx=PolyMatrix.from_rows(self.q),
            diag=d.diag(),
        )


# -- determinants over Z[x] ----------------------------------------------------------


def det_poly(m: PolyMatrix) -> IntPoly:
    """Exact determinant by fraction-free elimination; divisions stay in Z[x]."""
    if m.rows != m.cols:
        raise ValueError("determinant requires a square matrix")
    n = m.rows
    if n == 0:
        return _ONE
    w = [list(r) for r in m.data]
    sign = 1
    prev = _ONE
    for t in range(n - 1):
        i0 = None
        for i in range(t, n):
            if not w[i][t].is_zero:
                i0 = i
                break
        if i0 is None:
            return _ZERO
        if i0 != t:
            w[t], w[i0] = w[i0], w[t]
            sign = -sign
        p = w[t][t]
        for i in range(t + 1, n):
            f = w[i][t]
            for j in range(t + 1, n):
                num = w[i][j] * p - f * w[t][j]
                q = num.exact_div(prev)
                if q is None:
                    raise ArithmeticError("fraction-free division failed")
                w[i][j] = q
            w[i][t] = _ZERO
        prev = p
    result = w[n - 1][n - 1]
    return result if sign == 1 else -result


def _is_unit_poly(p: IntPoly) -> bool:
    return p.coeffs in ((1,), (-1,))


# -- certificate verification -----------------------------------------------------


def verify_poly_snf(cert: PolySNFCertificate, m: PolyMatrix) -> bool:
    """Replay a certificate: Px*M*Qx == Dx, unit determinants, divisibility chain.

    For large pencils xI - A the unit-determinant check uses the identity
    det(Px)*det(M)*det(Qx) = det(Dx): once the product replays and the diagonal
    product equals +-char_poly(A) != 0, both determinants are forced to be
    units because Z[x] is an integral domain.
    """
    n = m.rows
    if m.cols != n or cert.Px.rows != n or cert.Px.cols != n:
        return False
    if cert.Qx.rows != n or cert.Qx.cols != n or cert.Dx.rows != n or cert.Dx.cols != n:
        return False
    d = cert.Dx.diag()
    if cert.diag != d:
        return False
    for i in range(n):
        for j in range(n):
            if i != j and not cert.Dx.at(i, j).is_zero:
                return False
    if not divisibility_chain_holds(d):
        return False
    if (cert.Px @ m) @ cert.Qx != cert.Dx:
        return False
    if n <= _DIRECT_DET_LIMIT:
        return _is_unit_poly(det_poly(cert.Px)) and _is_unit_poly(det_poly(cert.Qx))
    diag_prod = _ONE
    for p in d:
        diag_prod = diag_prod * p
    a = pencil_part(m)
    if a is not None:
        from .intmat import char_poly

        cp = char_poly(a)
        return diag_prod == cp or diag_prod == -cp
    det_m = det_poly(m)
    if det_m.is_zero:
        return _is_unit_poly(det_poly(cert.Px)) and _is_unit_poly(det_poly(cert.Qx))
    return diag_prod == det_m or diag_prod == -det_m


# -- shared elimination machinery ----------------------------------------------------


def _pivot_priority(p: IntPoly) -> tuple:
    """Lower is better: unit constants, then constants, then by degree."""
    if p.is_constant:
        return (0 if abs(p.constant_term) == 1 else 1, abs(p.constant_term), 0)
    return (2, p.degree, abs(p.leading))


def _find_pivot(t: _Tracked, start: int) -> tuple[int, int] | None:
    best = None
    best_key = None
    for i in range(start, t.rows):
        for j in range(start, t.cols):
            e = t.entry(i, j)
            if e.is_zero:
                continue
            key = _pivot_priority(e) + (i, j)
            if best_key is None or key < best_key:
                best, best_key = (i, j), key
    return best


def _partial_quotient(e: IntPoly, piv: IntPoly) -> IntPoly | None:
    """One division step staying in Z[x]: shrink e's degree or its coefficients."""
    if piv.is_zero:
        return None
    if not e.is_zero and e.degree >= piv.degree:
        lead_q = e.leading // piv.leading
        if lead_q and e.leading % piv.leading == 0:
            return IntPoly((0,) * (e.degree - piv.degree) + (lead_q,))
    if piv.is_constant and not e.is_zero:
        c = piv.constant_term
        q = tuple(v // c for v in e.coeffs)
        if any(q):
            return IntPoly(q)
    return None


def _eliminate(t: _Tracked, start: int, budget: int) -> None:
    """Diagonalize rows/cols >= start greedily; raises ReductionFailure when stuck."""
    n = min(t.rows, t.cols)
    pos = start
    iters = 0
    while pos < n:
        iters += 1
        if iters > budget:
            raise ReductionFailure("iteration budget exhausted", PolyMatrix.from_rows(t.m))
        cell = _find_pivot(t, pos)
        if cell is None:
            return
        t.row_swap(pos, cell[0])
        t.col_swap(pos, cell[1])
        piv = t.entry(pos, pos)
        progressed = False
        clean = True
        for i in range(pos + 1, t.rows):
            e = t.entry(i, pos)
            if e.is_zero:
                continue
            q = e.exact_div(piv)
            if q is None:
                q = _partial_quotient(e, piv)
            if q is not None and not q.is_zero:
                t.row_add(i, pos, -q)
                progressed = True
            if not t.entry(i, pos).is_zero:
                clean = False
        for j in range(pos + 1, t.cols):
            e = t.entry(pos, j)
            if e.is_zero:
                continue
            q = e.exact_div(piv)
            if q is None:
                q = _partial_quotient(e, piv)
            if q is not None and not q.is_zero:
                t.col_add(j, pos, -q)
                progressed = True
            if not t.entry(pos, j).is_zero:
                clean = False
        if clean:
            pos += 1
        elif not progressed:
            raise ReductionFailure("no admissible elimination step", PolyMatrix.from_rows(t.m))


def _diag_sort_key(p: IntPoly) -> tuple:
    if p.is_zero:
        return (3, 0, 0)
    if p.is_constant:
        return (0 if abs(p.constant_term) == 1 else 1, abs(p.constant_term), 0)
    return (2, p.degree, p.one_norm())


def _sort_diagonal(t: _Tracked) -> None:
    """Selection sort of the diagonal by paired row+column swaps."""
    n = min(t.rows, t.cols)
    for pos in range(n):
        best = pos
        for i in range(pos + 1, n):
            if _diag_sort_key(t.entry(i, i)) < _diag_sort_key(t.entry(best, best)):
                best = i
        if best != pos:
            t.row_swap(pos, best)
            t.col_swap(pos, best)


def _finalize(t: _Tracked, original: PolyMatrix, budget: int) -> PolySNFCertificate:
    """Order the diagonal, repair divisibility where reachable, normalize signs."""
    n = min(t.rows, t.cols)
    for _ in range(n * n + 2):
        _sort_diagonal(t)
        bad = None
        for i in range(n - 1):
            if not t.entry(i, i).divides(t.entry(i + 1, i + 1)):
                bad = i
                break
        if bad is None:
            break
        # fold the offending pair together and re-diagonalize the tail
        t.col_add(bad + 1, bad, _ONE)
        _eliminate(t, bad, budget)
    else:
        raise ReductionFailure("diagonal divisibility not reachable", PolyMatrix.from_rows(t.m))
    for i in range(n):
        e = t.entry(i, i)
        if e.is_zero:
            continue
        if e.leading < 0:
            t.row_negate(i)
    cert = t.certificate()
    if not verify_poly_snf(cert, original):
        raise ReductionFailure("reduced matrix failed replay verification",
                               PolyMatrix.from_rows(t.m))
    return cert


# -- deterministic SNF for block-companion pencils -----------------------------------


def block_companion_snf(blocks: Sequence[CompanionBlock]) -> PolySNFCertificate:
    """SNF certificate of xI - diag(companion blocks), diagonal (1,...,1,a_1,...,a_k).

    Deterministic: pivot on the subdiagonal unit entries of each block, then
    sort the diagonal with paired swaps.  Provably succeeds when the block
    polynomials form a divisibility chain (required of the input).
    """
    polys = [b.poly for b in blocks]
    if not polys:
        raise ValueError("no blocks")
    if not divisibility_chain_holds(polys):
        raise ValueError("block polynomials must form a divisibility chain")
    c = block_companion_matrix(polys)
    n = c.rows
    t = _Tracked(char_pencil(c))

    # unit pivots: within a block of degree d the pencil has -1 at (i+1, i)
    unit_cells = []
    off = 0
    for p in polys:
        d = p.degree
        for i in range(d - 1):
            unit_cells.append((off + i + 1, off + i))
        off += d
    for (pi, pj) in unit_cells:
        pv = t.entry(pi, pj)
        if not _is_unit_poly(pv):
            raise AssertionError("expected a unit pivot in the companion pencil")
        inv = 1 if pv.coeffs == (1,) else -1
        for i in range(t.rows):
            if i != pi and not t.entry(i, pj).is_zero:
                t.row_add(i, pi, t.entry(i, pj) * (-inv))
        for j in range(t.cols):
            if j != pj and not t.entry(pi, j).is_zero:
                t.col_add(j, pj, t.entry(pi, j) * (-inv))
        if inv == -1:
            t.row_negate(pi)
    _sort_diagonal_permutation(t)
    for i in range(n):
        e = t.entry(i, i)
        if not e.is_zero and e.leading < 0:
            t.row_negate(i)
    cert = t.certificate()
    expected = tuple([_ONE] * (n - len(polys)) + sorted(polys, key=lambda p: p.degree))
    if cert.diag != expected:
        raise AssertionError("companion SNF produced an unexpected diagonal")
    return cert


def _sort_diagonal_permutation(t: _Tracked) -> None:
    """Sort a generalized permutation matrix into sorted diagonal form by swaps."""
    n = min(t.rows, t.cols)
    for pos in range(n):
        best = None
        best_key = None
        for i in range(pos, t.rows):
            for j in range(pos, t.cols):
                e = t.entry(i, j)
                if e.is_zero:
                    continue
                key = _diag_sort_key(e) + (i, j)
                if best_key is None or key < best_key:
                    best, best_key = (i, j), key
        if best is None:
            return
        t.row_swap(pos, best[0])
        t.col_swap(pos, best[1])


# -- heuristic reduction over Z[x] -----------------------------------------------------


def reduce_to_snf_zx(m: PolyMatrix, max_iters: int | None = None) -> PolySNFCertificate:
    """Heuristic SNF over Z[x] with a verified certificate, or ReductionFailure.

    Strategy: recognize xI - (block companion) pencils and take the
    deterministic route; otherwise eliminate greedily, preferring unit pivots,
    then constant pivots, then degree-minimal pivots, applying a division step
    only when the quotient stays in Z[x].  Iterations are bounded
    (default 10 * dim^2); a stuck matrix raises ReductionFailure.
    """
    if m.rows != m.cols:
        raise ValueError("SNF reduction implemented for square inputs")
    n = m.rows
    a = pencil_part(m)
    if a is not None:
        polys = match_block_companion(a)
        if polys is not None and divisibility_chain_holds(polys):
            return block_companion_snf(tuple(companion(p) for p in polys))
    budget = 10 * n * n if max_iters is None else max_iters
    t = _Tracked(m)
    _eliminate(t, 0, budget)
    return _finalize(t, m, budget)
