"""Exact integer and rational matrix routines.

Matrices are lists of rows of Python ints (or ``Fraction`` for the rational
helpers). Nothing here uses floating point. The Smith form follows the classic
pivot-and-clear procedure: move the entry of least absolute value to the
pivot, clear its row and column, then force divisibility of the remaining
block before moving on.
"""

from __future__ import annotations

from collections.abc import Sequence
from fractions import Fraction

import sympy

IntMatrix = list[list[int]]
RatMatrix = list[list[Fraction]]


# ---------------------------------------------------------------------------
# Basic helpers
# ---------------------------------------------------------------------------


def identity(n: int) -> IntMatrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def copy(A: Sequence[Sequence[int]]) -> IntMatrix:
    return [list(row) for row in A]


def transpose(A: Sequence[Sequence]) -> list[list]:
    if not A:
        return []
    return [list(col) for col in zip(*A, strict=True)]


def matmul(A: Sequence[Sequence], B: Sequence[Sequence]) -> list[list]:
    Bt = transpose(B)
    return [[sum(a * b for a, b in zip(row, col, strict=True)) for col in Bt] for row in A]


def matvec(A: Sequence[Sequence], v: Sequence) -> list:
    return [sum(a * x for a, x in zip(row, v, strict=True)) for row in A]


def bilinear(G: Sequence[Sequence], x: Sequence, y: Sequence):
    """Return ``x^T G y``."""
    return sum(
        xi * gij * yj
        for xi, row in zip(x, G, strict=True)
        for gij, yj in zip(row, y, strict=True)
    )


def columns(A: Sequence[Sequence]) -> list[list]:
    return transpose(A)


def from_columns(cols: Sequence[Sequence], nrows: int) -> list[list]:
    if not cols:
        return [[] for _ in range(nrows)]
    return transpose(cols)


def block_diagonal(blocks: Sequence[Sequence[Sequence[int]]]) -> IntMatrix:
    n = sum(len(b) for b in blocks)
    out = [[0] * n for _ in range(n)]
    offset = 0
    for b in blocks:
        for i, row in enumerate(b):
            for j, x in enumerate(row):
                out[offset + i][offset + j] = x
        offset += len(b)
    return out


def is_symmetric(A: Sequence[Sequence]) -> bool:
    return all(A[i][j] == A[j][i] for i in range(len(A)) for j in range(i))


# ---------------------------------------------------------------------------
# Determinant and inverse
# ---------------------------------------------------------------------------


def det_int(A: Sequence[Sequence[int]]) -> int:
    """Determinant of a square integer matrix by fraction-free (Bareiss) elimination."""
    n = len(A)
    if n == 0:
        return 1
    M = copy(A)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k] != 0:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = M[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * pivot - M[i][k] * M[k][j]) // prev
        prev = pivot
    return sign * M[n - 1][n - 1]


def adjugate_int(A: Sequence[Sequence[int]]) -> IntMatrix:
    """Adjugate of a square integer matrix from its cofactors, so ``A adj(A) = det(A) I``."""
    n = len(A)
    if n == 1:
        return [[1]]
    out: IntMatrix = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(map(list, A)) if k != i]
            out[j][i] = (-1) ** (i + j) * det_int(minor)
    return out


def rational_inverse(A: Sequence[Sequence[int]]) -> RatMatrix:
    """Exact inverse of a nonsingular integer (or rational) matrix."""
    inv = sympy.Matrix(A).inv()
    return [
        [Fraction(int(x.p), int(x.q)) for x in inv.row(i)]
        for i in range(inv.rows)
    ]


def integer_inverse(A: Sequence[Sequence[int]]) -> IntMatrix:
    """Inverse of a unimodular integer matrix."""
    inv = rational_inverse(A)
    out: IntMatrix = []
    for row in inv:
        if any(x.denominator != 1 for x in row):
            raise ValueError("matrix is not unimodular")
        out.append([int(x) for x in row])
    return out


def solve_rational(A: Sequence[Sequence[int]], b: Sequence) -> list[Fraction]:
    """Solve ``A x = b`` for square nonsingular ``A``."""
    inv = rational_inverse(A)
    return [sum((Fraction(a) * Fraction(v) for a, v in zip(row, b, strict=True)), Fraction(0))
            for row in inv]


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------


def _add_row(M: IntMatrix, target: int, source: int, factor: int) -> None:
    row_t, row_s = M[target], M[source]
    for k in range(len(row_t)):
        row_t[k] += factor * row_s[k]


def _add_col(M: IntMatrix, target: int, source: int, factor: int) -> None:
    for row in M:
        row[target] += factor * row[source]


def _swap_rows(M: IntMatrix, i: int, j: int) -> None:
    M[i], M[j] = M[j], M[i]


def _swap_cols(M: IntMatrix, i: int, j: int) -> None:
    for row in M:
        row[i], row[j] = row[j], row[i]


def _least_entry(S: IntMatrix, t: int) -> tuple[int, int] | None:
    best = None
    for i in range(t, len(S)):
        for j in range(t, len(S[0])):
            x = S[i][j]
            if x and (best is None or abs(x) < abs(S[best[0]][best[1]])):
                best = (i, j)
    return best


def smith_form(A: Sequence[Sequence[int]]) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return ``(S, L, R)`` with ``L * A * R = S`` in Smith normal form.

    ``L`` and ``R`` are unimodular, ``S`` is diagonal with nonnegative entries
    ``s_1 | s_2 | ...`` followed by zeros.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    S = copy(A)
    L = identity(m)
    R = identity(n)
    for t in range(min(m, n)):
        pivot = _least_entry(S, t)
        if pivot is None:
            break
        i, j = pivot
        _swap_rows(S, t, i)
        _swap_rows(L, t, i)
        _swap_cols(S, t, j)
        _swap_cols(R, t, j)
        while True:
            clean = True
            for i in range(t + 1, m):
                if S[i][t]:
                    q = S[i][t] // S[t][t]
                    _add_row(S, i, t, -q)
                    _add_row(L, i, t, -q)
                    clean = clean and S[i][t] == 0
            for j in range(t + 1, n):
                if S[t][j]:
                    q = S[t][j] // S[t][t]
                    _add_col(S, j, t, -q)
                    _add_col(R, j, t, -q)
                    clean = clean and S[t][j] == 0
            if not clean:
                best_abs, where = None, None
                for i in range(t + 1, m):
                    if S[i][t] and (best_abs is None or abs(S[i][t]) < best_abs):
                        best_abs, where = abs(S[i][t]), ("row", i)
                for j in range(t + 1, n):
                    if S[t][j] and (best_abs is None or abs(S[t][j]) < best_abs):
                        best_abs, where = abs(S[t][j]), ("col", j)
                kind, k = where
                if kind == "row":
                    _swap_rows(S, t, k)
                    _swap_rows(L, t, k)
                else:
                    _swap_cols(S, t, k)
                    _swap_cols(R, t, k)
                continue
            offender = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if S[i][j] % S[t][t]),
                None,
            )
            if offender is not None:
                _add_row(S, t, offender, 1)
                _add_row(L, t, offender, 1)
                continue
            break
        if S[t][t] < 0:
            S[t] = [-x for x in S[t]]
            L[t] = [-x for x in L[t]]
    return S, L, R


def elementary_divisors(A: Sequence[Sequence[int]]) -> list[int]:
    """Nonzero diagonal entries of the Smith form, in divisibility order."""
    S, _, _ = smith_form(A)
    return [S[i][i] for i in range(min(len(S), len(S[0]) if S else 0)) if S[i][i] != 0]


def rank_int(A: Sequence[Sequence[int]]) -> int:
    if not A or not A[0]:
        return 0
    return len(elementary_divisors(A))


# ---------------------------------------------------------------------------
# Sublattices of Z^n (vectors given as coordinate lists)
# ---------------------------------------------------------------------------


def span_basis(vectors: Sequence[Sequence[int]], n: int) -> list[list[int]]:
    """Basis of the Z-span of ``vectors`` inside ``Z^n``."""
    vectors = [list(v) for v in vectors if any(v)]
    if not vectors:
        return []
    M = from_columns(vectors, n)
    S, L, _ = smith_form(M)
    Linv = integer_inverse(L)
    basis = []
    for i in range(min(len(S), len(S[0]))):
        s = S[i][i]
        if s == 0:
            break
        basis.append([s * Linv[r][i] for r in range(n)])
    return basis


def saturation_basis(vectors: Sequence[Sequence[int]], n: int) -> list[list[int]]:
    """Basis of ``(Q-span of vectors) ∩ Z^n``."""
    vectors = [list(v) for v in vectors if any(v)]
    if not vectors:
        return []
    M = from_columns(vectors, n)
    S, L, _ = smith_form(M)
    Linv = integer_inverse(L)
    r = sum(1 for i in range(min(len(S), len(S[0]))) if S[i][i] != 0)
    return [[Linv[row][i] for row in range(n)] for i in range(r)]


def kernel_basis(A: Sequence[Sequence[int]]) -> list[list[int]]:
    """Basis of the integer kernel ``{x : A x = 0}`` (always saturated)."""
    m = len(A)
    n = len(A[0]) if m else 0
    if m == 0:
        return [[1 if i == j else 0 for i in range(n)] for j in range(n)]
    S, _, R = smith_form(A)
    r = sum(1 for i in range(min(m, n)) if S[i][i] != 0)
    return [[R[row][j] for row in range(n)] for j in range(r, n)]


def hermite_rows(vectors: Sequence[Sequence[int]]) -> list[list[int]]:
    """Row-style Hermite normal form of the lattice spanned by ``vectors``.

    Pivots are positive and entries above each pivot are reduced into
    ``[0, pivot)``; the result is a canonical basis of the span.
    """
    rows = [list(v) for v in vectors if any(v)]
    if not rows:
        return []
    ncols = len(rows[0])
    out: list[list[int]] = []
    col = 0
    while rows and col < ncols:
        nonzero = [r for r in rows if r[col] != 0]
        if not nonzero:
            col += 1
            continue
        zero = [r for r in rows if r[col] == 0]
        while len(nonzero) > 1:
            nonzero.sort(key=lambda r: abs(r[col]))
            head = nonzero[0]
            rest = []
            for r in nonzero[1:]:
                q = r[col] // head[col]
                reduced = [a - q * b for a, b in zip(r, head, strict=True)]
                if reduced[col] != 0:
                    rest.append(reduced)
                elif any(reduced):
                    zero.append(reduced)
            nonzero = [head, *rest]
        pivot_row = nonzero[0]
        if pivot_row[col] < 0:
            pivot_row = [-a for a in pivot_row]
        out.append(pivot_row)
        rows = zero
        col += 1
    for i, row in enumerate(out):
        pc = next(k for k, a in enumerate(row) if a != 0)
        for j in range(i):
            q = out[j][pc] // row[pc]
            if q:
                out[j] = [a - q * b for a, b in zip(out[j], row, strict=True)]
    return out


def coordinates_in_basis(basis: Sequence[Sequence[int]], v: Sequence) -> list[Fraction]:
    """Rational coordinates of ``v`` in the (full rank, square) ``basis`` given as rows."""
    return solve_rational(transpose(basis), v)


__all__ = [
    "IntMatrix",
    "RatMatrix",
    "adjugate_int",
    "bilinear",
    "block_diagonal",
    "columns",
    "coordinates_in_basis",
    "copy",
    "det_int",
    "elementary_divisors",
    "from_columns",
    "hermite_rows",
    "identity",
    "integer_inverse",
    "is_symmetric",
    "kernel_basis",
    "matmul",
    "matvec",
    "rank_int",
    "rational_inverse",
    "saturation_basis",
    "smith_form",
    "solve_rational",
    "span_basis",
    "transpose",
]
