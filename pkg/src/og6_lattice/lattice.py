"""Even integral lattices given by Gram matrices.

A :class:`Lattice` is immutable and always valid: symmetric, nondegenerate and
even. Vectors are integer coordinate tuples in the lattice's own basis and
sublattices are lists of such vectors (basis rows), so there is only one
coordinate world per lattice.

Root lattices follow the negative definite convention: ``A(2)`` has Gram
``[[-2, 1], [1, -2]]``.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from .errors import LatticeError
from .linalg import (
    block_diagonal,
    det_int,
    elementary_divisors,
    is_symmetric,
    kernel_basis,
    matmul,
    matvec,
    rank_int,
    saturation_basis,
    transpose,
)

log = logging.getLogger(__name__)

LatticeVector = tuple[int, ...]
Gram = tuple[tuple[int, ...], ...]


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Lattice:
    """An even nondegenerate lattice.

    ``name`` is a display label only; it takes no part in equality.
    """

    gram: Gram
    name: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        _check_gram(self.gram)

    @property
    def rank(self) -> int:
        return len(self.gram)

    @cached_property
    def det(self) -> int:
        return det_int(self.gram)

    @cached_property
    def signature(self) -> tuple[int, int]:
        return _signature(self.gram)

    @property
    def is_negative_definite(self) -> bool:
        return self.signature == (0, self.rank)

    @property
    def is_positive_definite(self) -> bool:
        return self.signature == (self.rank, 0)

    @property
    def is_definite(self) -> bool:
        return self.is_negative_definite or self.is_positive_definite

    def pair(self, x: Sequence, y: Sequence):
        return sum(
            xi * gij * yj
            for xi, row in zip(x, self.gram, strict=True)
            for gij, yj in zip(row, y, strict=True)
        )

    def norm(self, x: Sequence):
        return self.pair(x, x)

    def label(self) -> str:
        if self.name:
            return self.name
        if self.rank == 0:
            return "0"
        return "gram" + str([list(r) for r in self.gram]).replace(" ", "")

    def __str__(self) -> str:
        return self.label()

    @classmethod
    def zero(cls) -> Lattice:
        return cls((), name="0")


def _check_gram(gram: Gram) -> None:
    n = len(gram)
    if any(len(row) != n for row in gram):
        raise LatticeError("Gram matrix must be square", reason="not_square")
    if any(not isinstance(x, int) or isinstance(x, bool) for row in gram for x in row):
        raise LatticeError("Gram matrix entries must be integers", reason="not_integral")
    if not is_symmetric(gram):
        raise LatticeError("Gram matrix is not symmetric", reason="asymmetric")
    odd = [i for i in range(n) if gram[i][i] % 2]
    if odd:
        raise LatticeError(
            f"diagonal entry {gram[odd[0]][odd[0]]} at position {odd[0]} is odd; "
            "only even lattices are supported",
            reason="odd",
        )
    if n and det_int(gram) == 0:
        raise LatticeError("Gram matrix is degenerate (determinant 0)", reason="degenerate")


def _freeze(matrix: Iterable[Iterable[int]]) -> Gram:
    return tuple(tuple(int(x) for x in row) for row in matrix)


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def make_lattice(gram: Iterable[Iterable[int]], name: str | None = None) -> Lattice:
    """Validate ``gram`` and wrap it as a :class:`Lattice`."""
    rows = [list(row) for row in gram]
    if not rows:
        raise LatticeError("Gram matrix is empty", reason="empty")
    if any(isinstance(x, float) and not x.is_integer() for row in rows for x in row):
        raise LatticeError("Gram matrix entries must be integers", reason="not_integral")
    return Lattice(_freeze(rows), name=name)


def U() -> Lattice:
    return Lattice(((0, 1), (1, 0)), name="U")


def _cartan_negative(n: int, edges: Iterable[tuple[int, int]]) -> Gram:
    g = [[0] * n for _ in range(n)]
    for i in range(n):
        g[i][i] = -2
    for i, j in edges:
        g[i][j] = g[j][i] = 1
    return _freeze(g)


def A(n: int) -> Lattice:
    if n < 1:
        raise LatticeError(f"A(n) needs n >= 1, got {n}", reason="range")
    return Lattice(_cartan_negative(n, ((i, i + 1) for i in range(n - 1))), name=f"A{n}")


def D(n: int) -> Lattice:
    if n < 4:
        raise LatticeError(f"D(n) needs n >= 4, got {n}", reason="range")
    edges = [(i, i + 1) for i in range(n - 2)] + [(n - 3, n - 1)]
    return Lattice(_cartan_negative(n, edges), name=f"D{n}")


def E(n: int) -> Lattice:
    if n not in (6, 7, 8):
        raise LatticeError(f"E(n) needs n in {{6, 7, 8}}, got {n}", reason="range")
    edges = [(i, i + 1) for i in range(n - 2)] + [(2, n - 1)]
    return Lattice(_cartan_negative(n, edges), name=f"E{n}")


def rank1(m: int) -> Lattice:
    if m == 0 or m % 2:
        raise LatticeError(f"rank-one lattice [m] needs m even and nonzero, got {m}",
                           reason="range")
    return Lattice(((m,),), name=f"[{m}]")


def btA() -> Lattice:
    """The rank-4 lattice with Gram matrix printed alongside the order-6 computation."""
    return Lattice(
        ((-2, 1, -1, -1), (1, -2, 1, 1), (-1, 1, -2, 0), (-1, 1, 0, -4)),
        name="btA",
    )


def bL() -> Lattice:
    """``3U + 2[-2]``, with basis ``e1, f1, e2, f2, e3, f3, c1, c2``."""
    lat = direct_sum([U(), U(), U(), rank1(-2), rank1(-2)])
    return Lattice(lat.gram, name="3U+2[-2]")


def bLambda() -> Lattice:
    lat = direct_sum([U()] * 5)
    return Lattice(lat.gram, name="5U")


def bR() -> Lattice:
    lat = direct_sum([rank1(2), rank1(2)])
    return Lattice(lat.gram, name="2[2]")


def rescale(L: Lattice, n: int) -> Lattice:
    if n == 0:
        raise LatticeError("cannot rescale by 0", reason="range")
    name = f"{L.name}({n})" if L.name else None
    return Lattice(_freeze([[n * x for x in row] for row in L.gram]), name=name)


def direct_sum(parts: Sequence[Lattice]) -> Lattice:
    if not parts:
        raise LatticeError("direct sum of an empty sequence", reason="empty")
    parts = [p for p in parts if p.rank] or [parts[0]]
    gram = _freeze(block_diagonal([p.gram for p in parts]))
    names = [p.name for p in parts]
    name = "+".join(names) if all(names) else None
    return Lattice(gram, name=name)


def determinant(L: Lattice) -> int:
    return L.det


def signature(L: Lattice) -> tuple[int, int]:
    return L.signature


def _signature(gram: Gram) -> tuple[int, int]:
    norms = [n for _, n in _diagonalize(gram)]
    pos = sum(1 for n in norms if n > 0)
    return pos, len(norms) - pos


def _diagonalize(gram: Gram) -> list[tuple[tuple[Fraction, ...], Fraction]]:
    """Orthogonal rational basis by symmetric congruence diagonalization over Q.

    Returns ``(vector, square)`` pairs; vectors are in the lattice's coordinates.
    """
    n = len(gram)
    G = [[Fraction(x) for x in row] for row in gram]
    basis = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]

    def pair(x, y):
        return sum((x[a] * G[a][b] * y[b] for a in range(n) for b in range(n) if x[a] and y[b]),
                   Fraction(0))

    active = list(range(n))
    out = []
    while active:
        piv = next((i for i in active if pair(basis[i], basis[i]) != 0), None)
        if piv is None:
            found = next(((i, j) for i in active for j in active
                          if i < j and pair(basis[i], basis[j]) != 0), None)
            if found is None:
                raise LatticeError("degenerate form in signature computation",
                                   reason="degenerate")
            i, j = found
            # e_i + e_j has square 2 b(e_i, e_j) != 0
            basis[i] = [a + b for a, b in zip(basis[i], basis[j], strict=True)]
            piv = i
        v = basis[piv]
        vv = pair(v, v)
        active.remove(piv)
        for k in active:
            c = pair(basis[k], v) / vv
            if c:
                basis[k] = [a - c * b for a, b in zip(basis[k], v, strict=True)]
        out.append((tuple(v), vv))
    return out


def orthogonal_basis(L: Lattice) -> list[tuple[tuple[Fraction, ...], Fraction]]:
    """Pairwise orthogonal rational basis of ``L ⊗ Q`` with the squares of its vectors."""
    return _diagonalize(L.gram)


# ---------------------------------------------------------------------------
# Vectors and sublattices
# ---------------------------------------------------------------------------


def divisibility(L: Lattice, v: Sequence[int]) -> int:
    """gcd of the pairings of ``v`` with the basis of ``L``."""
    if not any(v):
        raise LatticeError("divisibility of the zero vector is undefined", reason="zero")
    return math.gcd(*matvec(L.gram, v))


def restrict(L: Lattice, basis: Sequence[Sequence[int]], name: str | None = None) -> Lattice:
    """The lattice spanned by ``basis`` (rows of coordinates) with the induced pairing."""
    if not basis:
        return Lattice.zero()
    gram = matmul(matmul(basis, L.gram), transpose(basis))
    return Lattice(_freeze(gram), name=name)


def _check_independent(L: Lattice, S: Sequence[Sequence[int]]) -> None:
    if any(len(v) != L.rank for v in S):
        raise LatticeError("vector length does not match the lattice rank", reason="shape")
    if S and rank_int(transpose(S)) != len(S):
        raise LatticeError("sublattice basis is linearly dependent", reason="dependent")


def saturation(L: Lattice, S: Sequence[Sequence[int]]) -> list[LatticeVector]:
    """Basis of the primitive closure ``(Q S) ∩ L``."""
    _check_independent(L, S)
    return [tuple(v) for v in saturation_basis(S, L.rank)]


def is_primitive(L: Lattice, S: Sequence[Sequence[int]]) -> bool:
    _check_independent(L, S)
    if not S:
        return True
    return all(d == 1 for d in elementary_divisors(transpose(S)))


def orthogonal_complement(
    L: Lattice, S: Sequence[Sequence[int]]
) -> tuple[Lattice, list[LatticeVector]]:
    """Complement of the primitive sublattice spanned by ``S`` and its basis in ``L``."""
    _check_independent(L, S)
    if not S:
        return L, [tuple(1 if i == j else 0 for j in range(L.rank)) for i in range(L.rank)]
    if not is_primitive(L, S):
        raise LatticeError("sublattice is not primitive", reason="not_primitive")
    sub_gram = matmul(matmul(S, L.gram), transpose(S))
    if det_int(sub_gram) == 0:
        raise LatticeError("sublattice is degenerate (isotropic part)", reason="degenerate")
    pairing_rows = matmul(S, L.gram)
    basis = [tuple(v) for v in kernel_basis(pairing_rows)]
    return restrict(L, basis), basis


def short_vectors(L: Lattice, norms: Iterable[int]) -> list[LatticeVector]:
    """All vectors of a negative definite ``L`` whose square lies in ``norms``.

    Both ``v`` and ``-v`` are returned; the list is sorted lexicographically.
    """
    wanted = set(norms)
    if L.rank == 0 or not wanted:
        return []
    if not L.is_negative_definite:
        raise LatticeError("short_vectors needs a negative definite lattice", reason="indefinite")
    if any(x >= 0 or x % 2 for x in wanted):
        raise LatticeError("norms must be negative even integers", reason="range")
    bound = -min(wanted)
    found = enumerate_positive([[-x for x in row] for row in L.gram], bound)
    return sorted(v for v in found if -L.norm(v) in {-x for x in wanted})


def enumerate_positive(Q: Sequence[Sequence[int]], bound: int) -> list[LatticeVector]:
    """Nonzero ``x`` with ``x^T Q x <= bound`` for a positive definite integer ``Q``.

    Fincke-Pohst enumeration over the rational square-completion of ``Q``;
    every comparison is exact.
    """
    n = len(Q)
    q = [[Fraction(x) for x in row] for row in Q]
    for i in range(n):
        for j in range(i + 1, n):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / q[i][i]
        for k in range(i + 1, n):
            for m in range(k, n):
                q[k][m] -= q[k][i] * q[i][m]
    out: list[LatticeVector] = []
    x = [0] * n
    limit = Fraction(bound)

    def descend(i: int, remaining: Fraction) -> None:
        center = sum((q[i][j] * x[j] for j in range(i + 1, n)), Fraction(0))
        radius = math.isqrt(math.floor(remaining / q[i][i])) + 1
        lo = math.floor(-center) - radius
        hi = math.ceil(-center) + radius
        for xi in range(lo, hi + 1):
            t = xi + center
            used = q[i][i] * t * t
            if used > remaining:
                continue
            x[i] = xi
            if i == 0:
                if any(x):
                    out.append(tuple(x))
            else:
                descend(i - 1, remaining - used)
        x[i] = 0

    descend(n - 1, limit)
    return out


def lll_reduce(
    L: Lattice, delta: Fraction = Fraction(99, 100)
) -> tuple[Lattice, list[LatticeVector]]:
    """LLL-reduce a definite lattice in exact arithmetic.

    Returns the reduced lattice and its basis (rows in ``L``'s coordinates).
    """
    n = L.rank
    if n == 0:
        return L, []
    if not L.is_definite:
        raise LatticeError("LLL reduction needs a definite lattice", reason="indefinite")
    sign = 1 if L.is_positive_definite else -1
    G = [[sign * x for x in row] for row in L.gram]
    B = [[int(i == j) for j in range(n)] for i in range(n)]

    def gram_schmidt():
        cur = matmul(matmul(B, G), transpose(B))
        mu = [[Fraction(0)] * n for _ in range(n)]
        norms = [Fraction(0)] * n
        for i in range(n):
            for j in range(i):
                mu[i][j] = (Fraction(cur[i][j]) - sum(
                    (mu[j][k] * mu[i][k] * norms[k] for k in range(j)), Fraction(0))) / norms[j]
            norms[i] = cur[i][i] - sum((mu[i][k] ** 2 * norms[k] for k in range(i)), Fraction(0))
        return mu, norms

    k = 1
    while k < n:
        mu, norms = gram_schmidt()
        for j in range(k - 1, -1, -1):
            r = round(mu[k][j])
            if r:
                B[k] = [a - r * b for a, b in zip(B[k], B[j], strict=True)]
                mu, norms = gram_schmidt()
        if norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            B[k], B[k - 1] = B[k - 1], B[k]
            k = max(k - 1, 1)
    basis = [tuple(row) for row in B]
    return restrict(L, basis, name=L.name), basis


def minimum(L: Lattice) -> int:
    """Largest nonzero square of a negative definite lattice (closest to zero)."""
    diag = max(row[i] for i, row in enumerate(L.gram))
    vecs = enumerate_positive([[-x for x in row] for row in L.gram], -diag)
    return max(L.norm(v) for v in vecs)


__all__ = [
    "A",
    "D",
    "E",
    "Gram",
    "Lattice",
    "LatticeVector",
    "U",
    "bL",
    "bLambda",
    "bR",
    "btA",
    "determinant",
    "direct_sum",
    "divisibility",
    "enumerate_positive",
    "is_primitive",
    "lll_reduce",
    "make_lattice",
    "minimum",
    "orthogonal_basis",
    "orthogonal_complement",
    "rank1",
    "rescale",
    "restrict",
    "saturation",
    "short_vectors",
    "signature",
]
