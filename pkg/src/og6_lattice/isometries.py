"""Isometries of lattices: groups, orders, fixed lattices, discriminant actions.

Matrices act on column coordinate vectors, so an integer matrix ``M`` is an
isometry of ``L`` exactly when ``M^T G M = G``. Finite groups of definite
lattices are enumerated by backtracking: the images of the basis vectors
are chosen among vectors of the right square, keeping all pairings with the
images chosen so far.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from . import fqf
from .config import settings
from .errors import BudgetExceededError, IsometryError, LatticeError
from .lattice import (
    Lattice,
    LatticeVector,
    enumerate_positive,
    lll_reduce,
    orthogonal_basis,
    orthogonal_complement,
    restrict,
)
from .linalg import (
    det_int,
    identity,
    integer_inverse,
    kernel_basis,
    matmul,
    rational_inverse,
    transpose,
)

log = logging.getLogger(__name__)

Matrix = tuple[tuple[int, ...], ...]


def _freeze(M: Sequence[Sequence[int]]) -> Matrix:
    return tuple(tuple(int(x) for x in row) for row in M)


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Isometry:
    """An integral isometry of ``lattice`` acting on column coordinates."""

    lattice: Lattice
    matrix: Matrix

    def __post_init__(self) -> None:
        n = self.lattice.rank
        if len(self.matrix) != n or any(len(row) != n for row in self.matrix):
            raise IsometryError("matrix shape does not match the lattice rank")
        G = self.lattice.gram
        if _freeze(matmul(matmul(transpose(self.matrix), G), self.matrix)) != G:
            raise IsometryError("matrix does not preserve the Gram matrix")

    @cached_property
    def array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=np.int64).reshape(self.lattice.rank,
                                                             self.lattice.rank)

    @property
    def det(self) -> int:
        return det_int(self.matrix)

    def is_identity(self) -> bool:
        return self.matrix == _freeze(identity(self.lattice.rank))

    def apply(self, v: Sequence) -> tuple:
        return tuple(sum(a * x for a, x in zip(row, v, strict=True)) for row in self.matrix)

    def __matmul__(self, other: Isometry) -> Isometry:
        return Isometry(self.lattice, _freeze(matmul(self.matrix, other.matrix)))

    def power(self, k: int) -> Isometry:
        result = identity_isometry(self.lattice)
        base = self
        if k < 0:
            base = self.inverse()
            k = -k
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def inverse(self) -> Isometry:
        return Isometry(self.lattice, _freeze(integer_inverse(self.matrix)))

    def to_dict(self) -> dict:
        return {
            "gram": [list(row) for row in self.lattice.gram],
            "matrix": [list(row) for row in self.matrix],
        }

    @classmethod
    def from_dict(cls, data: dict) -> Isometry:
        return cls(Lattice(_freeze(data["gram"])), _freeze(data["matrix"]))


def identity_isometry(L: Lattice) -> Isometry:
    return Isometry(L, _freeze(identity(L.rank)))


def minus_identity(L: Lattice) -> Isometry:
    return Isometry(L, _freeze([[-x for x in row] for row in identity(L.rank)]))


@dataclass(frozen=True)
class IsometryConstraints:
    """Filter for :func:`search_isometry`.

    ``disc`` is ``"unconstrained"``, ``"trivial"`` (on all of ``L^#``),
    ``"trivial_on_p"`` (on the ``p``-part) or ``"trivial_on_subgroup"``.
    """

    order: int
    fixed_rank: int | None = None
    disc: str = "unconstrained"
    p: int | None = None
    subgroup: fqf.Subgroup | None = None

    def __post_init__(self) -> None:
        if self.order < 1:
            raise IsometryError(f"order must be positive, got {self.order}")
        if self.disc not in ("unconstrained", "trivial", "trivial_on_p", "trivial_on_subgroup"):
            raise IsometryError(f"unknown disc constraint {self.disc!r}")
        if self.disc == "trivial_on_p" and self.p is None:
            raise IsometryError("trivial_on_p needs a prime p")
        if self.disc == "trivial_on_subgroup" and self.subgroup is None:
            raise IsometryError("trivial_on_subgroup needs a subgroup")


# ---------------------------------------------------------------------------
# Backtracking
# ---------------------------------------------------------------------------


def _vectors_by_norm(Q: Sequence[Sequence[int]], bound: int) -> dict[int, list[LatticeVector]]:
    buckets: dict[int, list[LatticeVector]] = defaultdict(list)
    n = len(Q)
    for v in enumerate_positive(Q, bound):
        norm = sum(v[i] * Q[i][j] * v[j] for i in range(n) for j in range(n))
        buckets[norm].append(v)
    for vs in buckets.values():
        vs.sort()
    return buckets


def _positive_gram(L: Lattice) -> list[list[int]]:
    sign = 1 if L.is_positive_definite else -1
    return [[sign * x for x in row] for row in L.gram]


def _backtrack(
    Q1: Sequence[Sequence[int]],
    Q2: Sequence[Sequence[int]],
    *,
    first_only: bool,
    limit: int,
) -> list[list[list[int]]]:
    """Matrices ``M`` (columns = images of basis vectors) with ``M^T Q2 M = Q1``."""
    n = len(Q1)
    buckets = _vectors_by_norm(Q2, max(Q1[i][i] for i in range(n)))
    candidates = [buckets.get(Q1[i][i], []) for i in range(n)]
    if any(not c for c in candidates):
        return []
    Q2a = np.array(Q2, dtype=np.int64)
    arrays = [np.array(c, dtype=np.int64) for c in candidates]
    pair_rows = [a @ Q2a for a in arrays]
    node_limit = settings.search_node_budget
    nodes = 0
    chosen: list[np.ndarray] = []
    found: list[list[list[int]]] = []

    def extend(i: int) -> bool:
        nonlocal nodes
        if i == n:
            M = np.stack(chosen, axis=1)
            found.append(M.tolist())
            if len(found) > limit:
                raise BudgetExceededError("isometry group", limit, len(found))
            return first_only
        mask = np.ones(len(arrays[i]), dtype=bool)
        for j, w in enumerate(chosen):
            mask &= pair_rows[i] @ w == Q1[i][j]
        for idx in np.flatnonzero(mask):
            nodes += 1
            if nodes > node_limit:
                raise BudgetExceededError("isometry search nodes", node_limit)
            chosen.append(arrays[i][idx])
            if extend(i + 1):
                return True
            chosen.pop()
        return False

    extend(0)
    return found


def _conjugate_back(Tt: np.ndarray, Tt_inv: np.ndarray, Mred: Sequence[Sequence[int]]) -> Matrix:
    """Matrix in original coordinates of an automorphism given in reduced coordinates."""
    return _freeze((Tt @ np.array(Mred, dtype=np.int64) @ Tt_inv).tolist())


def isometry_group(N: Lattice, *, budget: int | None = None) -> list[Isometry]:
    """The finite group ``O(N)`` of a definite lattice; identity first."""
    limit = settings.group_budget if budget is None else budget
    return list(_isometry_group(N, limit))


@lru_cache(maxsize=512)
def _isometry_group(N: Lattice, limit: int) -> tuple[Isometry, ...]:
    if N.rank == 0:
        return (identity_isometry(N),)
    if not N.is_definite:
        raise IsometryError(f"{N} is indefinite; its isometry group is not enumerated")
    R, T = lll_reduce(N)
    Q = _positive_gram(R)
    mats = _backtrack(Q, Q, first_only=False, limit=limit)
    Tt = np.array(transpose(T), dtype=np.int64)
    Tt_inv = np.array(integer_inverse(transpose(T)), dtype=np.int64)
    group = [Isometry(N, _conjugate_back(Tt, Tt_inv, M)) for M in mats]
    group.sort(key=lambda g: (not g.is_identity(), g.matrix))
    log.debug("|O(%s)| = %d", N, len(group))
    return tuple(group)


def find_isometry(L1: Lattice, L2: Lattice) -> Matrix | None:
    """A matrix ``M`` with ``M^T G2 M = G1`` (coordinates of ``L1``'s basis in ``L2``)."""
    if L1.rank != L2.rank or L1.det != L2.det or L1.signature != L2.signature:
        return None
    if L1.rank == 0:
        return ()
    if L1.gram == L2.gram:
        return _freeze(identity(L1.rank))
    if not L1.is_definite:
        raise IsometryError("isometry testing is only implemented for definite lattices")
    R1, T1 = lll_reduce(L1)
    R2, T2 = lll_reduce(L2)
    mats = _backtrack(_positive_gram(R1), _positive_gram(R2), first_only=True, limit=1)
    if not mats:
        return None
    # x1_red -> M x1_red in L2-reduced coordinates; translate both sides to originals
    M = matmul(matmul(transpose(T2), mats[0]), integer_inverse(transpose(T1)))
    return _freeze(M)


def are_isometric(L1: Lattice, L2: Lattice) -> bool:
    return find_isometry(L1, L2) is not None


# ---------------------------------------------------------------------------
# Single isometries
# ---------------------------------------------------------------------------


def order_of(g: Isometry, *, cap: int | None = None) -> int:
    limit = settings.order_cap if cap is None else cap
    ident = np.eye(g.lattice.rank, dtype=np.int64)
    power = g.array.copy()
    for k in range(1, limit + 1):
        if np.array_equal(power, ident):
            return k
        power = power @ g.array
    raise IsometryError(f"order exceeds the cap {limit}")


def invariant_sublattice(L: Lattice, gs: Isometry | Iterable[Isometry]) -> list[LatticeVector]:
    """Basis of ``L^G``, the saturated kernel of all ``g - id``."""
    group = [gs] if isinstance(gs, Isometry) else list(gs)
    rows = []
    for g in group:
        for i, row in enumerate(g.matrix):
            rows.append([x - (1 if i == j else 0) for j, x in enumerate(row)])
    if not rows:
        return [tuple(r) for r in identity(L.rank)]
    return [tuple(v) for v in kernel_basis(rows)]


def coinvariant_sublattice(
    L: Lattice, gs: Isometry | Iterable[Isometry]
) -> tuple[Lattice, list[LatticeVector]]:
    """``L_G = (L^G)^perp`` with its basis in ``L``."""
    return orthogonal_complement(L, invariant_sublattice(L, gs))


def invariant_lattice(L: Lattice, gs: Isometry | Iterable[Isometry]) -> Lattice:
    return restrict(L, invariant_sublattice(L, gs))


def fixed_rank(g: Isometry) -> int:
    return len(invariant_sublattice(g.lattice, g))


def disc_action(g: Isometry, q: fqf.FiniteQuadraticForm | None = None) -> fqf.FqfMap:
    """The induced automorphism ``g^#`` of ``L^#``."""
    if q is None:
        q = fqf.discriminant_group(g.lattice)
    if q.ngens == 0:
        return fqf.FqfMap(q, q, ())
    images = tuple(q.project(g.apply(q.lift(x))) for x in q.generators())
    return fqf.FqfMap(q, q, images)


def is_disc_trivial(
    g: Isometry,
    *,
    p: int | None = None,
    subgroup: Iterable[fqf.Element] | None = None,
    q: fqf.FiniteQuadraticForm | None = None,
) -> bool:
    """Whether ``g^#`` fixes all of ``L^#``, its ``p``-part, or a given subgroup."""
    if q is None:
        q = fqf.discriminant_group(g.lattice)
    action = disc_action(g, q)
    if subgroup is not None:
        return all(action.apply(x) == x for x in subgroup)
    if p is not None:
        part = [x for x, o in zip(q.elements, q.element_orders, strict=True)
                if o == p ** _valuation(o, p)]
        return all(action.apply(x) == x for x in part)
    return all(action.apply(x) == x for x in q.generators())


def _valuation(n: int, p: int) -> int:
    v = 0
    while n > 1 and n % p == 0:
        n //= p
        v += 1
    return v


def odd_part(q: fqf.FiniteQuadraticForm) -> fqf.Subgroup:
    return frozenset(x for x, o in zip(q.elements, q.element_orders, strict=True) if o % 2)


def spinor_norm(g: Isometry) -> int:
    """Real spinor norm, ``+1`` on reflections in vectors of negative square.

    Computed as the orientation character of ``g`` on a maximal positive
    definite subspace: the sign of ``det(pi_P ∘ g|_P)``.
    """
    L = g.lattice
    positive = [v for v, n in orthogonal_basis(L) if n > 0]
    if not positive:
        return 1
    denom = 1
    for v in positive:
        for x in v:
            denom = math.lcm(denom, x.denominator)
    P = [[int(x * denom) for x in v] for v in positive]
    images = [list(g.apply(v)) for v in P]
    M = [[L.pair(w, img) for img in images] for w in P]
    return 1 if det_int(M) > 0 else -1


def in_O_plus(g: Isometry) -> bool:
    return spinor_norm(g) == 1


def reflection(L: Lattice, v: Sequence[int]) -> Isometry:
    """``x -> x - 2 (x, v) / v^2 v``; integral when ``v^2`` divides ``2 (v, L)``."""
    vv = L.norm(v)
    if vv == 0:
        raise IsometryError("cannot reflect in an isotropic vector")
    Gv = [sum(L.gram[i][j] * v[j] for j in range(L.rank)) for i in range(L.rank)]
    cols = []
    for k in range(L.rank):
        coeff = 2 * Gv[k]
        if coeff % vv:
            raise IsometryError(f"reflection in {list(v)} is not integral")
        cols.append([int(k == i) - coeff // vv * v[i] for i in range(L.rank)])
    return Isometry(L, _freeze(transpose(cols)))


# ---------------------------------------------------------------------------
# Gluing and search
# ---------------------------------------------------------------------------


def glue_equivariant(
    L: Lattice,
    basis_M: Sequence[Sequence[int]],
    g: Isometry,
    basis_N: Sequence[Sequence[int]],
    h: Isometry,
) -> Isometry | None:
    """Extend ``g ⊕ h`` from ``M ⊕ N`` to ``L``; ``None`` when it is not integral.

    ``basis_M`` and ``basis_N`` are complementary orthogonal sublattices (rows in
    ``L``'s coordinates) on which ``g`` and ``h`` act in those bases.
    """
    if len(basis_M) + len(basis_N) != L.rank:
        raise LatticeError("sublattices do not have complementary ranks", reason="shape")
    P = transpose([list(v) for v in basis_M] + [list(v) for v in basis_N])
    m = len(basis_M)
    block = [[0] * L.rank for _ in range(L.rank)]
    for i in range(m):
        for j in range(m):
            block[i][j] = g.matrix[i][j]
    for i in range(len(basis_N)):
        for j in range(len(basis_N)):
            block[m + i][m + j] = h.matrix[i][j]
    F = matmul(matmul(P, block), rational_inverse(P))
    if any(x.denominator != 1 for row in F for x in row):
        return None
    return Isometry(L, _freeze([[int(x) for x in row] for row in F]))


def _matches(
    g: Isometry, c: IsometryConstraints, q: fqf.FiniteQuadraticForm | None
) -> bool:
    try:
        if order_of(g, cap=c.order) != c.order:
            return False
    except IsometryError:
        return False
    if c.fixed_rank is not None and fixed_rank(g) != c.fixed_rank:
        return False
    if c.disc == "trivial":
        return is_disc_trivial(g, q=q)
    if c.disc == "trivial_on_p":
        return is_disc_trivial(g, p=c.p, q=q)
    if c.disc == "trivial_on_subgroup":
        return is_disc_trivial(g, subgroup=c.subgroup, q=q)
    return True


def search_isometries(
    N: Lattice, constraints: IsometryConstraints, *, budget: int | None = None
) -> list[Isometry]:
    """Every element of ``O(N)`` meeting ``constraints``, in group order."""
    q = fqf.discriminant_group(N) if constraints.disc != "unconstrained" else None
    return [g for g in isometry_group(N, budget=budget) if _matches(g, constraints, q)]


def search_isometry(
    N: Lattice, constraints: IsometryConstraints, *, budget: int | None = None
) -> Isometry | None:
    q = fqf.discriminant_group(N) if constraints.disc != "unconstrained" else None
    for g in isometry_group(N, budget=budget):
        if _matches(g, constraints, q):
            return g
    return None


def index_identity_holds(g: Isometry) -> bool:
    """``[L : L^g ⊕ L_g]^2 |det L| = |det L^g| |det L_g|``."""
    L = g.lattice
    inv = invariant_sublattice(L, g)
    co_lat, co = coinvariant_sublattice(L, g)
    inv_lat = restrict(L, inv)
    if not inv or not co:
        return True
    index = abs(det_int(inv + co))
    return index * index * abs(L.det) == abs(inv_lat.det) * abs(co_lat.det)


__all__ = [
    "Isometry",
    "IsometryConstraints",
    "Matrix",
    "are_isometric",
    "coinvariant_sublattice",
    "disc_action",
    "find_isometry",
    "fixed_rank",
    "glue_equivariant",
    "identity_isometry",
    "in_O_plus",
    "index_identity_holds",
    "invariant_lattice",
    "invariant_sublattice",
    "is_disc_trivial",
    "isometry_group",
    "minus_identity",
    "odd_part",
    "order_of",
    "reflection",
    "search_isometries",
    "search_isometry",
    "spinor_norm",
]
