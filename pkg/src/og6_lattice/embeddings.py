"""Primitive embeddings of even lattices.

A primitive embedding ``M -> L`` with complement ``N`` is described by a
gluing subgroup ``H ⊂ M^#`` and an anti-isometry ``γ: H -> N^#``; then
``L / (M + N)`` is the graph of ``γ`` and ``L^# = Γ^perp / Γ``. Dually, the
embedding subgroup ``K ⊂ L^#`` is isometric to ``K' = H^perp ⊂ M^#`` and the
complement has discriminant form ``Ξ^perp / Ξ`` for the graph ``Ξ`` of that
isometry inside ``L^# + M^#(-1)``.

Two layers live here:

* :class:`EmbeddingType` is the genus-level datum ``(K, K', ξ)`` together
  with the complement genus. It decides existence questions for hosts that
  are unique in their genus.
* :class:`PrimitiveEmbedding` is an explicit embedding with an image basis
  in a concrete host lattice.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from sympy import divisors

from . import fqf
from .config import settings
from .errors import BudgetExceededError, EmbeddingError, FqfError, LatticeError
from .genus import GenusSymbol, representatives
from .isometries import disc_action, isometry_group
from .lattice import (
    Lattice,
    LatticeVector,
    bL,
    direct_sum,
    divisibility,
    enumerate_positive,
    is_primitive,
    lll_reduce,
    orthogonal_complement,
    restrict,
    short_vectors,
)
from .linalg import (
    coordinates_in_basis,
    elementary_divisors,
    integer_inverse,
    matmul,
    matvec,
    rational_inverse,
    span_basis,
)

log = logging.getLogger(__name__)

WALL_NORMS = (-2, -4)


@lru_cache(maxsize=1024)
def _disc(L: Lattice) -> fqf.FiniteQuadraticForm:
    return fqf.discriminant_group(L)


def _dual_class(q: fqf.FiniteQuadraticForm, M: Lattice, pairings: Sequence[int]) -> fqf.Element:
    """Class in ``M^#`` of the dual vector with the given pairings against ``M``'s basis."""
    if q.ngens == 0:
        return ()
    y = matvec(_gram_inverse(M), [Fraction(x) for x in pairings])
    return q.project(y)


@lru_cache(maxsize=1024)
def _gram_inverse(M: Lattice):
    return rational_inverse(M.gram)


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EmbeddingType:
    """Genus-level description of a primitive embedding ``source -> host``.

    ``xi`` maps ``counterpart ⊂ source^#`` isometrically onto
    ``embedding_subgroup ⊂ host^#``; ``gluing_subgroup`` is ``counterpart^perp``.
    """

    source: Lattice
    host: Lattice
    embedding_subgroup: fqf.Subgroup
    counterpart: fqf.Subgroup
    xi: fqf.FqfMap
    gluing_subgroup: fqf.Subgroup
    complement_genus: GenusSymbol

    @property
    def gluing_index(self) -> int:
        return len(self.gluing_subgroup)

    @property
    def embedding_index(self) -> int:
        return len(self.embedding_subgroup)

    @property
    def is_full_gluing(self) -> bool:
        return self.gluing_index == abs(self.source.det) if self.source.rank else True

    def __str__(self) -> str:
        return (f"{self.source} -> {self.host}: h={self.gluing_index}, "
                f"k={self.embedding_index}, complement {self.complement_genus}")


@dataclass(frozen=True, eq=False)
class PrimitiveEmbedding:
    """An explicit primitive embedding.

    ``image`` holds the images of ``source``'s basis and ``complement_basis``
    the basis of the orthogonal complement, both as rows in ``host``
    coordinates. ``gluing_map`` is an anti-isometry from ``gluing_subgroup``
    into the complement's discriminant form.
    """

    source: Lattice
    host: Lattice
    image: tuple[LatticeVector, ...]
    complement: Lattice
    complement_basis: tuple[LatticeVector, ...]
    gluing_subgroup: fqf.Subgroup
    gluing_map: fqf.FqfMap

    @property
    def gluing_index(self) -> int:
        return len(self.gluing_subgroup)

    @property
    def embedding_index(self) -> int:
        return abs(self.source.det) // self.gluing_index if self.source.rank else 1

    @property
    def is_full_gluing(self) -> bool:
        return self.embedding_index == 1

    def identities_hold(self) -> bool:
        h, k = self.gluing_index, self.embedding_index
        dM, dN, dL = abs(self.source.det), abs(self.complement.det), abs(self.host.det)
        if self.source.rank == 0:
            dM = 1
        if self.complement.rank == 0:
            dN = 1
        return h * h * dL == dM * dN and k * k * dN == dL * dM and h * k == dM

    def reconstructs_host(self) -> bool:
        """``Γ^perp / Γ`` is isomorphic to the host's discriminant form."""
        form = fqf.graph_quotient(_disc(self.source), _disc(self.complement), self.gluing_map,
                                  anti=True)
        return fqf.is_isomorphic(form, _disc(self.host))

    def to_dict(self) -> dict:
        gens = fqf.generators_of(_disc(self.source), self.gluing_subgroup)
        return {
            "M_gram": [list(r) for r in self.source.gram],
            "host_gram": [list(r) for r in self.host.gram],
            "image_basis": [list(v) for v in self.image],
            "complement_gram": [list(r) for r in self.complement.gram],
            "H_generators": [list(g) for g in gens],
            "gamma": [[list(g), list(self.gluing_map.apply(g))] for g in gens],
            "h": self.gluing_index,
            "k": self.embedding_index,
        }


# ---------------------------------------------------------------------------
# Genus-level embeddings
# ---------------------------------------------------------------------------


@lru_cache(maxsize=256)
def disc_image(M: Lattice) -> tuple[fqf.FqfMap, ...]:
    """The image of ``O(M)`` in ``O(M^#)`` for definite ``M``; ``O(M^#)`` otherwise."""
    q = _disc(M)
    if not M.is_definite:
        return tuple(fqf.orthogonal_group(q))
    seen: dict[tuple, fqf.FqfMap] = {}
    for g in isometry_group(M):
        action = disc_action(g, q)
        seen.setdefault(action.images, action)
    return tuple(seen[k] for k in sorted(seen))


def _check_ranks(M: Lattice, L: Lattice) -> None:
    if M.rank > L.rank:
        raise EmbeddingError(f"{M} has larger rank than {L}")


@lru_cache(maxsize=512)
def embedding_types(M: Lattice, L: Lattice, *, up_to_source: bool = False) -> tuple:
    """Every :class:`EmbeddingType` of ``M`` into ``L`` with a nonempty complement genus.

    Embedding subgroups are taken up to ``O(L^#)``; with ``up_to_source`` the
    counterparts are also reduced modulo the image of ``O(M)``. ``L`` is
    assumed unique in its genus with ``O(L) -> O(L^#)`` onto.
    """
    _check_ranks(M, L)
    s_plus = L.signature[0] - M.signature[0]
    s_minus = L.signature[1] - M.signature[1]
    if s_plus < 0 or s_minus < 0:
        return ()
    qL, qM = _disc(L), _disc(M)
    host_subs = fqf.orbit_representatives(fqf.subgroups(qL), fqf.orthogonal_group(qL))
    source_subs = fqf.subgroups(qM, max_size=qL.order, exponent=qL.exponent or 1)
    if up_to_source:
        source_subs = fqf.orbit_representatives(source_subs, disc_image(M))
    found: list[EmbeddingType] = []
    for K in host_subs:
        for Kp in source_subs:
            if len(Kp) != len(K):
                continue
            forms: list[fqf.FiniteQuadraticForm] = []
            for xi in fqf.subgroup_isometries(qM, Kp, qL, K):
                form = fqf.negate(fqf.graph_quotient(qM, qL, xi, anti=False))
                if not fqf.genus_exists(s_plus, s_minus, form):
                    continue
                if any(fqf.is_isomorphic(form, f) for f in forms):
                    continue
                forms.append(form)
                found.append(EmbeddingType(
                    source=M,
                    host=L,
                    embedding_subgroup=K,
                    counterpart=Kp,
                    xi=xi,
                    gluing_subgroup=fqf.orthogonal(qM, Kp),
                    complement_genus=GenusSymbol((s_plus, s_minus), form),
                ))
    log.debug("%s -> %s: %d embedding types", M, L, len(found))
    return tuple(found)


# ---------------------------------------------------------------------------
# Explicit embeddings
# ---------------------------------------------------------------------------


def embedding_from_basis(
    L: Lattice,
    basis: Sequence[Sequence[int]],
    complement_basis: Sequence[Sequence[int]] | None = None,
) -> PrimitiveEmbedding:
    """The embedding of the sublattice spanned by ``basis`` with its gluing data."""
    rows = [tuple(int(x) for x in v) for v in basis]
    if not is_primitive(L, rows):
        raise EmbeddingError("sublattice is not primitive")
    M = restrict(L, rows)
    if complement_basis is None:
        N, cb = orthogonal_complement(L, rows)
    else:
        cb = [tuple(int(x) for x in v) for v in complement_basis]
        N = restrict(L, cb)
    qM, qN = _disc(M), _disc(N)
    pair_M = matmul(rows, L.gram)
    pair_N = matmul(cb, L.gram) if cb else []
    total = fqf.orthogonal_sum(qM, qN)
    glue = []
    for i in range(L.rank):
        a = _dual_class(qM, M, [r[i] for r in pair_M])
        b = _dual_class(qN, N, [r[i] for r in pair_N]) if cb else ()
        glue.append(a + b)
    m = qM.ngens
    table = {x[:m]: x[m:] for x in fqf.span(total, glue)}
    H = frozenset(table)
    gens = fqf.generators_of(qM, H)
    gamma = fqf.FqfMap(qM, qN, tuple(table[g] for g in gens), tuple(gens))
    return PrimitiveEmbedding(
        source=M,
        host=L,
        image=tuple(rows),
        complement=N,
        complement_basis=tuple(tuple(v) for v in cb),
        gluing_subgroup=H,
        gluing_map=gamma,
    )


def overlattice_from_gluing(
    M: Lattice, N: Lattice, H: fqf.Subgroup, gamma: fqf.FqfMap
) -> tuple[Lattice, PrimitiveEmbedding, PrimitiveEmbedding]:
    """The overlattice of ``M + N`` glued along the graph of ``gamma``.

    Returns the overlattice and the embeddings of ``M`` and ``N`` into it.
    """
    qM, qN = _disc(M), _disc(N)
    for x in H:
        if qN.q(gamma.apply(x)) != (-qM.q(x)) % 2:
            raise FqfError("the graph of the gluing map is not isotropic")
    n = M.rank + N.rank
    G = direct_sum([M, N]).gram if n else ()
    glue = []
    for g in fqf.generators_of(qM, H):
        glue.append(list(qM.lift(g)) + list(qN.lift(gamma.apply(g))))
    den = math.lcm(1, *(x.denominator for v in glue for x in v))
    scaled = [[den * int(i == j) for j in range(n)] for i in range(n)]
    scaled += [[int(den * x) for x in v] for v in glue]
    B = span_basis(scaled, n)
    gram = matmul(matmul(B, G), [list(c) for c in zip(*B, strict=True)]) if n else []
    gram = [[Fraction(x, den * den) for x in row] for row in gram]
    if any(x.denominator != 1 for row in gram for x in row):
        raise FqfError("glued form is not integral")
    if any(gram[i][i] % 2 for i in range(n)):
        raise LatticeError("glued lattice is odd", reason="odd")
    L = Lattice(tuple(tuple(int(x) for x in row) for row in gram))
    coords = [coordinates_in_basis(B, [den * int(i == j) for j in range(n)]) for i in range(n)]
    coords = [[int(c) for c in v] for v in coords]
    m = M.rank
    emb_M = embedding_from_basis(L, coords[:m], coords[m:])
    emb_N = embedding_from_basis(L, coords[m:], coords[:m])
    return L, emb_M, emb_N


def find_gluing(
    M: Lattice, N: Lattice, H: fqf.Subgroup, qL: fqf.FiniteQuadraticForm
) -> fqf.FqfMap | None:
    """An anti-isometry ``H -> N^#`` whose graph quotient is isomorphic to ``qL``."""
    qM, qN = _disc(M), _disc(N)
    for HN in fqf.subgroups(qN, max_size=len(H)):
        if len(HN) != len(H):
            continue
        for gamma in fqf.subgroup_isometries(qM, H, qN, HN, anti=True):
            if fqf.is_isomorphic(fqf.graph_quotient(qM, qN, gamma, anti=True), qL):
                return gamma
    return None


def primitive_embeddings(
    M: Lattice, L: Lattice, *, up_to_source: bool = False
) -> list[PrimitiveEmbedding]:
    """Explicit embeddings ``M -> L'`` with ``L'`` in the genus of ``L``.

    One embedding per embedding type and complement class; ``L`` is assumed
    unique in its genus, so each ``L'`` is isometric to ``L``.
    """
    qL = _disc(L)
    out: list[PrimitiveEmbedding] = []
    for t in embedding_types(M, L, up_to_source=up_to_source):
        for N in representatives(t.complement_genus):
            gamma = find_gluing(M, N, t.gluing_subgroup, qL)
            if gamma is None:
                log.debug("no gluing of %s with %s over H of order %d", M, N, t.gluing_index)
                continue
            _, emb, _ = overlattice_from_gluing(M, N, t.gluing_subgroup, gamma)
            out.append(emb)
    return out


def primitive_copies(
    M: Lattice, L: Lattice, *, first_only: bool = False
) -> list[list[LatticeVector]]:
    """Primitive sublattices of a definite ``L`` isometric to ``M``.

    Each result lists the images of ``M``'s basis as rows in ``L``'s coordinates.
    """
    _check_ranks(M, L)
    if M.rank == 0:
        return [[]]
    if not (M.is_negative_definite and L.is_negative_definite
            or M.is_positive_definite and L.is_positive_definite):
        raise EmbeddingError("explicit sublattice search needs definite lattices of equal sign")
    sign = -1 if L.is_negative_definite else 1
    R, T = lll_reduce(M)
    QM = [[sign * x for x in row] for row in R.gram]
    QL = [[sign * x for x in row] for row in L.gram]
    vecs = enumerate_positive(QL, max(QM[i][i] for i in range(M.rank)))
    if not vecs:
        return []
    V = np.array(vecs, dtype=np.int64)
    P = V @ np.array(QL, dtype=np.int64) @ V.T
    norms = np.diag(P)
    candidates = [np.flatnonzero(norms == QM[i][i]) for i in range(M.rank)]
    Tinv = integer_inverse([list(r) for r in T])
    limit = settings.search_node_budget
    nodes = 0
    chosen: list[int] = []
    found: list[list[LatticeVector]] = []

    def extend(i: int) -> bool:
        nonlocal nodes
        if i == M.rank:
            rows = [vecs[k] for k in chosen]
            if is_primitive(L, rows):
                found.append([tuple(r) for r in matmul(Tinv, rows)])
                return first_only
            return False
        for k in candidates[i]:
            nodes += 1
            if nodes > limit:
                raise BudgetExceededError("sublattice search nodes", limit)
            if any(P[k, chosen[j]] != QM[i][j] for j in range(i)):
                continue
            chosen.append(int(k))
            if extend(i + 1):
                return True
            chosen.pop()
        return False

    extend(0)
    return found


def exists_primitive_embedding(M: Lattice, L: Lattice) -> bool:
    _check_ranks(M, L)
    if M.rank == 0:
        return True
    if L.is_definite:
        return bool(primitive_copies(M, L, first_only=True))
    return bool(embedding_types(M, L))


def exists_full_gluing_embedding(M: Lattice, L: Lattice) -> bool:
    """A primitive embedding whose gluing subgroup is all of ``M^#``."""
    _check_ranks(M, L)
    if M.rank == 0:
        return True
    if L.is_definite:
        return any(embedding_from_basis(L, rows).is_full_gluing
                   for rows in primitive_copies(M, L))
    return any(t.is_full_gluing for t in embedding_types(M, L))


# ---------------------------------------------------------------------------
# Divisibility and walls
# ---------------------------------------------------------------------------


def host_divisibility(emb: EmbeddingType | PrimitiveEmbedding, v: Sequence[int]) -> int:
    """Divisibility in the host of ``v ∈ M``: the largest ``d`` with ``v/d`` in ``H^perp``."""
    M = emb.source
    q = _disc(M)
    perp = fqf.orthogonal(q, emb.gluing_subgroup)
    return max(int(d) for d in divisors(divisibility(M, v))
               if d == 1 or q.project([Fraction(x, d) for x in v]) in perp)


def wall_candidates(N: Lattice) -> list[LatticeVector]:
    """``C(N)``: the vectors of square ``-2`` or ``-4``."""
    return short_vectors(N, WALL_NORMS) if N.rank else []


def wall_vectors(N: Lattice, H: fqf.Subgroup) -> list[LatticeVector]:
    """Vectors of ``C(N)`` whose half lies in ``H^perp``, i.e. of even host divisibility."""
    if N.rank == 0:
        return []
    q = _disc(N)
    perp = fqf.orthogonal(q, H)
    out = []
    for v in wall_candidates(N):
        if divisibility(N, v) % 2 == 0 and q.project([Fraction(x, 2) for x in v]) in perp:
            out.append(v)
    return out


def _check_og6_host(emb: EmbeddingType | PrimitiveEmbedding) -> None:
    host = emb.host
    if host.signature != (3, 5) or abs(host.det) != 4:
        raise EmbeddingError(f"host {host} is not in the genus of 3U+2[-2]")
    if not emb.source.is_negative_definite and emb.source.rank:
        raise EmbeddingError(f"{emb.source} is not negative definite")


def wall_intersection_pex(emb: EmbeddingType | PrimitiveEmbedding) -> bool:
    """Whether ``N`` meets a wall ``w^2 = -2`` or ``-4`` with host divisibility 2."""
    _check_og6_host(emb)
    return bool(wall_vectors(emb.source, emb.gluing_subgroup))


def wall_intersection_full(emb: EmbeddingType | PrimitiveEmbedding) -> bool:
    """The exceptional walls plus every vector of square ``-2``."""
    _check_og6_host(emb)
    if emb.source.rank and short_vectors(emb.source, [-2]):
        return True
    return bool(wall_vectors(emb.source, emb.gluing_subgroup))


def satisfies_divisibility_hypothesis(N: Lattice) -> bool:
    """Every class of ``N^#`` with ``q`` in ``{3/2, 1}`` is ``v/2`` for some ``v`` in ``C(N)``."""
    if N.rank == 0:
        return True
    q = _disc(N)
    targets = {x for x, value in zip(q.elements, q.q_values, strict=True)
               if value in (Fraction(3, 2), Fraction(1))}
    if not targets:
        return True
    reached = {q.project([Fraction(x, 2) for x in v])
               for v in wall_candidates(N) if divisibility(N, v) % 2 == 0}
    return targets <= reached


# ---------------------------------------------------------------------------
# Explicit embeddings into 3U + 2[-2]
# ---------------------------------------------------------------------------


def _box_vectors(box: int) -> np.ndarray:
    """All ``(a0, a1, a2, c1, c2)`` with entries in ``[-box, box]``."""
    return np.array(list(itertools.product(range(-box, box + 1), repeat=5)), dtype=np.int64)


def _assemble(C: np.ndarray, g: np.ndarray, ac: np.ndarray) -> np.ndarray:
    """Coordinates in ``e1, f1, e2, f2, e3, f3, c1, c2`` of the vectors pairing as ``g``."""
    a, c = ac[:, :3], ac[:, 3:]
    b = g[None, :] - a @ C.T
    out = np.zeros((len(ac), 8), dtype=np.int64)
    out[:, 0:6:2] = a
    out[:, 1:6:2] = b
    out[:, 6:] = c
    return out


def _full_gluing_in_box(G: list[list[int]], box: int) -> list[list[int]] | None:
    """Vectors of 3U + 2[-2] with Gram ``G`` whose pairing map onto ``Z^r`` is onto."""
    r = len(G)
    host = bL()
    GL = np.array(host.gram, dtype=np.int64)
    k = min(r, 3)
    C = np.zeros((3, 3), dtype=np.int64)
    for i in range(k):
        C[i, i] = G[i][i] // 2
        for j in range(i + 1, k):
            C[i, j] = G[i][j]
    head = np.zeros((k, 8), dtype=np.int64)
    for i in range(k):
        head[i, 2 * i] = 1
        head[i, 1:6:2] = C[i]
    if r == k:
        tails: list[np.ndarray] = [np.zeros((1, 0), dtype=np.int64)]
    else:
        boxed = _box_vectors(box)
        tails = []
        for t in range(k, r):
            g = np.array([G[i][t] for i in range(3)], dtype=np.int64)
            cand = _assemble(C, g, boxed)
            norms = np.einsum("ij,jk,ik->i", cand, GL, cand)
            tails.append(cand[norms == G[t][t]])
            if not len(tails[-1]):
                return None
    options = (
        [np.zeros((0, 8), dtype=np.int64)]
        if r == k
        else _pairs(tails, GL, G, k)
    )
    for extra in options:
        rows = np.vstack([head, extra]) if len(extra) else head
        pairing = [[int(x) for x in row] for row in rows @ GL]
        if elementary_divisors(pairing) == [1] * r:
            return [[int(x) for x in row] for row in rows]
    return None


def _pairs(tails: list[np.ndarray], GL: np.ndarray, G: list[list[int]], k: int):
    if len(tails) == 1:
        for v in tails[0]:
            yield v[None, :]
        return
    first, second = tails
    cross = first @ GL @ second.T
    for i, j in zip(*np.nonzero(cross == G[k][k + 1]), strict=True):
        yield np.vstack([first[i], second[j]])


@lru_cache(maxsize=128)
def standard_full_gluing_embedding(N: Lattice, *, box: int | None = None) -> PrimitiveEmbedding:
    """A full-gluing primitive embedding of a negative definite ``N`` into 3U + 2[-2].

    Coordinates refer to the basis ``e1, f1, e2, f2, e3, f3, c1, c2``. The first
    three basis vectors of (a reduced basis of) ``N`` go to ``e_i + sum c_ij f_j``;
    the others are searched in a coordinate box.
    """
    host = bL()
    if N.rank == 0:
        return embedding_from_basis(host, [])
    if N.rank > 5 or not N.is_negative_definite:
        raise EmbeddingError(f"{N} is not negative definite of rank at most 5")
    size = settings.embedding_box if box is None else box
    R, T = lll_reduce(N)
    Tinv = integer_inverse([list(r) for r in T])
    r = N.rank
    for first in itertools.combinations(range(r), min(r, 3)):
        order = list(first) + [i for i in range(r) if i not in first]
        G = [[R.gram[i][j] for j in order] for i in order]
        rows = _full_gluing_in_box(G, size)
        if rows is None:
            continue
        reduced = [None] * r
        for pos, idx in enumerate(order):
            reduced[idx] = rows[pos]
        image = matmul(Tinv, reduced)
        emb = embedding_from_basis(host, image)
        if emb.source.gram != N.gram or not emb.is_full_gluing:
            raise EmbeddingError(f"box search produced an inconsistent embedding of {N}")
        log.debug("standard embedding of %s: %s", N, image)
        return emb
    raise EmbeddingError(f"no full-gluing embedding of {N} found in the box of size {size}")


__all__ = [
    "EmbeddingType",
    "PrimitiveEmbedding",
    "WALL_NORMS",
    "disc_image",
    "embedding_from_basis",
    "embedding_types",
    "exists_full_gluing_embedding",
    "exists_primitive_embedding",
    "find_gluing",
    "host_divisibility",
    "overlattice_from_gluing",
    "primitive_copies",
    "primitive_embeddings",
    "satisfies_divisibility_hypothesis",
    "standard_full_gluing_embedding",
    "wall_candidates",
    "wall_intersection_full",
    "wall_intersection_pex",
    "wall_vectors",
]
