"""Genera, existence criteria and enumeration of definite even lattices.

Two even lattices are in the same genus when their signatures agree and
their discriminant forms are isomorphic. Definite lattices of bounded rank
and determinant are listed exhaustively: every class has a Minkowski
reduced Gram matrix, and those satisfy

* ``a_11 <= a_22 <= ... <= a_nn`` (all even),
* ``|2 a_ij| <= a_ii`` for ``i < j``,
* ``a_11 a_22 ... a_nn <= c_n det`` with ``c_n`` = 1, 4/3, 2, 4, 8 for n <= 5.

Enumerating the (weaker) first two conditions under the product bound and
removing isometric duplicates gives a complete list.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import defaultdict
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from sympy import divisors, multiplicity, primefactors

from . import fqf
from .config import settings
from .errors import BudgetExceededError, LatticeError
from .isometries import are_isometric
from .lattice import U, Gram, Lattice, direct_sum, enumerate_positive, make_lattice
from .linalg import adjugate_int, det_int
from .parser import parse_lattice

log = logging.getLogger(__name__)

_PRODUCT_BOUND = {1: Fraction(1), 2: Fraction(4, 3), 3: Fraction(2), 4: Fraction(4),
                  5: Fraction(8)}


# ---------------------------------------------------------------------------
# Genus symbols
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GenusSymbol:
    """Signature plus discriminant form; equality is :meth:`matches`."""

    signature: tuple[int, int]
    disc_form: fqf.FiniteQuadraticForm

    @property
    def rank(self) -> int:
        return sum(self.signature)

    @property
    def abs_det(self) -> int:
        return self.disc_form.order

    @property
    def is_definite(self) -> bool:
        return 0 in self.signature

    def matches(self, other: GenusSymbol) -> bool:
        return self.signature == other.signature and fqf.is_isomorphic(
            self.disc_form, other.disc_form
        )

    def exists(self) -> bool:
        return fqf.genus_exists(*self.signature, self.disc_form)

    def __str__(self) -> str:
        return f"II_{self.signature} {self.disc_form}"

    def to_dict(self) -> dict:
        return {"signature": list(self.signature), "disc_form": self.disc_form.to_dict()}


def genus_of(L: Lattice) -> GenusSymbol:
    return GenusSymbol(L.signature, fqf.discriminant_group(L))


def same_genus(L1: Lattice, L2: Lattice) -> bool:
    if L1.signature != L2.signature or abs(L1.det) != abs(L2.det):
        return False
    return genus_of(L1).matches(genus_of(L2))


def is_m_elementary(L: Lattice, m: int) -> bool:
    return all(m % d == 0 for d in fqf.discriminant_group(L).invariants)


def two_elementary_invariants(L: Lattice) -> tuple[int, int, int]:
    """``(rank, a, delta)`` of a 2-elementary lattice, with ``|L^#| = 2^a``."""
    q = fqf.discriminant_group(L)
    if any(d != 2 for d in q.invariants):
        raise LatticeError(f"{L} is not 2-elementary", reason="range")
    return L.rank, len(q.invariants), fqf.parity(q)


# ---------------------------------------------------------------------------
# Involutions of unimodular lattices
# ---------------------------------------------------------------------------


def involution_coinvariant_exists(
    l_plus: int, l_minus: int, t_plus: int, t_minus: int, a: int, delta: int
) -> bool:
    """Whether an even unimodular lattice of signature ``(l_plus, l_minus)`` has an
    involution whose coinvariant lattice has signature ``(t_plus, t_minus)`` and a
    2-elementary discriminant of length ``a`` and parity ``delta``.
    """
    if min(l_plus, l_minus, t_plus, t_minus, a) < 0 or delta not in (0, 1):
        raise LatticeError("arguments must be nonnegative and delta in {0, 1}", reason="range")
    if (l_plus - l_minus) % 8:
        raise LatticeError("l_plus - l_minus must be divisible by 8", reason="range")
    t = t_plus + t_minus
    rest = l_plus + l_minus - t
    sig = t_plus - t_minus
    conditions = [
        t_plus <= l_plus and t_minus <= l_minus,
        a <= min(t, rest),
        (t + a) % 2 == 0,
        delta != 0 or sig % 4 == 0,
        a != 0 or (delta == 0 and sig % 8 == 0),
        a != 1 or sig % 8 in (1, 7),
        not (a == 2 and sig % 8 == 4) or delta == 0,
        not (delta == 0 and a in (t, rest)) or sig % 8 == 0,
    ]
    return all(conditions)


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


def _check_bounds(rank: int, det_bound: int) -> None:
    if rank > settings.max_rank:
        raise BudgetExceededError("max_rank", settings.max_rank, rank)
    if det_bound > settings.max_det:
        raise BudgetExceededError("max_det", settings.max_det, det_bound)
    if rank < 1:
        raise LatticeError("rank must be positive", reason="range")


def _off_ranges(diag: list[int]) -> list[range]:
    ranges = [range(-(d // 2), d // 2 + 1) for d in diag]
    if ranges:
        ranges[0] = range(0, diag[0] // 2 + 1)
    return ranges


def _offset_grid(diag: list[int]) -> np.ndarray:
    rows = list(itertools.product(*_off_ranges(diag)))
    return np.array(rows, dtype=np.int64).reshape(len(rows), len(diag))


def _border(delta: int, adj: np.ndarray, cols: np.ndarray,
            corner: int) -> tuple[np.ndarray, np.ndarray]:
    """Determinants and adjugates of ``[[B, x], [x^T, corner]]`` for every row ``x`` of ``cols``.

    With ``y = adj(B) x`` and ``D`` the new determinant, the adjugate has corner
    ``det B``, last column ``-y`` and leading block ``(D adj(B) + y y^T) / det B``.
    """
    k = cols.shape[1]
    y = cols @ adj
    dets = delta * corner - np.einsum("ij,ij->i", cols, y)
    adjs = np.empty((len(cols), k + 1, k + 1), dtype=np.int64)
    adjs[:, :k, :k] = (dets[:, None, None] * adj[None] + y[:, :, None] * y[:, None, :]) // delta
    adjs[:, :k, k] = -y
    adjs[:, k, :k] = -y
    adjs[:, k, k] = delta
    return dets, adjs


def _annihilated(m: int, deltas: np.ndarray, adjs: np.ndarray, ys: np.ndarray,
                 dets: np.ndarray) -> np.ndarray:
    """Mask of bordered matrices ``G`` with ``m adj(G) = 0 mod det G``, i.e. ``m G^-1`` integral.

    Row ``i`` borders a block with determinant ``deltas[i]`` and adjugate
    ``adjs[i]`` by a column ``x`` with ``adj(B) x = ys[i]``.
    """
    keep = (m * deltas) % dets == 0
    keep &= np.all((m * ys) % dets[:, None] == 0, axis=1)
    lead = (dets[:, None, None] * adjs + ys[:, :, None] * ys[:, None, :]) // deltas[:, None, None]
    keep &= np.all(((m * lead) % dets[:, None, None] == 0).reshape(len(dets), -1), axis=1)
    return keep


def _reduced_grams(
    n: int, det_bound: int, allowed: np.ndarray, exponent: int | None = None
) -> list[Gram]:
    """Positive definite even weakly reduced Gram matrices with allowed determinant.

    The first ``n - 2`` rows are chosen one matrix at a time; the last two are
    filled in as numpy batches, carrying exact adjugates so the determinant
    and, with ``exponent`` set, the ``exponent``-elementary test need no
    further elimination.
    """
    cap = _PRODUCT_BOUND[n] * det_bound
    out: list[Gram] = []
    if n == 1:
        return [((d,),) for d in range(2, det_bound + 1, 2)
                if allowed[d] and (exponent is None or exponent % d == 0)]

    def finish(prefixes: np.ndarray, deltas: np.ndarray, adjs: np.ndarray,
               diag: list[int], diag_prod: int) -> None:
        cols = _offset_grid(diag)
        ys = np.einsum("kj,bjl->bkl", cols, adjs)
        s = np.einsum("kj,bkj->bk", cols, ys)
        for c in range(diag[-1], math.floor(cap / diag_prod) + 1, 2):
            det = deltas[:, None] * c - s
            ok = (det > 0) & (det <= det_bound)
            ok[ok] = allowed[det[ok]]
            bi, ki = np.nonzero(ok)
            if exponent is not None and len(bi):
                keep = _annihilated(exponent, deltas[bi], adjs[bi], ys[bi, ki], det[bi, ki])
                bi, ki = bi[keep], ki[keep]
            for b, k in zip(bi.tolist(), ki.tolist(), strict=True):
                col = cols[k].tolist()
                rows = prefixes[b].tolist()
                gram = [r + [col[i]] for i, r in enumerate(rows)] + [col + [c]]
                out.append(tuple(tuple(r) for r in gram))

    def penultimate(block: list[list[int]], diag_prod: int) -> None:
        k = len(block)
        diag = [block[i][i] for i in range(k)]
        cols = _offset_grid(diag)
        delta = det_int(block)
        adj = np.array(adjugate_int(block), dtype=np.int64).reshape(k, k)
        base = np.array(block, dtype=np.int64).reshape(k, k)
        a = diag[-1] if diag else 2
        while diag_prod * a ** 2 <= cap:
            deltas, adjs = _border(delta, adj, cols, a)
            pos = deltas > 0
            if pos.any():
                prefixes = np.empty((int(pos.sum()), k + 1, k + 1), dtype=np.int64)
                prefixes[:, :k, :k] = base
                prefixes[:, :k, k] = cols[pos]
                prefixes[:, k, :k] = cols[pos]
                prefixes[:, k, k] = a
                finish(prefixes, deltas[pos], adjs[pos], diag + [a], diag_prod * a)
            a += 2

    def grow(block: list[list[int]], diag_prod: int) -> None:
        k = len(block)
        if k == n - 2:
            penultimate(block, diag_prod)
            return
        a = block[-1][-1] if block else 2
        diag = [block[i][i] for i in range(k)]
        while diag_prod * a ** (n - k) <= cap:
            for offs in itertools.product(*_off_ranges(diag)):
                new = [row + [offs[i]] for i, row in enumerate(block)] + [list(offs) + [a]]
                if det_int(new) > 0:
                    grow(new, diag_prod * a)
            a += 2

    grow([], 1)
    return out


def _invariant_key(gram: Gram) -> tuple:
    """Cheap isometry invariants of a positive definite Gram matrix."""
    vecs = enumerate_positive(gram, 6)
    n = len(gram)
    counts = [0, 0, 0]
    for v in vecs:
        norm = sum(v[i] * gram[i][j] * v[j] for i in range(n) for j in range(n))
        counts[norm // 2 - 1] += 1
    q = fqf.discriminant_group(Lattice(gram))
    return (det_int(gram), tuple(counts), q.invariants)


def isometry_classes(lattices: Iterable[Lattice]) -> list[Lattice]:
    """One lattice per isometry class, keeping the first representative seen."""
    buckets: dict[tuple, list[Lattice]] = defaultdict(list)
    reps: list[Lattice] = []
    for L in lattices:
        pos = L if L.is_positive_definite else Lattice(tuple(tuple(-x for x in r) for r in L.gram))
        key = (L.signature, _invariant_key(pos.gram))
        if any(are_isometric(L, other) for other in buckets[key]):
            continue
        buckets[key].append(L)
        reps.append(L)
    return reps


@lru_cache(maxsize=256)
def _enumerate_cached(
    rank: int, det_bound: int, dets: frozenset[int] | None, exponent: int | None = None
) -> tuple:
    allowed = np.zeros(det_bound + 1, dtype=bool)
    if dets is None:
        allowed[1:] = True
    else:
        for d in dets:
            if 0 < d <= det_bound:
                allowed[d] = True
    grams = sorted(_reduced_grams(rank, det_bound, allowed, exponent))
    log.info("rank %d, |det| <= %d: %d reduced Gram matrices", rank, det_bound, len(grams))
    classes = isometry_classes(Lattice(g) for g in grams)
    classes.sort(key=lambda L: (L.rank, L.det, L.gram))
    return tuple(classes)


def enumerate_definite_even(
    rank: int,
    det_bound: int,
    negative: bool = True,
    *,
    dets: Iterable[int] | None = None,
    exponent: int | None = None,
) -> list[Lattice]:
    """Isometry classes of even definite lattices with ``|det| <= det_bound``.

    ``dets`` restricts the admissible absolute determinants and ``exponent``
    keeps only lattices whose discriminant group it annihilates. The order is by
    rank, then ``|det|``, then the least reduced Gram matrix of the class.
    """
    _check_bounds(rank, det_bound)
    key = frozenset(dets) if dets is not None else None
    out = []
    for L in _enumerate_cached(rank, det_bound, key, exponent):
        if negative:
            L = Lattice(tuple(tuple(-x for x in row) for row in L.gram))
        out.append(identify(L))
    return out


def m_elementary_dets(m: int, rank: int, det_bound: int) -> list[int]:
    """Absolute determinants ``d <= det_bound`` dividing ``m^rank``."""
    return [d for d in divisors(m**rank) if d <= det_bound]


def lp_bounds(
    rank: int,
    forced_n: Iterable[int],
    primes: Iterable[int],
    *,
    host_rank: int = 8,
    host_lengths: Mapping[int, int] | None = None,
) -> dict[int, int]:
    """Upper bounds on ``l_p(N^#)`` for a rank ``rank`` lattice ``N``.

    ``N`` sits primitively in a host of rank ``host_rank`` whose discriminant
    group has ``p``-lengths ``host_lengths`` and contains a primitive ``A_n``
    for every ``n`` in ``forced_n``.
    """
    lengths = {2: 2} if host_lengths is None else dict(host_lengths)
    forced = [n for n in forced_n if 0 < n <= rank]
    bounds: dict[int, int] = {}
    for p in primes:
        bound = min(rank, host_rank - rank + lengths.get(p, 0))
        for n in forced:
            bound = min(bound, rank - n + (1 if (n + 1) % p == 0 else 0))
        bounds[p] = max(bound, 0)
    return bounds


def det_bound(m: int, rank: int, forced_n: Iterable[int] = (), **kwargs) -> int:
    """``prod p^(v_p(m) l_p)`` over the primes of ``m``, with ``l_p`` from :func:`lp_bounds`."""
    primes = primes_of(m)
    bounds = lp_bounds(rank, forced_n, primes, **kwargs)
    return math.prod(p ** (int(multiplicity(p, m)) * bounds[p]) for p in primes)


def enumerate_m_elementary(
    m: int,
    max_rank: int | None = None,
    signature_constraint: str = "negative",
    *,
    det_bounds: Mapping[int, int] | None = None,
    ranks: Iterable[int] | None = None,
) -> list[Lattice]:
    """Definite even lattices ``N`` with ``m N^# = 0`` up to isometry.

    Ranks run up to ``max_rank`` (odd ranks are skipped for odd ``m``);
    ``det_bounds`` caps ``|det|`` per rank and defaults to ``m^rank``.
    """
    if m < 1:
        raise LatticeError("m must be positive", reason="range")
    if signature_constraint not in ("negative", "positive"):
        raise LatticeError(f"unknown signature constraint {signature_constraint!r}",
                           reason="range")
    top = settings.max_rank if max_rank is None else max_rank
    wanted = sorted(ranks) if ranks is not None else range(1, top + 1)
    out: list[Lattice] = []
    for r in wanted:
        if m % 2 and r % 2:
            continue
        bound = (det_bounds or {}).get(r, m**r)
        bound = min(bound, m**r)
        if bound < 1:
            continue
        dets = m_elementary_dets(m, r, bound)
        for L in enumerate_definite_even(r, bound, signature_constraint == "negative",
                                         dets=dets, exponent=m):
            if is_m_elementary(L, m):
                out.append(L)
    log.info("%d-elementary lattices of rank <= %d: %s", m, top, ", ".join(map(str, out)))
    return out


def lattices_in_genus(genus: GenusSymbol) -> list[Lattice]:
    """All classes of a definite genus."""
    if not genus.is_definite:
        raise LatticeError("only definite genera are enumerated", reason="indefinite")
    if genus.rank == 0:
        return [Lattice.zero()] if genus.disc_form.order == 1 else []
    negative = genus.signature[0] == 0
    found = enumerate_definite_even(genus.rank, genus.abs_det, negative,
                                    dets=[genus.abs_det])
    return [L for L in found if genus_of(L).matches(genus)]


# ---------------------------------------------------------------------------
# Representatives
# ---------------------------------------------------------------------------


def _binary_indefinite(q: fqf.FiniteQuadraticForm) -> Lattice | None:
    """Least reduced even binary lattice of signature (1, 1) with form ``q``."""
    D = q.order
    grams: list[list[list[int]]] = []
    b = math.isqrt(D)
    if b * b == D:
        grams.extend([[0, b], [b, 2 * c]] for c in range(b))
    top = math.isqrt(D) // 2 + 1
    for a in sorted(range(-top, top + 1), key=lambda x: (abs(x), x)):
        if a == 0:
            continue
        for b in range(-abs(a), abs(a) + 1):
            if (b * b - D) % (4 * a):
                continue
            c = (b * b - D) // (4 * a)
            if abs(c) >= abs(a):
                grams.append([[2 * a, b], [b, 2 * c]])
    for gram in grams:
        L = make_lattice(gram)
        if fqf.is_isomorphic(fqf.discriminant_group(L), q):
            return L
    return None


def _split_model(s_plus: int, s_minus: int, q: fqf.FiniteQuadraticForm) -> Lattice | None:
    """A lattice ``P + N`` with ``P`` positive and ``N`` negative definite, if one fits."""
    if max(s_plus, s_minus) > settings.max_rank:
        return None
    size = q.order
    for d in divisors(size):
        e = size // d
        if max(d, e) > settings.max_det:
            continue
        for P in enumerate_definite_even(s_plus, d, negative=False, dets=[d]):
            for N in enumerate_definite_even(s_minus, e, dets=[e]):
                L = direct_sum([P, N])
                if fqf.is_isomorphic(fqf.discriminant_group(L), q):
                    return L
    return None


def genus_model(s_plus: int, s_minus: int, q: fqf.FiniteQuadraticForm) -> Lattice:
    """One even lattice of signature ``(s_plus, s_minus)`` and discriminant form ``q``.

    Hyperbolic planes are split off while the smaller genus still exists; the
    rest is a definite lattice, a binary indefinite form or a definite split.
    """
    if not fqf.genus_exists(s_plus, s_minus, q):
        raise LatticeError(f"no even lattice of signature ({s_plus}, {s_minus}) with form {q}",
                           reason="range")
    if s_plus == 0 or s_minus == 0:
        found = lattices_in_genus(GenusSymbol((s_plus, s_minus), q))
        if not found:
            raise LatticeError(f"definite genus with form {q} is empty", reason="range")
        return found[0]
    if fqf.genus_exists(s_plus - 1, s_minus - 1, q):
        return direct_sum([U(), genus_model(s_plus - 1, s_minus - 1, q)])
    model = _binary_indefinite(q) if s_plus + s_minus == 2 else None
    if model is None:
        model = _split_model(s_plus, s_minus, q)
    if model is None:
        raise LatticeError(f"no model found for the genus ({s_plus}, {s_minus}) {q}",
                           reason="indefinite")
    log.debug("genus model for (%d, %d) %s: %s", s_plus, s_minus, q, model)
    return model


def representatives(genus: GenusSymbol) -> list[Lattice]:
    """All classes of a definite genus, or a single model of an indefinite one."""
    if genus.is_definite:
        return lattices_in_genus(genus)
    return [genus_model(*genus.signature, genus.disc_form)]


# ---------------------------------------------------------------------------
# Names
# ---------------------------------------------------------------------------


_NAMED_BLOCKS = ["D5", "A5", "D4", "A4", "btA", "A3", "A2"]


@lru_cache(maxsize=1)
def _named_blocks() -> list[Lattice]:
    return [parse_lattice(name) for name in _NAMED_BLOCKS]


def _block_candidates(abs_det: int, max_rank: int) -> list[Lattice]:
    blocks = [b for b in _named_blocks() if b.rank <= max_rank and abs_det % abs(b.det) == 0]
    for k in range(2, 9):
        a2k = make_lattice([[-2 * k, k], [k, -2 * k]], name=f"A2({k})")
        if max_rank >= 2 and abs_det % abs(a2k.det) == 0:
            blocks.append(a2k)
    for d in divisors(abs_det):
        if d % 2 == 0:
            blocks.append(make_lattice([[-d]], name=f"[-{d}]"))
    return blocks


def _combinations(blocks: list[Lattice], rank: int, abs_det: int, start: int = 0):
    if rank == 0:
        if abs_det == 1:
            yield []
        return
    for i in range(start, len(blocks)):
        b = blocks[i]
        if b.rank <= rank and abs_det % abs(b.det) == 0:
            for rest in _combinations(blocks, rank - b.rank, abs_det // abs(b.det), i):
                yield [b, *rest]


def _format_sum(parts: list[Lattice]) -> str:
    counts: dict[str, int] = {}
    for p in parts:
        counts[p.name] = counts.get(p.name, 0) + 1
    return "+".join(f"{k}{name}" if k > 1 else name for name, k in counts.items())


@lru_cache(maxsize=4096)
def identify(L: Lattice) -> Lattice:
    """``L`` renamed after an isometric sum of standard blocks, when one is found.

    Only negative definite lattices of rank at most 5 are named.
    """
    if L.rank == 0:
        return Lattice.zero()
    if not L.is_negative_definite or L.rank > 5:
        return L
    blocks = _block_candidates(abs(L.det), L.rank)
    for parts in _combinations(blocks, L.rank, abs(L.det)):
        candidate = parts[0] if len(parts) == 1 else direct_sum(parts)
        if are_isometric(candidate, L):
            return Lattice(L.gram, name=_format_sum(parts))
    return Lattice(L.gram, name=None)


def primes_of(n: int) -> list[int]:
    return [int(p) for p in primefactors(n)]


__all__ = [
    "GenusSymbol",
    "det_bound",
    "enumerate_definite_even",
    "enumerate_m_elementary",
    "genus_model",
    "genus_of",
    "identify",
    "involution_coinvariant_exists",
    "is_m_elementary",
    "isometry_classes",
    "lattices_in_genus",
    "lp_bounds",
    "m_elementary_dets",
    "primes_of",
    "representatives",
    "same_genus",
    "two_elementary_invariants",
]
