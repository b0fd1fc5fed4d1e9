"""Finite quadratic forms (discriminant forms).

A form is stored on a generator system of a finite abelian group: ``orders``
holds the orders of the generators and ``q_matrix`` holds ``q(g_i)`` (mod 2)
on the diagonal and ``b(g_i, g_j)`` (mod 1) off it. Forms built by
:func:`discriminant_group`, :func:`subquotient` and :func:`normalized` use
Smith order ``d_1 | d_2 | ...``; :func:`orthogonal_sum` keeps the product
presentation of its summands so that element coordinates stay readable.

Elements are coordinate tuples reduced modulo ``orders``. All searches are
brute force over the element list, which is why every entry point takes a
size budget.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import Counter, deque
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np
from sympy import Poly, Symbol, cyclotomic_poly, factorint, legendre_symbol, primefactors

from .config import settings
from .errors import BudgetExceededError, FqfError
from .lattice import Lattice
from .linalg import (
    elementary_divisors,
    integer_inverse,
    matmul,
    rational_inverse,
    smith_form,
    span_basis,
    transpose,
)

log = logging.getLogger(__name__)
_X = Symbol("x")

Element = tuple[int, ...]
Subgroup = frozenset[Element]


def _mod2(x: Fraction) -> Fraction:
    return Fraction(x) % 2


def _mod1(x: Fraction) -> Fraction:
    return Fraction(x) % 1


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteQuadraticForm:
    """A finite abelian group with a ``Q/2Z``-valued quadratic form.

    ``projector`` and ``dual_generators`` are only set for discriminant
    groups of a lattice; they carry the map from dual vectors to elements and
    its section, and take no part in equality.
    """

    orders: tuple[int, ...]
    q_matrix: tuple[tuple[Fraction, ...], ...]
    projector: tuple[tuple[int, ...], ...] | None = field(
        default=None, compare=False, repr=False
    )
    dual_generators: tuple[tuple[Fraction, ...], ...] | None = field(
        default=None, compare=False, repr=False
    )

    def __post_init__(self) -> None:
        n = len(self.orders)
        if len(self.q_matrix) != n or any(len(row) != n for row in self.q_matrix):
            raise FqfError("q_matrix shape does not match the number of generators")
        if any(d < 2 for d in self.orders):
            raise FqfError(f"generator orders must be at least 2, got {list(self.orders)}")
        Q = self.q_matrix
        for i, d in enumerate(self.orders):
            if (d * Q[i][i]).denominator != 1 or (d * d * Q[i][i]) % 2:
                raise FqfError(f"q(g_{i}) = {Q[i][i]} is not compatible with order {d}")
            for j in range(n):
                if j == i:
                    continue
                if Q[i][j] != Q[j][i]:
                    raise FqfError("q_matrix is not symmetric")
                if (d * Q[i][j]).denominator != 1:
                    raise FqfError(f"b(g_{i}, g_{j}) = {Q[i][j]} is not killed by order {d}")

    # -- shape ------------------------------------------------------------

    @property
    def ngens(self) -> int:
        return len(self.orders)

    @property
    def order(self) -> int:
        return math.prod(self.orders)

    def __len__(self) -> int:
        return self.order

    @cached_property
    def invariants(self) -> tuple[int, ...]:
        """Invariant factors ``d_1 | d_2 | ...`` of the underlying group."""
        if not self.orders:
            return ()
        diag = [[d if i == j else 0 for j in range(self.ngens)] for i, d in
                enumerate(self.orders)]
        return tuple(d for d in elementary_divisors(diag) if d > 1)

    @property
    def exponent(self) -> int:
        return math.lcm(*self.orders) if self.orders else 1

    # -- integer encoding used by every evaluation --------------------------

    @cached_property
    def _den(self) -> int:
        return math.lcm(1, *(x.denominator for row in self.q_matrix for x in row))

    @cached_property
    def _num(self) -> np.ndarray:
        den = self._den
        rows = [[int(x * den) for x in row] for row in self.q_matrix]
        return np.array(rows, dtype=np.int64).reshape(self.ngens, self.ngens)

    @cached_property
    def element_array(self) -> np.ndarray:
        if not self.orders:
            return np.zeros((1, 0), dtype=np.int64)
        grid = itertools.product(*(range(d) for d in self.orders))
        return np.array(list(grid), dtype=np.int64)

    @cached_property
    def elements(self) -> list[Element]:
        return [tuple(int(c) for c in row) for row in self.element_array]

    @cached_property
    def index(self) -> dict[Element, int]:
        return {x: i for i, x in enumerate(self.elements)}

    @cached_property
    def q_values(self) -> list[Fraction]:
        E = self.element_array
        raw = np.einsum("ij,jk,ik->i", E, self._num, E) % (2 * self._den)
        return [Fraction(int(v), self._den) for v in raw]

    @cached_property
    def element_orders(self) -> list[int]:
        orders = np.array(self.orders, dtype=np.int64)
        out = []
        for row in self.element_array:
            out.append(math.lcm(1, *(int(d) // math.gcd(int(c), int(d))
                                     for c, d in zip(row, orders, strict=True))))
        return out

    # -- arithmetic --------------------------------------------------------

    def reduce(self, x: Iterable[int]) -> Element:
        return tuple(int(c) % d for c, d in zip(x, self.orders, strict=True))

    def add(self, x: Element, y: Element) -> Element:
        return tuple((a + b) % d for a, b, d in zip(x, y, self.orders, strict=True))

    def scale(self, k: int, x: Element) -> Element:
        return tuple((k * a) % d for a, d in zip(x, self.orders, strict=True))

    def zero(self) -> Element:
        return (0,) * self.ngens

    def generators(self) -> list[Element]:
        return [tuple(1 if i == j else 0 for j in range(self.ngens)) for i in range(self.ngens)]

    def element_order(self, x: Element) -> int:
        return math.lcm(1, *(d // math.gcd(c, d) for c, d in zip(x, self.orders, strict=True)))

    def q(self, x: Sequence[int]) -> Fraction:
        v = np.array(x, dtype=np.int64)
        return Fraction(int(v @ self._num @ v) % (2 * self._den), self._den)

    def b(self, x: Sequence[int], y: Sequence[int]) -> Fraction:
        v = np.array(x, dtype=np.int64)
        w = np.array(y, dtype=np.int64)
        return Fraction(int(v @ self._num @ w) % self._den, self._den)

    # -- lattice bookkeeping -----------------------------------------------

    def project(self, x: Sequence) -> Element:
        """Class in ``L^#`` of a dual vector given in the lattice's coordinates."""
        if self.projector is None:
            raise FqfError("form is not attached to a lattice")
        coords = []
        for row, d in zip(self.projector, self.orders, strict=True):
            c = sum((Fraction(a) * Fraction(v) for a, v in zip(row, x, strict=True)), Fraction(0))
            if c.denominator != 1:
                raise FqfError(f"vector {list(x)} is not in the dual lattice")
            coords.append(int(c) % d)
        return tuple(coords)

    def lift(self, x: Element) -> tuple[Fraction, ...]:
        """A dual vector representing ``x`` (coordinates in the lattice basis)."""
        if self.dual_generators is None:
            raise FqfError("form is not attached to a lattice")
        n = len(self.dual_generators[0]) if self.dual_generators else 0
        out = [Fraction(0)] * n
        for c, g in zip(x, self.dual_generators, strict=True):
            for k in range(n):
                out[k] += c * g[k]
        return tuple(out)

    # -- display / serialization -------------------------------------------

    def group_label(self) -> str:
        if not self.invariants:
            return "0"
        counts = Counter(self.invariants)
        parts = [f"(Z/{d})^{k}" if k > 1 else f"Z/{d}" for d, k in sorted(counts.items())]
        return " x ".join(parts)

    def __str__(self) -> str:
        diag = ", ".join(str(self.q_matrix[i][i]) for i in range(self.ngens))
        return f"{self.group_label()} [{diag}]"

    def to_dict(self) -> dict:
        return {
            "orders": list(self.orders),
            "q_matrix": [[str(x) for x in row] for row in self.q_matrix],
        }

    @classmethod
    def from_dict(cls, data: dict) -> FiniteQuadraticForm:
        return make_fqf(data["orders"], [[Fraction(x) for x in row] for row in data["q_matrix"]])

    @classmethod
    def trivial(cls) -> FiniteQuadraticForm:
        return cls((), ())


def make_fqf(orders: Sequence[int], q_matrix: Sequence[Sequence], **extra) -> FiniteQuadraticForm:
    """Build a form, reducing the diagonal mod 2 and the rest mod 1."""
    n = len(orders)
    Q = tuple(
        tuple(_mod2(q_matrix[i][j]) if i == j else _mod1(q_matrix[i][j]) for j in range(n))
        for i in range(n)
    )
    return FiniteQuadraticForm(tuple(int(d) for d in orders), Q, **extra)


@dataclass(frozen=True)
class FqfMap:
    """A homomorphism given by the images of ``domain`` (default: the source generators)."""

    source: FiniteQuadraticForm
    target: FiniteQuadraticForm
    images: tuple[Element, ...]
    domain: tuple[Element, ...] | None = None

    @cached_property
    def table(self) -> dict[Element, Element]:
        gens = self.domain if self.domain is not None else tuple(self.source.generators())
        if len(gens) != len(self.images):
            raise FqfError("number of images does not match the domain generators")
        table = {self.source.zero(): self.target.zero()}
        frontier = deque(table.items())
        while frontier:
            x, y = frontier.popleft()
            for g, h in zip(gens, self.images, strict=True):
                x2, y2 = self.source.add(x, g), self.target.add(y, h)
                seen = table.get(x2)
                if seen is None:
                    table[x2] = y2
                    frontier.append((x2, y2))
                elif seen != y2:
                    raise FqfError("images do not define a homomorphism")
        return table

    def apply(self, x: Element) -> Element:
        if self.domain is None:
            out = self.target.zero()
            for c, img in zip(x, self.images, strict=True):
                if c:
                    out = self.target.add(out, self.target.scale(c, img))
            return out
        try:
            return self.table[x]
        except KeyError:
            raise FqfError(f"{x} is outside the domain of the map") from None

    def is_isometry(self) -> bool:
        seen = set()
        for x, y in self.table.items():
            if self.source.q(x) != self.target.q(y):
                return False
            seen.add(y)
        return len(seen) == len(self.table)

    def is_identity(self) -> bool:
        return self.domain is None and self.source == self.target and \
            list(self.images) == self.source.generators()

    def compose(self, other: FqfMap) -> FqfMap:
        """``self ∘ other``."""
        gens = other.domain if other.domain is not None else None
        return FqfMap(other.source, self.target,
                      tuple(self.apply(y) for y in other.images), gens)


def identity_map(q: FiniteQuadraticForm) -> FqfMap:
    return FqfMap(q, q, tuple(q.generators()))


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def discriminant_group(L: Lattice) -> FiniteQuadraticForm:
    """``L^# = L^v / L`` with its discriminant quadratic form.

    With ``P G R = S`` the Smith form of the Gram matrix, the class of a dual
    vector ``x`` has coordinates ``(P G x)_i mod s_i``.
    """
    if L.rank == 0:
        return FiniteQuadraticForm.trivial()
    G = [list(row) for row in L.gram]
    S, P, _ = smith_form(G)
    Pinv = integer_inverse(P)
    Ginv = rational_inverse(G)
    keep = [i for i in range(L.rank) if S[i][i] > 1]
    gens_all = matmul(Ginv, Pinv)
    gens = [tuple(gens_all[r][i] for r in range(L.rank)) for i in keep]
    Q = matmul(matmul(transpose(Pinv), Ginv), Pinv)
    PG = matmul(P, G)
    return make_fqf(
        [S[i][i] for i in keep],
        [[Q[i][j] for j in keep] for i in keep],
        projector=tuple(tuple(PG[i]) for i in keep),
        dual_generators=tuple(gens),
    )


def negate(q: FiniteQuadraticForm) -> FiniteQuadraticForm:
    return make_fqf(q.orders, [[-x for x in row] for row in q.q_matrix],
                    projector=q.projector, dual_generators=q.dual_generators)


def orthogonal_sum(*forms: FiniteQuadraticForm) -> FiniteQuadraticForm:
    """Orthogonal sum in product presentation (coordinates concatenated)."""
    orders: list[int] = []
    for f in forms:
        orders.extend(f.orders)
    n = len(orders)
    Q = [[Fraction(0)] * n for _ in range(n)]
    offset = 0
    for f in forms:
        for i in range(f.ngens):
            for j in range(f.ngens):
                Q[offset + i][offset + j] = f.q_matrix[i][j]
        offset += f.ngens
    return make_fqf(orders, Q)


def span(q: FiniteQuadraticForm, gens: Iterable[Element]) -> Subgroup:
    """Subgroup generated by ``gens``."""
    group = {q.zero()}
    for g in gens:
        g = q.reduce(g)
        if g in group:
            continue
        multiples = [q.zero()]
        x = g
        while x != q.zero():
            multiples.append(x)
            x = q.add(x, g)
        group = {q.add(s, m) for s in group for m in multiples}
    return frozenset(group)


def generators_of(q: FiniteQuadraticForm, H: Iterable[Element]) -> list[Element]:
    """A small generating set of the subgroup ``H``, greedily in sorted order."""
    gens: list[Element] = []
    current: Subgroup = frozenset({q.zero()})
    for x in sorted(set(H), key=lambda e: (-q.element_order(e), e)):
        if x not in current:
            gens.append(x)
            current = span(q, gens)
    return gens


def orthogonal(q: FiniteQuadraticForm, H: Iterable[Element]) -> Subgroup:
    """``H^perp`` inside ``q``."""
    gens = generators_of(q, H)
    if not gens:
        return frozenset(q.elements)
    E = q.element_array
    Hm = np.array(gens, dtype=np.int64)
    pairing = (E @ q._num @ Hm.T) % q._den
    mask = ~pairing.any(axis=1)
    return frozenset(q.elements[i] for i in np.flatnonzero(mask))


def subquotient(
    q: FiniteQuadraticForm,
    numerator: Iterable[Element],
    denominator: Iterable[Element] = (),
) -> tuple[FiniteQuadraticForm, Callable[[Element], Element]]:
    """``A/B`` for subgroups ``B ⊂ A`` with ``B`` isotropic and ``B ⊥ A``.

    ``A`` and ``B`` are given by generators. Returns the induced form in Smith
    order and the projection ``A -> A/B``.
    """
    n = q.ngens
    if n == 0:
        return FiniteQuadraticForm.trivial(), lambda x: ()
    box = [[q.orders[i] if r == i else 0 for r in range(n)] for i in range(n)]
    num_gens = [list(x) for x in numerator]
    den_gens = [list(x) for x in denominator]
    for y in den_gens:
        if q.q(y) != 0 or any(q.b(y, x) != 0 for x in num_gens):
            raise FqfError("denominator is not isotropic and orthogonal to the numerator")
    PA = transpose(span_basis(num_gens + box, n))
    PB = transpose(span_basis(den_gens + box, n))
    PAinv = rational_inverse(PA)
    X = matmul(PAinv, PB)
    if any(x.denominator != 1 for row in X for x in row):
        raise FqfError("denominator is not contained in the numerator")
    X = [[int(x) for x in row] for row in X]
    S, P, _ = smith_form(X)
    Pinv = integer_inverse(P)
    keep = [i for i in range(n) if S[i][i] > 1]
    W = matmul(PA, Pinv)
    ws = [[W[r][i] for r in range(n)] for i in keep]
    Qf = [[Fraction(x) for x in row] for row in q.q_matrix]
    gram = [[sum((a * Qf[r][s] * b for r, a in enumerate(u) for s, b in enumerate(w)),
                 Fraction(0)) for w in ws] for u in ws]
    form = make_fqf([S[i][i] for i in keep], gram)
    proj_rows = matmul(P, PAinv)

    def project(x: Element) -> Element:
        coords = []
        for row_i, i in ((proj_rows[i], i) for i in keep):
            c = sum((a * v for a, v in zip(row_i, x, strict=True)), Fraction(0))
            if c.denominator != 1:
                raise FqfError(f"{x} is not in the numerator subgroup")
            coords.append(int(c) % S[i][i])
        return tuple(coords)

    return form, project


def normalized(q: FiniteQuadraticForm) -> FiniteQuadraticForm:
    """The same form on a Smith-ordered generator system."""
    form, _ = subquotient(q, q.generators())
    return form


def p_part(q: FiniteQuadraticForm, p: int) -> FiniteQuadraticForm:
    gens = []
    for g, d in zip(q.generators(), q.orders, strict=True):
        cofactor = d
        while cofactor % p == 0:
            cofactor //= p
        gens.append(q.scale(cofactor, g))
    form, _ = subquotient(q, gens)
    return form


def graph_quotient(
    qM: FiniteQuadraticForm,
    qN: FiniteQuadraticForm,
    gamma: FqfMap,
    *,
    anti: bool | None = None,
) -> FiniteQuadraticForm:
    """``Γ^perp / Γ`` for the graph ``Γ`` of a gluing map ``gamma: H -> qN``.

    With ``anti`` true, ``q_N(γx) = -q_M(x)`` and the graph lives in ``qM + qN``;
    with ``anti`` false, ``gamma`` is an isometry and the graph lives in
    ``qM + qN(-1)``. ``None`` picks whichever holds, anti-isometry first.
    """
    pairs = list(gamma.table.items())
    is_anti = all(qN.q(y) == _mod2(-qM.q(x)) for x, y in pairs)
    is_iso = all(qN.q(y) == qM.q(x) for x, y in pairs)
    if anti is None:
        anti = is_anti
    if not (is_anti if anti else is_iso):
        kind = "an anti-isometry" if anti else "an isometry"
        raise FqfError(f"gluing map is not {kind}")
    target = qN if anti else negate(qN)
    if len({y for _, y in pairs}) != len(pairs):
        raise FqfError("gluing map is not injective")
    total = orthogonal_sum(qM, target)
    graph = [x + y for x, y in pairs]
    graph_gens = generators_of(total, graph)
    perp = orthogonal(total, graph_gens)
    form, _ = subquotient(total, generators_of(total, perp), graph_gens)
    return form


# ---------------------------------------------------------------------------
# Invariants
# ---------------------------------------------------------------------------


def eval_q(q: FiniteQuadraticForm, x: Sequence[int]) -> Fraction:
    return q.q(x)


def eval_b(q: FiniteQuadraticForm, x: Sequence[int], y: Sequence[int]) -> Fraction:
    return q.b(x, y)


def parity(q: FiniteQuadraticForm) -> int:
    """1 if some element of order 2 has square ``±1/2`` mod 2, else 0."""
    odd = {Fraction(1, 2), Fraction(3, 2)}
    for v, o in zip(q.q_values, q.element_orders, strict=True):
        if o == 2 and v in odd:
            return 1
    return 0


def length(q: FiniteQuadraticForm) -> int:
    return len(q.invariants)


def p_length(q: FiniteQuadraticForm, p: int) -> int:
    return sum(1 for d in q.invariants if d % p == 0)


def value_profile(q: FiniteQuadraticForm) -> Counter:
    """Multiset of ``(element order, q-value)``; an isomorphism invariant."""
    return Counter(zip(q.element_orders, q.q_values, strict=True))


def _cyclic_mul(a: list[int], b: list[int]) -> list[int]:
    """Product in ``Z[x]/(x^M - 1)`` of two length-``M`` coefficient lists."""
    M = len(a)
    out = [0] * M
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[(i + j) % M] += x * y
    return out


def _sqrt_prime(p: int, M: int) -> list[int]:
    """``sqrt(p)`` as a sum of ``M``-th roots of unity, for ``p | M`` and ``8 | M``.

    ``sqrt(2) = ζ_8 + ζ_8^-1``; for odd ``p`` the quadratic Gauss sum
    ``Σ (a/p) ζ_p^a`` is ``sqrt(p)`` or ``i sqrt(p)`` as ``p = 1`` or ``3 mod 4``.
    """
    out = [0] * M
    if p == 2:
        out[M // 8] += 1
        out[M - M // 8] += 1
        return out
    for a in range(1, p):
        out[a * M // p] += int(legendre_symbol(a, p))
    if p % 4 == 3:
        minus_i = [0] * M
        minus_i[M - M // 4] = 1
        out = _cyclic_mul(out, minus_i)
    return out


def gauss_signature(q: FiniteQuadraticForm) -> int:
    """Signature mod 8 from the Gauss sum ``Σ exp(πi q(x)) = sqrt|q| · ζ_8^sign``.

    Both sides are written over the ``M``-th roots of unity and compared
    modulo the ``M``-th cyclotomic polynomial, so the answer is exact.
    """
    if q.order == 1:
        return 0
    den = math.lcm(*(v.denominator for v in q.q_values))
    M = math.lcm(8, 2 * den, *primefactors(q.order))
    total = [0] * M
    for v in q.q_values:
        total[int(v * M / 2) % M] += 1
    scale, root = 1, [1] + [0] * (M - 1)
    for p, e in factorint(q.order).items():
        scale *= p ** (e // 2)
        if e % 2:
            root = _cyclic_mul(root, _sqrt_prime(p, M))
    phi = Poly(cyclotomic_poly(M, _X), _X)
    for s in range(8):
        turn = [0] * M
        turn[s * M // 8] = scale
        diff = [a - b for a, b in zip(total, _cyclic_mul(root, turn), strict=True)]
        if Poly(diff[::-1], _X).rem(phi).is_zero:
            return s
    raise FqfError("form is degenerate (Gauss sum is not sqrt|q| times an eighth root of unity)")


def check_axioms(q: FiniteQuadraticForm) -> bool:
    """Exhaustive check of ``q(x+y) - q(x) - q(y) = 2 b(x, y)`` and ``q(nx) = n^2 q(x)``."""
    for x in q.elements:
        for n in range(2, q.element_order(x) + 1):
            if q.q(q.scale(n, x)) != _mod2(n * n * q.q(x)):
                return False
        for y in q.elements:
            if _mod2(q.q(q.add(x, y)) - q.q(x) - q.q(y)) != _mod2(2 * q.b(x, y)):
                return False
    return True


# ---------------------------------------------------------------------------
# Normal blocks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormalBlock:
    """An orthogonal summand of the ``p``-part.

    ``kind`` is ``"cyclic"`` (unit ``q(x) p^k``), ``"u"`` or ``"v"``
    (the two even 2-adic planes of exponent ``2^k``).
    """

    p: int
    k: int
    kind: str
    unit: int = 1

    def __str__(self) -> str:
        if self.kind == "cyclic":
            return f"{self.p}^{self.k}[{self.unit}]"
        return f"{self.kind}_{self.k}"


def normal_blocks(q: FiniteQuadraticForm, p: int) -> list[NormalBlock]:
    """Split the ``p``-part of ``q`` into cyclic and 2-dimensional blocks."""
    current = {x for x, o in zip(q.elements, q.element_orders, strict=True)
               if o == p ** _valuation(o, p)}
    blocks: list[NormalBlock] = []
    while len(current) > 1:
        top = max(q.element_order(x) for x in current)
        k = _valuation(top, p)
        candidates = sorted(x for x in current if q.element_order(x) == top)
        block_gens: list[Element] | None = None
        for x in candidates:
            if (top * q.b(x, x)).numerator % p:
                unit = int(q.q(x) * top) % (2 * top)
                blocks.append(NormalBlock(p, k, "cyclic", unit if p == 2 else unit % top))
                block_gens = [x]
                break
        if block_gens is None and p == 2:
            for x, y in itertools.combinations(candidates, 2):
                if (top * q.b(x, y)).numerator % 2:
                    scale = top // 2
                    odd = sum(int(q.q(z) * scale) % 2 for z in (x, y, q.add(x, y)))
                    blocks.append(NormalBlock(2, k, "u" if odd == 1 else "v"))
                    block_gens = [x, y]
                    break
        if block_gens is None:
            raise FqfError(f"{p}-part of the form is degenerate")
        current = {z for z in current if all(q.b(z, g) == 0 for g in block_gens)}
    return blocks


def _valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0 and n > 1:
        n //= p
        v += 1
    return v


def genus_exists(s_plus: int, s_minus: int, q: FiniteQuadraticForm) -> bool:
    """Whether an even lattice of signature ``(s_plus, s_minus)`` with form ``q`` exists.

    Checks the signature congruence mod 8, the length bound and, for primes
    where the rank equals the ``p``-length, the determinant condition of the
    ``p``-adic lattice.
    """
    if s_plus < 0 or s_minus < 0:
        return False
    rank = s_plus + s_minus
    if (s_plus - s_minus - gauss_signature(q)) % 8:
        return False
    if rank < length(q):
        return False
    size = q.order
    for p in primefactors(size):
        if rank != p_length(q, p):
            continue
        if p == 2 and parity(q):
            continue
        blocks = normal_blocks(q, p)
        unit_size = size // p ** _valuation(size, p)
        if p == 2:
            disc = 1
            for blk in blocks:
                disc *= {"u": 7, "v": 3}.get(blk.kind, blk.unit)
            if (unit_size * disc) % 8 not in (1, 7):
                log.debug("2-adic determinant condition fails for %s", q)
                return False
        else:
            lhs = legendre_symbol(((-1) ** s_minus * unit_size) % p, p)
            rhs = math.prod(legendre_symbol(blk.unit % p, p) for blk in blocks)
            if lhs != rhs:
                log.debug("%d-adic determinant condition fails for %s", p, q)
                return False
    return True


# ---------------------------------------------------------------------------
# Brute-force isometries and subgroups
# ---------------------------------------------------------------------------


def _check_size(q: FiniteQuadraticForm, budget: int | None) -> int:
    limit = settings.fqf_budget if budget is None else budget
    if q.order > limit:
        raise BudgetExceededError("fqf", limit, q.order)
    return limit


def _isometries(
    q1: FiniteQuadraticForm, q2: FiniteQuadraticForm, *, first_only: bool, budget: int | None
) -> list[FqfMap]:
    _check_size(q1, budget)
    _check_size(q2, budget)
    if q1.invariants != q2.invariants or value_profile(q1) != value_profile(q2):
        return []
    if q1.ngens == 0:
        return [FqfMap(q1, q2, ())]
    gens = q1.generators()
    candidates = []
    for g, d in zip(gens, q1.orders, strict=True):
        want = q1.q(g)
        candidates.append([
            y for y, o, v in zip(q2.elements, q2.element_orders, q2.q_values, strict=True)
            if o == d and v == want
        ])
    node_limit = settings.search_node_budget
    nodes = 0
    found: list[FqfMap] = []
    E1 = q1.element_array
    orders2 = np.array(q2.orders, dtype=np.int64)
    chosen: list[Element] = []

    def bijective() -> bool:
        Y = np.array(chosen, dtype=np.int64)
        images = (E1 @ Y) % orders2
        return len(np.unique(images, axis=0)) == q1.order

    def extend(i: int) -> bool:
        nonlocal nodes
        if i == len(gens):
            if bijective():
                found.append(FqfMap(q1, q2, tuple(chosen)))
                return first_only
            return False
        for y in candidates[i]:
            nodes += 1
            if nodes > node_limit:
                raise BudgetExceededError("fqf search nodes", node_limit)
            if any(q2.b(y, chosen[j]) != q1.q_matrix[i][j] for j in range(i)):
                continue
            chosen.append(y)
            if extend(i + 1):
                return True
            chosen.pop()
        return False

    extend(0)
    return found


def orthogonal_group(q: FiniteQuadraticForm, *, budget: int | None = None) -> list[FqfMap]:
    """All automorphisms of ``q``, identity first, then by image tuples."""
    maps = _isometries(q, q, first_only=False, budget=budget)
    maps.sort(key=lambda f: (not f.is_identity(), f.images))
    log.debug("O(%s) has order %d", q, len(maps))
    return maps


def isomorphism(
    q1: FiniteQuadraticForm, q2: FiniteQuadraticForm, *, budget: int | None = None
) -> FqfMap | None:
    found = _isometries(q1, q2, first_only=True, budget=budget)
    return found[0] if found else None


def is_isomorphic(q1: FiniteQuadraticForm, q2: FiniteQuadraticForm, **kw) -> bool:
    return isomorphism(q1, q2, **kw) is not None


def subgroups(
    q: FiniteQuadraticForm,
    *,
    max_size: int | None = None,
    exponent: int | None = None,
    budget: int | None = None,
) -> list[Subgroup]:
    """Every subgroup (of order at most ``max_size``) exactly once.

    ``exponent`` keeps only subgroups killed by it. Sorted by order, then by
    the sorted element tuple.
    """
    _check_size(q, budget)
    limit = settings.search_node_budget
    pool = [x for x, o in zip(q.elements, q.element_orders, strict=True)
            if exponent is None or exponent % o == 0]
    start: Subgroup = frozenset({q.zero()})
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for S in frontier:
            for x in pool:
                if x in S:
                    continue
                T = frozenset(q.add(s, m) for s in S for m in span(q, [x]))
                if max_size is not None and len(T) > max_size:
                    continue
                if T not in seen:
                    seen.add(T)
                    nxt.append(T)
                    if len(seen) > limit:
                        raise BudgetExceededError("subgroup enumeration", limit)
        frontier = nxt
    return sorted(seen, key=subgroup_key)


def subgroup_key(S: Subgroup) -> tuple:
    return (len(S), tuple(sorted(S)))


def orbit_representatives(subs: Iterable[Subgroup], group: Sequence[FqfMap]) -> list[Subgroup]:
    """One subgroup per orbit of ``group``; the representative is the least by key."""
    seen: set[Subgroup] = set()
    reps: list[Subgroup] = []
    for S in sorted(set(subs), key=subgroup_key):
        if S in seen:
            continue
        orbit = {frozenset(g.apply(x) for x in S) for g in group} | {S}
        seen |= orbit
        reps.append(min(orbit, key=subgroup_key))
    return sorted(reps, key=subgroup_key)


def restricted_form(q: FiniteQuadraticForm, H: Iterable[Element]) -> FiniteQuadraticForm:
    """The form ``q`` restricted to the subgroup ``H`` (on a Smith generator system)."""
    form, _ = subquotient(q, generators_of(q, H))
    return form


def subgroup_isometries(
    q1: FiniteQuadraticForm, H1: Subgroup, q2: FiniteQuadraticForm, H2: Subgroup,
    *, anti: bool = False, first_only: bool = False,
) -> list[FqfMap]:
    """Isometries (or anti-isometries) ``H1 -> H2`` as maps ``q1 ⊃ H1 -> q2``."""
    if len(H1) != len(H2):
        return []
    gens = generators_of(q1, H1)
    targets = sorted(H2)
    sign = -1 if anti else 1
    found: list[FqfMap] = []

    def extend(chosen: list[Element]) -> bool:
        i = len(chosen)
        if i == len(gens):
            f = FqfMap(q1, q2, tuple(chosen), tuple(gens))
            try:
                table = f.table
            except FqfError:
                return False
            if len(set(table.values())) != len(H1):
                return False
            if all(q2.q(y) == _mod2(sign * q1.q(x)) for x, y in table.items()):
                found.append(f)
                return first_only
            return False
        g = gens[i]
        for y in targets:
            if q2.element_order(y) != q1.element_order(g):
                continue
            if q2.q(y) != _mod2(sign * q1.q(g)):
                continue
            if any(q2.b(y, chosen[j]) != _mod1(sign * q1.b(g, gens[j])) for j in range(i)):
                continue
            chosen.append(y)
            if extend(chosen):
                return True
            chosen.pop()
        return False

    extend([])
    return found


__all__ = [
    "Element",
    "FiniteQuadraticForm",
    "FqfMap",
    "NormalBlock",
    "Subgroup",
    "check_axioms",
    "discriminant_group",
    "eval_b",
    "eval_q",
    "gauss_signature",
    "generators_of",
    "genus_exists",
    "graph_quotient",
    "identity_map",
    "is_isomorphic",
    "isomorphism",
    "length",
    "make_fqf",
    "negate",
    "normal_blocks",
    "normalized",
    "orbit_representatives",
    "orthogonal",
    "orthogonal_group",
    "orthogonal_sum",
    "p_length",
    "p_part",
    "parity",
    "restricted_form",
    "span",
    "subgroup_isometries",
    "subgroup_key",
    "subgroups",
    "subquotient",
    "value_profile",
]
