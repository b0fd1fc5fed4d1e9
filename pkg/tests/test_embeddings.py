"""Tests for primitive embeddings, gluing data and wall criteria."""

import pytest

from og6_lattice import fqf
from og6_lattice.embeddings import (
    disc_image,
    embedding_from_basis,
    embedding_types,
    exists_full_gluing_embedding,
    exists_primitive_embedding,
    host_divisibility,
    overlattice_from_gluing,
    primitive_copies,
    primitive_embeddings,
    satisfies_divisibility_hypothesis,
    standard_full_gluing_embedding,
    wall_intersection_full,
    wall_intersection_pex,
)
from og6_lattice.errors import EmbeddingError
from og6_lattice.lattice import A, D, E, bL, rank1
from og6_lattice.parser import parse_lattice

C1 = (0, 0, 0, 0, 0, 0, 1, 0)


def test_standard_embedding_of_a2():
    """A2 glues fully: the complement has signature (3, 3) and |det| 12."""
    emb = standard_full_gluing_embedding(A(2))

    assert emb.source.gram == A(2).gram
    assert emb.host == bL()
    assert emb.is_full_gluing
    assert emb.identities_hold()
    assert emb.reconstructs_host()
    assert emb.complement.signature == (3, 3)
    assert abs(emb.complement.det) == 12


@pytest.mark.parametrize("expr", ["[-2]", "2[-2]", "A3", "D4", "A4", "D5"])
def test_standard_embeddings_satisfy_gluing_identities(expr):
    N = parse_lattice(expr)

    emb = standard_full_gluing_embedding(N)

    assert emb.is_full_gluing
    assert emb.identities_hold()
    assert abs(emb.complement.det) == 4 * abs(N.det)


def test_standard_embedding_rejects_positive_lattices():
    with pytest.raises(EmbeddingError):
        standard_full_gluing_embedding(rank1(2))


def test_root_c1_is_not_full_gluing():
    """c1 has divisibility 2 in bL, so [-2] spanned by it glues along nothing."""
    emb = embedding_from_basis(bL(), [C1])

    assert emb.gluing_index == 1
    assert emb.embedding_index == 2
    assert not emb.is_full_gluing
    assert emb.identities_hold()
    assert host_divisibility(emb, (1,)) == 2
    assert wall_intersection_pex(emb)


def test_full_gluing_root_has_host_divisibility_one():
    emb = standard_full_gluing_embedding(rank1(-2))

    assert host_divisibility(emb, (1,)) == 1
    assert not wall_intersection_pex(emb)
    assert wall_intersection_full(emb)


@pytest.mark.parametrize("expr", ["[-2]", "A2", "A3", "D4"])
def test_pex_walls_detect_full_gluing(expr):
    """An embedding type avoids the exceptional walls exactly when it glues fully."""
    N = parse_lattice(expr)

    types = embedding_types(N, bL(), up_to_source=True)

    assert any(t.is_full_gluing for t in types)
    for t in types:
        assert wall_intersection_pex(t) == (not t.is_full_gluing)


def test_embedding_types_of_a2_are_full_gluing():
    types = embedding_types(A(2), bL())

    assert types
    assert all(t.is_full_gluing for t in types)
    assert all(t.complement_genus.signature == (3, 3) for t in types)


def test_embedding_types_need_room():
    assert embedding_types(parse_lattice("E8"), bL()) == ()
    with pytest.raises(EmbeddingError):
        embedding_types(parse_lattice("5U"), bL())


def test_wall_criteria_need_the_host_genus():
    emb = embedding_from_basis(D(4), [(1, 0, 0, 0)])

    with pytest.raises(EmbeddingError):
        wall_intersection_pex(emb)


@pytest.mark.parametrize(
    "M,L,count",
    [(rank1(-2), D(4), 24), (A(2), A(2), 12), (rank1(-4), A(2), 0)],
)
def test_primitive_copies(M, L, count):
    assert len(primitive_copies(M, L)) == count


def test_exists_primitive_embedding():
    assert exists_primitive_embedding(A(3), D(4))
    assert not exists_primitive_embedding(D(4), A(4))
    assert not exists_primitive_embedding(rank1(-4), A(2))
    assert exists_primitive_embedding(D(5), bL())


def test_exists_full_gluing_embedding():
    assert exists_full_gluing_embedding(A(2), bL())
    assert exists_full_gluing_embedding(D(4), bL())


def test_disc_image():
    """O(A2) acts on A2^# as {1, -1}; O(D4) acts as the full S3."""
    assert len(disc_image(A(2))) == 2
    assert len(disc_image(D(4))) == 6


def test_divisibility_hypothesis():
    for expr in ("[-2]", "A2", "A3", "D4", "D5"):
        assert satisfies_divisibility_hypothesis(parse_lattice(expr)), expr


def test_overlattice_of_a2_and_e6_is_unimodular():
    """Gluing A2 and E6 along Z/3 gives a rank-8 unimodular negative definite lattice."""
    M, N = A(2), E(6)
    qM, qN = fqf.discriminant_group(M), fqf.discriminant_group(N)
    gamma = fqf.FqfMap(qM, qN, (qN.generators()[0],))

    L, emb_M, emb_N = overlattice_from_gluing(M, N, frozenset(qM.elements), gamma)

    assert L.rank == 8
    assert abs(L.det) == 1
    assert L.is_negative_definite
    assert emb_M.source.gram == M.gram
    assert emb_N.source.gram == N.gram


def test_overlattice_rejects_non_isotropic_graphs():
    from og6_lattice.errors import FqfError

    M = A(2)
    qM = fqf.discriminant_group(M)
    gamma = fqf.FqfMap(qM, qM, (qM.generators()[0],))

    with pytest.raises(FqfError):
        overlattice_from_gluing(M, M, frozenset(qM.elements), gamma)


def test_primitive_embeddings_rebuild_the_host():
    found = primitive_embeddings(rank1(-2), bL(), up_to_source=True)

    assert found
    for emb in found:
        assert emb.identities_hold()
        assert emb.reconstructs_host()
        assert abs(emb.host.det) == 4


@pytest.mark.parametrize("expr", ["[-2]", "[-4]", "2[-2]", "[-2]+[-4]", "A3", "D4"])
def test_host_divisibility_is_the_gcd_of_pairings_in_the_overlattice(expr):
    """Every explicit gluing: divisibility from H^perp equals gcd (w, L) for the image w."""
    import math

    from og6_lattice.embeddings import wall_candidates
    from og6_lattice.linalg import identity, matmul

    N = parse_lattice(expr)
    found = primitive_embeddings(N, bL())

    assert found
    for emb in found:
        vectors = [tuple(r) for r in identity(N.rank)] + wall_candidates(N)
        for v in vectors:
            w = [sum(c * x for c, x in zip(v, col, strict=True)) for col in zip(*emb.image)]
            pairings = matmul([w], emb.host.gram)[0]
            assert host_divisibility(emb, v) == math.gcd(*pairings), (emb.to_dict(), v)
