"""Tests for lattices, sums, rescaling and vector searches."""

import pytest

from og6_lattice.errors import LatticeError
from og6_lattice.lattice import (
    A,
    D,
    U,
    bL,
    direct_sum,
    divisibility,
    is_primitive,
    lll_reduce,
    make_lattice,
    minimum,
    orthogonal_complement,
    rank1,
    rescale,
    saturation,
    short_vectors,
)
from og6_lattice.parser import parse_lattice


def test_corpus_invariants(lattice_corpus):
    """Every corpus entry parses to the recorded rank, determinant and signature."""
    from og6_lattice import fqf

    for entry in lattice_corpus:
        L = parse_lattice(entry["expr"])
        assert L.rank == entry["rank"], entry["expr"]
        assert L.det == entry["det"], entry["expr"]
        assert list(L.signature) == entry["signature"], entry["expr"]
        if "invariants" in entry:
            assert list(fqf.discriminant_group(L).invariants) == entry["invariants"]


def test_host_lattice():
    """3U + 2[-2] has the standard basis e1, f1, e2, f2, e3, f3, c1, c2."""
    L = bL()

    assert L.rank == 8
    assert L.det == -4
    assert L.signature == (3, 5)
    assert L.gram[0][1] == 1
    assert L.gram[6][6] == -2
    assert L.gram[7][7] == -2


@pytest.mark.parametrize(
    "build,rank,det,signature",
    [("bLambda", 10, -1, (5, 5)), ("bR", 2, 4, (2, 0)), ("btA", 4, 12, (0, 4))],
)
def test_other_standard_lattices(build, rank, det, signature):
    from og6_lattice import lattice

    L = getattr(lattice, build)()

    assert L.rank == rank
    assert L.det == det
    assert L.signature == signature


def test_root_lattices_are_negative_definite():
    assert A(2).gram == ((-2, 1), (1, -2))
    assert A(4).is_negative_definite
    assert D(5).is_negative_definite
    assert not U().is_definite


@pytest.mark.parametrize(
    "gram,reason",
    [
        ([[-1]], "odd"),
        ([[-2, 1], [0, -2]], "asymmetric"),
        ([[0]], "degenerate"),
        ([[-2, 1]], "not_square"),
    ],
)
def test_make_lattice_rejects(gram, reason):
    """Odd, asymmetric, degenerate and non-square Gram matrices are rejected."""
    with pytest.raises(LatticeError) as excinfo:
        make_lattice(gram)

    assert excinfo.value.reason == reason


def test_name_does_not_affect_equality():
    assert make_lattice([[-2]], name="x") == rank1(-2)


def test_zero_lattice():
    from og6_lattice.lattice import Lattice

    Z = Lattice.zero()

    assert Z.rank == 0
    assert Z.det == 1
    assert str(Z) == "0"


def test_rescale_and_direct_sum():
    L = rescale(A(2), 3)

    assert L.det == 27
    assert L.name == "A2(3)"
    assert direct_sum([A(2), rank1(-2)]).det == -6
    with pytest.raises(LatticeError):
        rescale(A(2), 0)
    with pytest.raises(LatticeError):
        direct_sum([])


@pytest.mark.parametrize(
    "expr,norm,count",
    [
        ("D4", -2, 24),
        ("A2", -2, 6),
        ("A3", -2, 12),
        ("[-2]", -2, 2),
        ("A2", -4, 0),
    ],
)
def test_short_vector_counts(expr, norm, count):
    assert len(short_vectors(parse_lattice(expr), [norm])) == count


def test_short_vectors_closed_under_negation():
    vectors = set(short_vectors(D(4), [-2, -4]))

    assert vectors
    assert all(tuple(-x for x in v) in vectors for v in vectors)


def test_divisibility():
    """Roots of A3 have divisibility 1; a sum of orthogonal roots has divisibility 2."""
    L = A(3)

    assert divisibility(L, (1, 0, 0)) == 1
    assert divisibility(L, (1, 0, 1)) == 2
    assert divisibility(rank1(-2), (1,)) == 2


def test_saturation_and_primitivity():
    L = U()

    sat = saturation(L, [(2, 0)])

    assert sat in ([(1, 0)], [(-1, 0)])
    assert is_primitive(L, sat)
    assert not is_primitive(L, [(2, 0)])


def test_orthogonal_complement_in_hyperbolic_plane():
    """The complement of e + f in U is [-2]."""
    L = U()

    N, basis = orthogonal_complement(L, [(1, 1)])

    assert N.gram == ((-2,),)
    assert basis in ([(1, -1)], [(-1, 1)])


def test_orthogonal_complement_of_isotropic_vector_is_degenerate():
    with pytest.raises(LatticeError) as excinfo:
        orthogonal_complement(U(), [(1, 0)])

    assert excinfo.value.reason == "degenerate"


def test_lll_reduce_preserves_determinant():
    L = make_lattice([[-2, 5], [5, -14]])

    reduced, _ = lll_reduce(L)

    assert reduced.det == L.det
    assert minimum(L) == -2
