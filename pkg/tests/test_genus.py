"""Tests for genera, enumeration of definite lattices and the rank/det bounds."""

import pytest

from og6_lattice import fqf
from og6_lattice.errors import BudgetExceededError, LatticeError
from og6_lattice.genus import (
    det_bound,
    enumerate_definite_even,
    enumerate_m_elementary,
    genus_model,
    genus_of,
    identify,
    involution_coinvariant_exists,
    is_m_elementary,
    lattices_in_genus,
    lp_bounds,
    m_elementary_dets,
    same_genus,
    two_elementary_invariants,
)
from og6_lattice.isometries import are_isometric
from og6_lattice.lattice import A, D, bL, direct_sum, rank1
from og6_lattice.parser import parse_lattice

TWO_ELEMENTARY = ["[-2]", "2[-2]", "3[-2]", "4[-2]", "5[-2]", "D4", "D4+[-2]"]


def _contains(found, expr):
    N = parse_lattice(expr)
    return any(L.rank == N.rank and are_isometric(L, N) for L in found)


def test_two_elementary_lattices_up_to_rank_five():
    """Seven negative definite 2-elementary lattices of rank at most 5."""
    found = enumerate_m_elementary(2, max_rank=5)

    assert len(found) == 7
    assert all(_contains(found, expr) for expr in TWO_ELEMENTARY)


def test_three_elementary_lattices_have_even_rank():
    found = enumerate_m_elementary(3, max_rank=4)

    assert all(L.rank % 2 == 0 for L in found)
    assert _contains(found, "A2")
    assert _contains(found, "2A2")
    assert all(is_m_elementary(L, 3) for L in found)


def test_a2_a2_3_is_nine_elementary_only():
    L = parse_lattice("A2+A2(3)")

    assert not is_m_elementary(L, 3)
    assert is_m_elementary(L, 9)


def test_enumeration_names_lattices():
    found = enumerate_definite_even(2, 4, dets=[3])

    assert [str(L) for L in found] == ["A2"]


def test_positive_enumeration():
    found = enumerate_m_elementary(2, max_rank=1, signature_constraint="positive")

    assert [L.gram for L in found] == [((2,),)]


def test_enumeration_budget():
    with pytest.raises(BudgetExceededError):
        enumerate_definite_even(9, 4)


def test_enumerate_rejects_bad_arguments():
    with pytest.raises(LatticeError):
        enumerate_m_elementary(0)
    with pytest.raises(LatticeError):
        enumerate_m_elementary(2, signature_constraint="indefinite")


def test_identify_names_standard_sums():
    assert str(identify(direct_sum([A(2), rank1(-2)]))) == "A2+[-2]"
    assert str(identify(direct_sum([rank1(-2)] * 3))) == "3[-2]"
    assert str(identify(D(4))) == "D4"


def test_same_genus():
    assert same_genus(parse_lattice("A2"), parse_lattice("A2"))
    assert same_genus(parse_lattice("U+[-2]"), parse_lattice("U(2)+[-2]")) is False
    assert not same_genus(parse_lattice("A2"), parse_lattice("2[-2]"))


def test_definite_genus_of_d4_has_one_class():
    found = lattices_in_genus(genus_of(D(4)))

    assert len(found) == 1
    assert are_isometric(found[0], D(4))


def test_genus_model_of_the_host():
    q = fqf.discriminant_group(bL())

    model = genus_model(3, 5, q)

    assert model.signature == (3, 5)
    assert same_genus(model, bL())


def test_genus_model_rejects_empty_genus():
    with pytest.raises(LatticeError):
        genus_model(1, 0, fqf.discriminant_group(rank1(-2)))


@pytest.mark.parametrize(
    "expr,invariants",
    [("[-2]", (1, 1, 1)), ("D4", (4, 2, 0)), ("U(2)", (2, 2, 0)), ("U", (2, 0, 0))],
)
def test_two_elementary_invariants(expr, invariants):
    assert two_elementary_invariants(parse_lattice(expr)) == invariants


def test_two_elementary_invariants_rejects_other_lattices():
    with pytest.raises(LatticeError):
        two_elementary_invariants(A(2))


@pytest.mark.parametrize(
    "args,exists",
    [
        ((5, 5, 1, 1, 0, 0), True),
        ((5, 5, 1, 0, 1, 1), True),
        ((5, 5, 1, 1, 2, 0), True),
        ((5, 5, 1, 4, 1, 1), False),
        ((5, 5, 1, 2, 0, 0), False),
        ((5, 5, 1, 1, 1, 1), False),
    ],
)
def test_involution_coinvariant_exists(args, exists):
    assert involution_coinvariant_exists(*args) is exists


def test_involution_coinvariant_exists_rejects_bad_signature():
    with pytest.raises(LatticeError):
        involution_coinvariant_exists(5, 4, 1, 0, 1, 1)


def test_lp_bounds():
    """A primitive A_4 in a rank-5 lattice leaves room for one copy of Z/2."""
    assert lp_bounds(5, [4], [2]) == {2: 1}
    assert lp_bounds(2, [], [2, 3]) == {2: 2, 3: 2}


@pytest.mark.parametrize(
    "m,rank,forced,bound",
    [
        (1, 3, (), 1),
        (4, 5, (1,), 1024),
        (9, 4, (2,), 729),
        (10, 5, (4, 1), 50),
        (16, 5, (4,), 16),
    ],
)
def test_det_bound(m, rank, forced, bound):
    assert det_bound(m, rank, forced) == bound


@pytest.mark.parametrize("m,rank,bound", [(4, 3, 64), (6, 3, 216), (8, 2, 64), (9, 2, 81)])
def test_exponent_filter_matches_discriminant_groups(m, rank, bound):
    """Filtering during generation keeps exactly the classes whose N^# is killed by m."""
    dets = m_elementary_dets(m, rank, bound)

    everything = enumerate_definite_even(rank, bound, dets=dets)
    filtered = enumerate_definite_even(rank, bound, dets=dets, exponent=m)

    assert [L.gram for L in filtered] == [L.gram for L in everything if is_m_elementary(L, m)]


@pytest.mark.slow
def test_four_elementary_lattices_of_rank_five():
    found = enumerate_m_elementary(4, ranks=[5], det_bounds={5: 1024})

    assert all(is_m_elementary(L, 4) for L in found)
    for expr in ("D5", "D4+[-2]", "D4+[-4]", "A3+2[-2]", "A3+[-2]+[-4]", "5[-2]",
                 "3[-2]+2[-4]", "2[-2]+3[-4]", "5[-4]"):
        assert _contains(found, expr), expr
