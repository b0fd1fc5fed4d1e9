"""Tests for the classification pipeline, witnesses and the three checks.

Whole-order classifications are marked ``slow``; run them with ``pytest -m slow``
or skip them with ``pytest -m "not slow"``.
"""

import json
import subprocess
import sys
import time

import pytest

from og6_lattice.errors import IsometryError, PipelineError
from og6_lattice.isometries import (
    Isometry,
    are_isometric,
    coinvariant_sublattice,
    identity_isometry,
    is_disc_trivial,
    minus_identity,
    order_of,
    reflection,
)
from og6_lattice.lattice import A, D, Lattice, bL, bR, rank1
from og6_lattice.parser import parse_lattice
from og6_lattice.pipeline import (
    CANDIDATE_ORDERS,
    EXPECTED_ORDERS,
    STAGES,
    admissible_ranks,
    bR_swap,
    bracket_four_complements,
    candidate_lists,
    classify_order,
    compare_with_published,
    cross_check_branches,
    extend_by_swap,
    forced_root_rank,
    invariant_genus_of,
    lambda_f_candidates,
    load_published_table,
    nontrivial_branch,
    synthesize_witness,
    validate_witness,
    verify_theorem1,
    verify_theorem2,
    verify_theorem3,
)

C1 = (0, 0, 0, 0, 0, 0, 1, 0)

ROWS = {
    1: ["0"],
    2: ["[-2]", "2[-2]", "3[-2]", "D4"],
    3: ["A2", "2A2"],
    4: ["A3", "D4", "A3+[-2]", "D5"],
    5: ["A4"],
    6: ["A2+[-2]", "D4", "A2+2[-2]", "2A2+[-2]"],
    8: ["D5"],
    10: ["A4+[-2]"],
}

EXCLUDED_AT = {
    7: "prime",
    9: "isometry",
    15: "isometry",
    16: "isometry",
    20: "isometry",
    24: "isometry",
    25: "isometry",
    30: "divisor",
    40: "divisor",
    60: "divisor",
    120: "divisor",
}

CERTIFICATE_CANDIDATES = {
    9: ["A2", "2A2", "A2+A2(3)"],
    20: ["A4+[-2]"],
}

# Full gluing also admits A3+[-4], which has no order-4 isometry acting trivially on its form.
ORDER_FOUR_WALL_FREE = [
    "[-2]", "[-4]", "2[-2]", "[-2]+[-4]", "2[-4]", "A3", "3[-2]", "2[-2]+[-4]",
    "[-2]+2[-4]", "3[-4]", "D4", "A3+[-2]", "D5", "A3+[-4]",
]

ORDER_FOUR_EMBEDDABLE = ORDER_FOUR_WALL_FREE + [
    "4[-2]", "3[-2]+[-4]", "2[-2]+2[-4]", "[-2]+3[-4]", "D4+[-2]", "D4+[-4]",
    "A3+2[-2]", "A3+[-2]+[-4]", "5[-2]", "3[-2]+2[-4]", "2[-2]+3[-4]",
]


def _swap_c1_c2() -> Isometry:
    rows = [[int(i == j) for j in range(8)] for i in range(8)]
    rows[6], rows[7] = rows[7], rows[6]
    return Isometry(bL(), tuple(tuple(r) for r in rows))


def _same_lattices(found, exprs) -> bool:
    wanted = [parse_lattice(e) for e in exprs]
    if len(found) != len(wanted):
        return False
    return all(
        any(N.rank == X.rank and (N.rank == 0 or are_isometric(N, X)) for X in found)
        for N in wanted
    )


# ---------------------------------------------------------------------------
# Fast checks
# ---------------------------------------------------------------------------


def test_candidate_orders():
    assert set(EXPECTED_ORDERS) < set(CANDIDATE_ORDERS)
    assert set(EXCLUDED_AT) == set(CANDIDATE_ORDERS) - set(EXPECTED_ORDERS)
    assert STAGES[0] == "prime"
    assert STAGES[-1] == "realizable"


def test_admissible_ranks():
    below = {2: (Lattice.zero(),)}

    assert admissible_ranks(2, below) == [1, 2, 3, 4, 5]
    assert admissible_ranks(3, {3: (Lattice.zero(),)}) == [2, 4]
    assert admissible_ranks(5, {5: (Lattice.zero(),)}) == [4]
    assert admissible_ranks(7, {7: (Lattice.zero(),)}) == []


def test_forced_root_rank():
    assert forced_root_rank([A(3), D(4)]) == 3
    assert forced_root_rank([D(5)]) == 4
    assert forced_root_rank([rank1(-2), A(2)]) == 1
    assert forced_root_rank([]) == 0


def test_order_one_is_the_identity():
    report = classify_order(1)

    assert report.realized
    assert report.coinvariants[0].rank == 0
    row = report.rows[0]
    assert row.witness.is_identity()
    assert row.flags.valid
    assert row.invariant_genus.signature == (3, 5)


def test_order_seven_is_excluded_by_rank():
    report = classify_order(7)

    cert = report.certificate()
    assert not report.realized
    assert cert.stage == "prime"
    assert "6" in cert.reason


def test_classify_order_rejects_nonpositive_orders():
    with pytest.raises(IsometryError):
        classify_order(0)


def test_invariant_genus_of_full_gluing_complement():
    assert invariant_genus_of(Lattice.zero()).signature == (3, 5)
    genus = invariant_genus_of(A(2))
    assert genus.signature == (3, 3)
    assert genus.abs_det == 12


def test_synthesized_involution_is_a_valid_witness():
    """-id on a fully glued [-2] extended by the identity is a wall-free involution."""
    N = rank1(-2)

    g = synthesize_witness(N, minus_identity(N))
    check = validate_witness(g, 2, N)

    assert check.ok
    assert check.flags.cond_det
    assert check.flags.disc_trivial
    assert not check.flags.full_wall_free


def test_row_payload_carries_a_canonical_invariant_basis():
    from og6_lattice.linalg import hermite_rows
    from og6_lattice.pipeline import ClassificationRow
    from og6_lattice.validator import validate_for_kind

    N = rank1(-2)
    local = minus_identity(N)
    g = synthesize_witness(N, local)
    row = ClassificationRow(2, N, invariant_genus_of(N), g, local, validate_witness(g, 2, N).flags)

    basis = row.invariant_basis
    assert len(basis) == 7
    assert hermite_rows(basis) == basis
    for v in basis:
        assert list(g.apply(v)) == v

    payload = row.to_dict()
    validate_for_kind(payload, kind="row")
    assert payload["invariant_basis"] == basis


def test_validate_witness_rejects_wrong_order():
    check = validate_witness(identity_isometry(bL()), 2)

    assert not check.ok
    assert "order is 1, expected 2" in check.failures()


def test_validate_witness_rejects_reflection_in_c1():
    """The root c1 has even divisibility, so its reflection meets an exceptional wall."""
    check = validate_witness(reflection(bL(), C1), 2, rank1(-2))

    assert check.coinvariant_matches
    assert not check.flags.pex_wall_free
    assert not check.flags.cond_det
    assert not check.ok
    assert "pex_wall_free fails" in check.failures()


def test_validate_witness_rejects_wrong_coinvariant():
    N = rank1(-2)
    g = synthesize_witness(N, minus_identity(N))

    check = validate_witness(g, 2, A(2))

    assert not check.coinvariant_matches
    assert not check.ok


def test_validate_witness_rejects_swapping_c1_and_c2():
    """The swap of c1 and c2 is an involution exchanging the two classes of bL^#."""
    g = _swap_c1_c2()

    check = validate_witness(g, 2)

    assert check.actual_order == 2
    assert not is_disc_trivial(g)
    assert not check.flags.disc_trivial
    assert not check.ok
    assert "disc_trivial fails" in check.failures()


def test_bR_swap_has_coinvariant_bracket_four():
    co, basis = coinvariant_sublattice(bR(), bR_swap())

    assert [list(row) for row in co.gram] == [[4]]
    assert len(basis) == 1


def test_swap_of_c1_and_c2_extends_to_an_involution_of_5u():
    """Glued with the swap of bR, the coinvariant [-4] + [4] saturates to U(2)."""
    from og6_lattice.genus import two_elementary_invariants

    f = extend_by_swap(_swap_c1_c2())

    assert f.lattice.signature == (5, 5)
    assert abs(f.lattice.det) == 1
    assert order_of(f) == 2
    co, _ = coinvariant_sublattice(f.lattice, f)
    assert co.signature == (1, 1)
    assert two_elementary_invariants(co) == (2, 2, 0)


def test_extend_by_swap_needs_a_nontrivial_class_action():
    """The identity on bL^# is incompatible with the swap on bR^#."""
    with pytest.raises(PipelineError):
        extend_by_swap(identity_isometry(bL()))


def test_validate_witness_needs_the_host():
    with pytest.raises(PipelineError):
        validate_witness(identity_isometry(A(2)), 1)


def test_lambda_f_candidates():
    """Twelve hyperbolic 2-elementary lattices occur as coinvariant lattices in 5U."""
    from og6_lattice.genus import two_elementary_invariants

    found = lambda_f_candidates()

    assert len(found) == 12
    assert all(L.signature[0] == 1 for L in found)
    assert len({two_elementary_invariants(L) for L in found}) == 12


def test_published_table():
    table = load_published_table()

    assert len(table) == 19
    assert {entry["order"] for entry in table} == EXPECTED_ORDERS
    for entry in table:
        N = parse_lattice(str(entry["coinvariant"]))
        assert entry["invariant_signature"] == [3, 5 - N.rank]
        assert entry["invariant_det"] == 4 * abs(N.det)


def test_compare_with_published_reports_missing_rows():
    published = load_published_table()[:2]

    findings = compare_with_published([], published)

    assert findings == [
        "missing: order 1, coinvariant 0",
        "missing: order 2, coinvariant [-2]",
    ]


# ---------------------------------------------------------------------------
# Whole-order classification
# ---------------------------------------------------------------------------


@pytest.mark.slow
@pytest.mark.parametrize("order", sorted(ROWS))
def test_realized_coinvariants(order):
    report = classify_order(order)

    assert _same_lattices(report.coinvariants, ROWS[order])
    for row in report.rows:
        assert row.flags.valid
        assert validate_witness(row.witness, order, row.coinvariant).ok


@pytest.mark.slow
def test_order_twelve_rows():
    """D5 and A3+A2, the latter carrying the product of Coxeter elements of A3 and A2."""
    report = classify_order(12)

    assert _same_lattices(report.coinvariants, ["D5", "A3+A2"])
    for row in report.rows:
        assert validate_witness(row.witness, 12, row.coinvariant).ok


@pytest.mark.slow
@pytest.mark.parametrize("order,stage", sorted(EXCLUDED_AT.items()))
def test_exclusion_certificates(order, stage):
    report = classify_order(order)

    cert = report.certificate()
    assert cert is not None
    assert cert.stage == stage
    assert cert.reason


@pytest.mark.slow
@pytest.mark.parametrize("order", sorted(CERTIFICATE_CANDIDATES))
def test_exclusion_certificate_candidates(order):
    """The lattices that reach the isometry stage and carry no isometry of that order."""
    cert = classify_order(order).certificate()

    assert cert.stage == "isometry"
    assert _same_lattices(cert.candidates, CERTIFICATE_CANDIDATES[order])


@pytest.mark.slow
def test_order_four_candidate_lists():
    """25 lattices embed into bL, 14 of them without meeting a wall, 4 are realized."""
    lists = candidate_lists(4)

    assert len(lists.embeddable) == 25
    assert _same_lattices(lists.embeddable, ORDER_FOUR_EMBEDDABLE)
    assert len(lists.wall_free) == 14
    assert _same_lattices(lists.wall_free, ORDER_FOUR_WALL_FREE)
    assert _same_lattices(lists.realized, ROWS[4])


@pytest.mark.slow
def test_pex_walls_detect_full_gluing_for_order_four_candidates():
    """Over every embedding type of every candidate: wall-free iff |det N^perp| = 4 |det N|."""
    from og6_lattice.embeddings import (
        embedding_types,
        satisfies_divisibility_hypothesis,
        wall_intersection_pex,
    )

    for N in candidate_lists(4).embeddable:
        assert satisfies_divisibility_hypothesis(N)
        types = embedding_types(N, bL())
        assert types
        for t in types:
            full = t.complement_genus.abs_det == 4 * abs(N.det)
            assert wall_intersection_pex(t) == (not full), str(t)
            assert t.is_full_gluing == full


@pytest.mark.slow
def test_every_row_satisfies_the_lattice_identities(classification):
    """Index relations, m-elementarity, spinor norm and the determinant condition per row."""
    from sympy import isprime

    from og6_lattice import fqf
    from og6_lattice.embeddings import standard_full_gluing_embedding, wall_intersection_pex
    from og6_lattice.isometries import index_identity_holds, spinor_norm

    for row in classification.rows:
        N, g = row.coinvariant, row.witness
        assert index_identity_holds(g)
        assert spinor_norm(g) == 1
        assert row.invariant_genus.abs_det == 4 * abs(N.det)
        assert row.order % fqf.discriminant_group(N).exponent == 0
        if isprime(row.order):
            assert N.rank % (row.order - 1) == 0
        if N.rank == 0:
            continue
        emb = standard_full_gluing_embedding(N)
        assert emb.identities_hold()
        assert emb.gluing_index * emb.embedding_index == abs(N.det)
        assert emb.reconstructs_host()
        assert not wall_intersection_pex(emb)


@pytest.mark.slow
def test_full_classification_finishes_within_fifteen_minutes():
    """``og6 classify --all`` in a fresh process, single worker."""
    script = "from og6_lattice.cli import app; app()"
    start = time.monotonic()

    result = subprocess.run(
        [sys.executable, "-c", script, "classify", "--all", "--format", "json"],
        capture_output=True, text=True, timeout=900, check=False,
    )

    elapsed = time.monotonic() - start
    assert result.returncode == 0, result.stderr
    assert elapsed < 900
    payload = json.loads(result.stdout)
    assert payload["realized_orders"] == sorted(EXPECTED_ORDERS)


@pytest.mark.slow
def test_classification(classification):
    assert classification.realized_orders == EXPECTED_ORDERS
    assert {c.order for c in classification.certificates} == set(EXCLUDED_AT)
    ranks = [row.coinvariant.rank for row in classification.rows]
    assert ranks == sorted(ranks)


@pytest.mark.slow
def test_parallel_classification_matches_serial(classification):
    from og6_lattice.pipeline import assemble_theorem, clear_cache

    clear_cache()
    parallel = assemble_theorem(jobs=2)

    assert parallel.to_dict() == classification.to_dict()


@pytest.mark.slow
def test_theorem_one(classification):
    verdict = verify_theorem1(classification.rows)

    assert verdict.passed
    assert all(e["root"] is not None for e in verdict.evidence if e["order"] > 1)


@pytest.mark.slow
def test_bracket_four_complements():
    assert len(bracket_four_complements()) == 10


@pytest.mark.slow
def test_nontrivial_order_two_branch_is_empty():
    assert nontrivial_branch() == ()


@pytest.mark.slow
def test_order_two_trace_records_the_branch_cross_check():
    report = classify_order(2)

    note = report.stage("realizable").note
    assert note == "nontrivial bL^# branch: 10 complements of [4], 0 wall-free involutions"
    assert note == cross_check_branches(report.rows, nontrivial_branch())


@pytest.mark.slow
def test_theorem_two(classification):
    verdict = verify_theorem2(classification.rows)

    assert verdict.passed
    assert verdict.findings[0].startswith("order-2 branch: 10 complements")


@pytest.mark.slow
def test_theorem_three(classification):
    verdict = verify_theorem3(classification)

    assert verdict.passed
    assert all(e["cond_det"] and e["witness_valid"] for e in verdict.evidence)
