"""Tests for payloads, tables and written reports."""

import json

import pytest
from rich.console import Console

from og6_lattice.lattice import A, bL, rank1
from og6_lattice.pipeline import assemble_theorem
from og6_lattice.report import (
    certificates_table,
    classification_payload,
    lattice_payload,
    render_markdown,
    rows_table,
    to_json,
    write_report,
)
from og6_lattice.validator import validate_for_kind


def _render(table) -> str:
    console = Console(width=200, record=True)
    console.print(table)
    return console.export_text()


def test_lattice_payload():
    info = lattice_payload(bL())

    assert info["name"] == "3U+2[-2]"
    assert info["det"] == -4
    assert info["signature"] == [3, 5]
    assert info["invariants"] == [2, 2]
    assert info["parity"] == 1
    assert info["lengths"] == {"2": 2}


def test_lattice_payload_of_a2():
    info = lattice_payload(A(2))

    assert info["disc_form"] == {"orders": [3], "q_matrix": [["4/3"]]}
    assert info["lengths"] == {"3": 1}


def test_json_is_stable():
    payload = lattice_payload(rank1(-2))

    assert to_json(payload) == to_json(json.loads(to_json(payload)))


@pytest.fixture
def small_classification():
    """Orders 1, 2 and 7: two realized, one excluded."""
    return assemble_theorem([1, 2, 7])


@pytest.mark.slow
def test_classification_payload(small_classification):
    payload = classification_payload(small_classification, trace=True)

    validate_for_kind(payload, kind="report")
    assert payload["realized_orders"] == [1, 2]
    assert [c["order"] for c in payload["certificates"]] == [7]
    assert [o["order"] for o in payload["orders"]] == [1, 2, 7]


@pytest.mark.slow
def test_tables(small_classification):
    rows = _render(rows_table(small_classification.rows))
    certs = _render(certificates_table(small_classification.certificates))

    assert "D4" in rows
    assert "(3,5) Z/2 x Z/2" in rows
    assert "prime" in certs


@pytest.mark.slow
def test_write_report(small_classification, tmp_path):
    md = write_report(small_classification, tmp_path / "report.md", "markdown")
    js = write_report(small_classification, tmp_path / "report.json", "json")

    assert md.read_text(encoding="utf-8") == render_markdown(small_classification)
    assert "Realized orders: 1, 2" in md.read_text(encoding="utf-8")
    assert json.loads(js.read_text(encoding="utf-8"))["realized_orders"] == [1, 2]
    with pytest.raises(ValueError, match="unknown report format"):
        write_report(small_classification, tmp_path / "report.txt", "html")
