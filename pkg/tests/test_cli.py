"""Tests for the og6 command-line interface."""

import json

import pytest
from typer.testing import CliRunner

from og6_lattice import __version__
from og6_lattice.cli import app

runner = CliRunner()


def test_version():
    result = runner.invoke(app, ["--version"])

    assert result.exit_code == 0
    assert __version__ in result.output


def test_lattice_info_json():
    result = runner.invoke(app, ["lattice-info", "3U+2[-2]", "--format", "json"])

    assert result.exit_code == 0
    info = json.loads(result.stdout)
    assert info["det"] == -4
    assert info["signature"] == [3, 5]
    assert info["invariants"] == [2, 2]


def test_lattice_info_table():
    result = runner.invoke(app, ["lattice-info", "A2"])

    assert result.exit_code == 0
    assert "Z/3" in result.stdout


def test_lattice_info_parse_error():
    result = runner.invoke(app, ["lattice-info", "A0"])

    assert result.exit_code == 2
    assert "Error" in result.output


def test_lattice_info_gram_file(tmp_path):
    path = tmp_path / "d4.txt"
    path.write_text("-2 1 0 0\n1 -2 1 1\n0 1 -2 0\n0 1 0 -2\n", encoding="utf-8")

    result = runner.invoke(app, ["lattice-info", f"@{path}", "--format", "json"])

    assert result.exit_code == 0
    assert json.loads(result.stdout)["det"] == 4


def test_lattice_info_corpus(corpus_path):
    result = runner.invoke(app, ["lattice-info", "--corpus", str(corpus_path)])

    assert result.exit_code == 0
    assert "mismatch" not in result.stdout


def test_lattice_info_corpus_mismatch(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("lattices:\n  - {expr: A2, rank: 2, det: 4}\n", encoding="utf-8")

    result = runner.invoke(app, ["lattice-info", "--corpus", str(path)])

    assert result.exit_code == 1


def test_bad_format():
    result = runner.invoke(app, ["lattice-info", "A2", "--format", "xml"])

    assert result.exit_code == 2


def test_enumerate_json():
    result = runner.invoke(app, ["enumerate", "2", "--rank", "2", "--format", "json"])

    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    assert len(lines) == 1
    entry = json.loads(lines[0])
    assert entry == {"gram": [[-2, 0], [0, -2]], "det": 4, "disc_orders": [2, 2], "parity": 1}


def test_enumerate_json_streams_one_line_per_lattice():
    """Lattices with 4 N^# = 0 up to rank 2, one JSON object per line."""
    from og6_lattice.validator import validate_for_kind

    result = runner.invoke(app, ["--max-rank", "2", "enumerate", "4", "--format", "json"])

    assert result.exit_code == 0
    entries = [json.loads(line) for line in result.stdout.splitlines()]
    assert [e["det"] for e in entries] == [2, 4, 4, 8, 16]
    for entry in entries:
        assert list(entry) == ["gram", "det", "disc_orders", "parity"]
        validate_for_kind(entry, kind="enumerated")
    assert entries[0]["disc_orders"] == [2]
    assert entries[-1]["disc_orders"] == [4, 4]


def test_enumerate_budget_exit_code():
    """A rank beyond --max-rank is refused with exit code 3."""
    result = runner.invoke(app, ["--max-rank", "1", "enumerate", "2", "--rank", "2"])

    assert result.exit_code == 3
    assert "Budget exceeded" in result.output


def test_embed_json():
    result = runner.invoke(app, ["embed", "A2", "--format", "json"])

    assert result.exit_code == 0
    payload = json.loads(result.stdout)
    assert payload["host"] == "3U+2[-2]"
    assert all(t["full_gluing"] for t in payload["types"])
    assert payload["explicit"]["h"] == 3


def test_embed_into_definite_host():
    result = runner.invoke(app, ["embed", "A3", "D4", "--format", "json"])

    assert result.exit_code == 0
    assert json.loads(result.stdout)["types"]


def test_embed_without_room_exits_one():
    result = runner.invoke(app, ["embed", "[-4]", "A2"])

    assert result.exit_code == 1


def test_isometries_none_found():
    result = runner.invoke(
        app, ["isometries", "D4", "--order", "8", "--fixed-rank", "0", "--disc", "trivial"]
    )

    assert result.exit_code == 1
    assert "none" in result.stdout


def test_isometries_json():
    result = runner.invoke(
        app, ["isometries", "A2", "--order", "6", "--fixed-rank", "0", "--format", "json"]
    )

    assert result.exit_code == 0
    payload = json.loads(result.stdout)
    assert payload["count"] == 2
    assert len(payload["isometries"]) == 2


def test_isometries_bad_constraint():
    result = runner.invoke(app, ["isometries", "A2", "--order", "2", "--disc", "trivial_on_p"])

    assert result.exit_code == 2


def test_classify_needs_one_selector():
    assert runner.invoke(app, ["classify"]).exit_code == 2
    assert runner.invoke(app, ["classify", "--order", "2", "--all"]).exit_code == 2


def test_classify_excluded_order():
    result = runner.invoke(app, ["classify", "--order", "7", "--format", "json", "--trace"])

    assert result.exit_code == 1
    payload = json.loads(result.stdout)
    assert payload["realized_orders"] == []
    assert payload["certificates"][0]["stage"] == "prime"
    assert payload["orders"][0]["order"] == 7


def test_verify_rejects_unknown_theorem():
    assert runner.invoke(app, ["verify", "--theorem", "4"]).exit_code == 2


def test_report_rejects_unknown_format():
    assert runner.invoke(app, ["report", "--format", "html"]).exit_code == 2


@pytest.mark.slow
def test_classify_order_two_table():
    result = runner.invoke(app, ["classify", "--order", "2"])

    assert result.exit_code == 0
    assert "D4" in result.stdout


@pytest.mark.slow
def test_verify_theorem_three():
    result = runner.invoke(app, ["verify", "--theorem", "3"])

    assert result.exit_code == 0
    assert "realized orders: {1, 2, 3, 4, 5, 6, 8, 10, 12}" in result.stdout
    assert "PASS" in result.stdout


@pytest.mark.slow
def test_report_markdown_file(tmp_path):
    out = tmp_path / "table.md"

    result = runner.invoke(app, ["report", "--format", "markdown", "-o", str(out)])

    assert result.exit_code == 0
    assert out.read_text(encoding="utf-8").startswith("# Wall-free")
