"""Rendering of lattices, embeddings and classification results.

JSON payloads are plain dicts in a fixed key order so repeated runs print
identical bytes. Tables follow the published layout: order, genus of the
invariant lattice, coinvariant lattice, example matrix.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Sequence
from pathlib import Path

from rich.table import Table

from . import fqf
from .embeddings import EmbeddingType, PrimitiveEmbedding
from .genus import primes_of
from .isometries import Isometry, IsometryConstraints
from .lattice import Lattice
from .pipeline import Classification, ClassificationRow, ExclusionCertificate, Verdict


def lattice_payload(L: Lattice) -> dict:
    q = fqf.discriminant_group(L)
    primes = primes_of(q.exponent)
    return {
        "name": L.label(),
        "gram": [list(r) for r in L.gram],
        "rank": L.rank,
        "det": L.det,
        "signature": list(L.signature),
        "disc_form": q.to_dict(),
        "invariants": list(q.invariants),
        "parity": fqf.parity(q),
        "lengths": {str(p): fqf.p_length(q, p) for p in primes},
    }


def enumeration_line(L: Lattice) -> dict:
    """One ``og6 enumerate`` JSON line: Gram matrix, determinant and discriminant shape."""
    q = fqf.discriminant_group(L)
    return {
        "gram": [list(r) for r in L.gram],
        "det": L.det,
        "disc_orders": list(q.invariants),
        "parity": fqf.parity(q),
    }


def embedding_payload(
    source: Lattice,
    host: Lattice,
    types: Iterable[EmbeddingType | PrimitiveEmbedding],
    explicit: PrimitiveEmbedding | None = None,
    *,
    full_gluing_only: bool = False,
) -> dict:
    entries = []
    for t in types:
        if isinstance(t, EmbeddingType):
            signature, disc = t.complement_genus.signature, t.complement_genus.disc_form
        else:
            signature, disc = t.complement.signature, fqf.discriminant_group(t.complement)
        entries.append({
            "h": t.gluing_index,
            "k": t.embedding_index,
            "full_gluing": t.is_full_gluing,
            "complement_signature": list(signature),
            "complement_disc": disc.to_dict(),
        })
    return {
        "source": str(source),
        "host": str(host),
        "full_gluing_only": full_gluing_only,
        "types": entries,
        "explicit": explicit.to_dict() if explicit is not None else None,
    }


def isometry_payload(
    N: Lattice, constraints: IsometryConstraints, found: Sequence[Isometry]
) -> dict:
    return {
        "lattice": str(N),
        "gram": [list(r) for r in N.gram],
        "constraints": {
            "order": constraints.order,
            "fixed_rank": constraints.fixed_rank,
            "disc": constraints.disc,
            "p": constraints.p,
        },
        "count": len(found),
        "isometries": [[list(r) for r in g.matrix] for g in found],
    }


def classification_payload(classification: Classification, *, trace: bool = False) -> dict:
    payload = classification.to_dict()
    if trace:
        payload["orders"] = [r.to_dict() for r in classification.reports]
    return payload


def to_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False)


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------


def _genus_label(row: ClassificationRow) -> str:
    s_plus, s_minus = row.invariant_genus.signature
    q = row.invariant_genus.disc_form
    group = " x ".join(f"Z/{d}" for d in q.invariants) or "0"
    return f"({s_plus},{s_minus}) {group}"


def _matrix_label(g: Isometry) -> str:
    return "\n".join(" ".join(f"{x:>2}" for x in row) for row in g.matrix)


def rows_table(rows: Sequence[ClassificationRow], *, matrices: bool = True) -> Table:
    table = Table(title="Wall-free isometries of 3U + 2[-2]", show_header=True,
                  header_style="bold cyan", show_lines=matrices)
    table.add_column("ord", justify="right", style="cyan")
    table.add_column("invariant genus")
    table.add_column("coinvariant")
    table.add_column("rank", justify="right")
    if matrices:
        table.add_column("example")
    for row in rows:
        cells = [str(row.order), _genus_label(row), str(row.coinvariant),
                 str(row.coinvariant.rank)]
        if matrices:
            cells.append(_matrix_label(row.witness))
        table.add_row(*cells)
    return table


def certificates_table(certificates: Sequence[ExclusionCertificate]) -> Table:
    table = Table(title="Excluded orders", show_header=True, header_style="bold cyan")
    table.add_column("ord", justify="right", style="cyan")
    table.add_column("stage")
    table.add_column("candidates")
    table.add_column("reason")
    for c in certificates:
        table.add_row(str(c.order), c.stage, ", ".join(map(str, c.candidates)) or "-", c.reason)
    return table


def verdict_table(verdict: Verdict) -> Table:
    status = "[green]PASS[/green]" if verdict.passed else "[red]FAIL[/red]"
    table = Table(title=f"Theorem {verdict.theorem}: {status}", show_header=True,
                  header_style="bold cyan")
    keys = list(verdict.evidence[0]) if verdict.evidence else []
    for key in keys:
        table.add_column(key)
    for entry in verdict.evidence:
        table.add_row(*("-" if entry[k] is None else str(entry[k]) for k in keys))
    return table


# ---------------------------------------------------------------------------
# Markdown
# ---------------------------------------------------------------------------


def render_markdown(classification: Classification) -> str:
    lines = ["# Wall-free finite-order isometries of 3U + 2[-2]", ""]
    lines.append("Realized orders: " + ", ".join(map(str, sorted(classification.realized_orders))))
    lines += ["", "| ord | invariant genus | coinvariant | rank |", "|---|---|---|---|"]
    for row in classification.rows:
        lines.append(f"| {row.order} | {_genus_label(row)} | {row.coinvariant} | "
                     f"{row.coinvariant.rank} |")
    lines += ["", "## Excluded orders", ""]
    for c in classification.certificates:
        candidates = ", ".join(map(str, c.candidates)) or "none"
        lines.append(f"- **{c.order}** ({c.stage}): {c.reason}; candidates: {candidates}")
    lines += ["", "## Example matrices", ""]
    for row in classification.rows:
        lines += [f"### order {row.order}, {row.coinvariant}", "", "```",
                  _matrix_label(row.witness), "```", ""]
    return "\n".join(lines).rstrip() + "\n"


def write_report(classification: Classification, path: Path, fmt: str) -> Path:
    if fmt == "json":
        text = to_json(classification_payload(classification)) + "\n"
    elif fmt == "markdown":
        text = render_markdown(classification)
    else:
        raise ValueError(f"unknown report format: {fmt!r} (expected 'json' or 'markdown')")
    path.write_text(text, encoding="utf-8")
    return path


__all__ = [
    "certificates_table",
    "classification_payload",
    "embedding_payload",
    "enumeration_line",
    "isometry_payload",
    "lattice_payload",
    "render_markdown",
    "rows_table",
    "to_json",
    "verdict_table",
    "write_report",
]
