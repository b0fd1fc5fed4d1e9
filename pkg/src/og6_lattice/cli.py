"""Command-line interface for og6-lattice."""

from __future__ import annotations

import json
import logging
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

import typer
import yaml
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.panel import Panel
from rich.table import Table

from . import __version__, fqf
from .config import settings
from .embeddings import (
    embedding_from_basis,
    embedding_types,
    primitive_copies,
    standard_full_gluing_embedding,
)
from .errors import BudgetExceededError, Og6Error, ParseError, PipelineError
from .genus import enumerate_m_elementary
from .isometries import IsometryConstraints, are_isometric, search_isometries
from .lattice import bL
from .parser import parse_lattice
from .pipeline import (
    CANDIDATE_ORDERS,
    assemble_theorem,
    verify_theorem1,
    verify_theorem2,
    verify_theorem3,
)
from .report import (
    certificates_table,
    classification_payload,
    embedding_payload,
    enumeration_line,
    isometry_payload,
    lattice_payload,
    render_markdown,
    rows_table,
    to_json,
    verdict_table,
    write_report,
)
from .validator import validate_for_kind

app = typer.Typer(
    name="og6",
    help="Finite-order isometries of the lattice 3U + 2[-2]",
    add_completion=False,
)
console = Console()
err_console = Console(stderr=True)

FORMATS = ("json", "table")


def version_callback(value: bool):
    """Print version and exit."""
    if value:
        console.print(f"og6-lattice version {__version__}")
        raise typer.Exit()


def _configure_logging(verbose: int) -> None:
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = getattr(logging, settings.log_level.upper(), logging.WARNING)
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


@app.callback()
def main(
    version: bool = typer.Option(
        None, "--version", callback=version_callback, is_eager=True,
        help="Show version and exit",
    ),
    verbose: int = typer.Option(
        0, "-v", "--verbose", count=True, help="-v for progress, -vv for every decision"
    ),
    max_rank: int = typer.Option(None, "--max-rank", min=1, help="Largest rank enumerated"),
    max_det: int = typer.Option(None, "--max-det", min=1, help="Largest |det| enumerated"),
    group_budget: int = typer.Option(
        None, "--group-budget", min=1, help="Largest isometry group enumerated"
    ),
):
    """og6-lattice: lattice tools and the classification of wall-free isometries of 3U + 2[-2]."""
    _configure_logging(verbose)
    if max_rank is not None:
        settings.max_rank = max_rank
    if max_det is not None:
        settings.max_det = max_det
    if group_budget is not None:
        settings.group_budget = group_budget


@contextmanager
def _errors() -> Iterator[None]:
    """Map package errors onto exit codes: 2 for bad input, 3 for budgets."""
    try:
        yield
    except ParseError as exc:
        err_console.print(f"[red]Error:[/red] {escape(str(exc))}")
        raise typer.Exit(code=2) from exc
    except BudgetExceededError as exc:
        err_console.print(f"[red]Budget exceeded:[/red] {escape(str(exc))}")
        raise typer.Exit(code=3) from exc
    except PipelineError as exc:
        err_console.print(f"[red]Internal contradiction:[/red] {escape(str(exc))}")
        raise typer.Exit(code=1) from exc
    except (Og6Error, ValueError) as exc:
        err_console.print(f"[red]Error:[/red] {escape(str(exc))}")
        raise typer.Exit(code=2) from exc


def _check_format(fmt: str) -> None:
    if fmt not in FORMATS:
        err_console.print(f"[red]Error:[/red] format must be one of {', '.join(FORMATS)}")
        raise typer.Exit(code=2)


def _emit(payload: dict, kind: str) -> None:
    validate_for_kind(payload, kind=kind)
    typer.echo(to_json(payload))


# ---------------------------------------------------------------------------
# Lattices
# ---------------------------------------------------------------------------


def _lattice_table(info: dict) -> Table:
    table = Table(show_header=False, box=None)
    table.add_column("key", style="cyan")
    table.add_column("value")
    table.add_row("rank", str(info["rank"]))
    table.add_row("det", str(info["det"]))
    table.add_row("signature", str(tuple(info["signature"])))
    table.add_row("discriminant", " x ".join(f"Z/{d}" for d in info["invariants"]) or "0")
    table.add_row("parity", "odd" if info["parity"] else "even")
    lengths = ", ".join(f"l_{p} = {n}" for p, n in info["lengths"].items())
    table.add_row("lengths", lengths or "-")
    return table


def _check_corpus(path: Path) -> bool:
    with path.open(encoding="utf-8") as fh:
        entries = yaml.safe_load(fh)["lattices"]
    table = Table(title=f"Corpus {path.name}", show_header=True, header_style="bold cyan")
    for column in ("expr", "rank", "det", "signature", "status"):
        table.add_column(column)
    ok = True
    for entry in entries:
        info = lattice_payload(parse_lattice(entry["expr"]))
        expected = {k: entry[k] for k in ("rank", "det", "signature", "invariants") if k in entry}
        good = all(info[k] == v for k, v in expected.items())
        ok = ok and good
        table.add_row(entry["expr"], str(info["rank"]), str(info["det"]),
                      str(tuple(info["signature"])),
                      "[green]ok[/green]" if good else "[red]mismatch[/red]")
    console.print(table)
    return ok


@app.command("lattice-info")
def lattice_info(
    expr: str = typer.Argument(None, help="Lattice expression such as 3U+2[-2], or @file"),
    fmt: str = typer.Option("table", "--format", "-f", help="json or table"),
    corpus: Path = typer.Option(None, "--corpus", help="YAML corpus of expected invariants"),
):
    """Rank, determinant, signature and discriminant form of a lattice."""
    _check_format(fmt)
    with _errors():
        if corpus is not None:
            if not _check_corpus(corpus):
                raise typer.Exit(code=1)
            return
        if expr is None:
            err_console.print("[red]Error:[/red] give a lattice expression or --corpus")
            raise typer.Exit(code=2)
        L = parse_lattice(expr)
        info = lattice_payload(L)
        if fmt == "json":
            _emit(info, "lattice")
            return
        console.print(Panel.fit(f"[bold]{L}[/bold]", border_style="blue"))
        console.print(_lattice_table(info))
        console.print(f"[dim]discriminant form: {fqf.discriminant_group(L)}[/dim]")


@app.command("enumerate")
def enumerate_cmd(
    m: int = typer.Argument(..., min=1, help="Exponent: list lattices with m N^# = 0"),
    rank: int = typer.Option(None, "--rank", "-r", min=1, help="Only this rank"),
    det_bound: int = typer.Option(None, "--det-bound", min=1, help="Cap on |det|"),
    positive: bool = typer.Option(False, "--positive", help="Positive instead of negative"),
    fmt: str = typer.Option("table", "--format", "-f", help="json or table"),
):
    """Definite even m-elementary lattices of bounded rank, up to isometry."""
    _check_format(fmt)
    with _errors():
        ranks = [rank] if rank is not None else None
        bounds = None
        if det_bound is not None:
            bounds = {r: det_bound for r in range(1, settings.max_rank + 1)}
        found = enumerate_m_elementary(
            m, signature_constraint="positive" if positive else "negative",
            det_bounds=bounds, ranks=ranks,
        )
    if fmt == "json":
        # one compact object per line
        for L in found:
            line = enumeration_line(L)
            validate_for_kind(line, kind="enumerated")
            typer.echo(json.dumps(line))
    else:
        table = Table(title=f"{m}-elementary lattices", show_header=True,
                      header_style="bold cyan")
        for column in ("lattice", "rank", "|det|", "discriminant"):
            table.add_column(column)
        for L in found:
            q = fqf.discriminant_group(L)
            table.add_row(str(L), str(L.rank), str(abs(L.det)),
                          " x ".join(f"Z/{d}" for d in q.invariants) or "0")
        console.print(table)
    if not found:
        raise typer.Exit(code=1)


# ---------------------------------------------------------------------------
# Embeddings and isometries
# ---------------------------------------------------------------------------


@app.command("embed")
def embed(
    source: str = typer.Argument(..., help="Lattice to embed"),
    host: str = typer.Argument("3U+2[-2]", help="Host lattice"),
    full_gluing: bool = typer.Option(False, "--full-gluing", help="Only full-gluing embeddings"),
    fmt: str = typer.Option("table", "--format", "-f", help="json or table"),
):
    """Primitive embeddings of SOURCE into HOST, up to the host's discriminant isometries."""
    _check_format(fmt)
    with _errors():
        M, L = parse_lattice(source), parse_lattice(host)
        if L.is_definite:
            types = []
            for rows in primitive_copies(M, L):
                emb = embedding_from_basis(L, rows)
                if not any(e.gluing_index == emb.gluing_index
                           and are_isometric(e.complement, emb.complement) for e in types):
                    types.append(emb)
        else:
            types = list(embedding_types(M, L))
        if full_gluing:
            types = [t for t in types if t.is_full_gluing]
        explicit = None
        if (L.gram == bL().gram and M.is_negative_definite and M.rank <= 5
                and any(t.is_full_gluing for t in types)):
            explicit = standard_full_gluing_embedding(M)
    payload = embedding_payload(M, L, types, explicit, full_gluing_only=full_gluing)
    if fmt == "json":
        _emit(payload, "embedding")
    else:
        table = Table(title=f"{M} -> {L}", show_header=True, header_style="bold cyan")
        for column in ("h", "k", "full gluing", "complement signature", "complement disc"):
            table.add_column(column)
        for entry in payload["types"]:
            orders = entry["complement_disc"]["orders"]
            table.add_row(str(entry["h"]), str(entry["k"]),
                          "yes" if entry["full_gluing"] else "no",
                          str(tuple(entry["complement_signature"])),
                          " x ".join(f"Z/{d}" for d in orders) or "0")
        console.print(table)
        if explicit is not None:
            console.print("[dim]explicit image basis:[/dim]")
            for v in explicit.image:
                console.print("  " + " ".join(f"{x:>3}" for x in v))
    if not types:
        raise typer.Exit(code=1)


@app.command("isometries")
def isometries(
    lattice: str = typer.Argument(..., help="Definite lattice"),
    order: int = typer.Option(..., "--order", min=1, help="Exact order"),
    fixed_rank: int = typer.Option(None, "--fixed-rank", min=0, help="Rank of the fixed lattice"),
    disc: str = typer.Option("unconstrained", "--disc",
                             help="unconstrained, trivial or trivial_on_p"),
    p: int = typer.Option(None, "--p", help="Prime for --disc trivial_on_p"),
    limit: int = typer.Option(10, "--limit", min=0, help="Matrices to print (0 for all)"),
    fmt: str = typer.Option("table", "--format", "-f", help="json or table"),
):
    """Isometries of a definite lattice with the given order and constraints."""
    _check_format(fmt)
    with _errors():
        N = parse_lattice(lattice)
        constraints = IsometryConstraints(order=order, fixed_rank=fixed_rank, disc=disc, p=p)
        found = search_isometries(N, constraints)
    shown = found if limit == 0 else found[:limit]
    if fmt == "json":
        payload = isometry_payload(N, constraints, shown)
        payload["count"] = len(found)
        _emit(payload, "isometry")
    elif not found:
        console.print("none")
    else:
        console.print(f"[bold]{len(found)}[/bold] isometries of {N} of order {order}")
        for g in shown:
            console.print("\n".join("  " + " ".join(f"{x:>3}" for x in row) for row in g.matrix))
            console.print()
    if not found:
        raise typer.Exit(code=1)


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


@app.command("classify")
def classify(
    order: int = typer.Option(None, "--order", "-m", min=1, help="A single order"),
    all_orders: bool = typer.Option(False, "--all", help="Every candidate order"),
    jobs: int = typer.Option(None, "--jobs", "-j", min=1, help="Worker processes"),
    trace: bool = typer.Option(False, "--trace", help="Include per-stage candidate lists"),
    fmt: str = typer.Option("table", "--format", "-f", help="json or table"),
):
    """Classify wall-free isometries of 3U + 2[-2] of one order or of all orders."""
    _check_format(fmt)
    if (order is None) == (not all_orders):
        err_console.print("[red]Error:[/red] give exactly one of --order and --all")
        raise typer.Exit(code=2)
    with _errors():
        orders = CANDIDATE_ORDERS if all_orders else (order,)
        classification = assemble_theorem(orders, jobs=jobs)
    if fmt == "json":
        _emit(classification_payload(classification, trace=trace), "report")
    else:
        if classification.rows:
            console.print(rows_table(classification.rows, matrices=False))
        if classification.certificates:
            console.print(certificates_table(classification.certificates))
        if trace:
            for report in classification.reports:
                for stage in report.trace:
                    names = ", ".join(map(str, stage.survivors)) or "-"
                    console.print(f"[cyan]{report.order}[/cyan] {stage.stage}: {names}")
    if not classification.rows:
        raise typer.Exit(code=1)


@app.command("verify")
def verify(
    theorem: int = typer.Option(..., "--theorem", "-t", min=1, max=3, help="1, 2 or 3"),
    jobs: int = typer.Option(None, "--jobs", "-j", min=1, help="Worker processes"),
    fmt: str = typer.Option("table", "--format", "-f", help="json or table"),
):
    """Check one of the three statements against the computed classification."""
    _check_format(fmt)
    with _errors():
        classification = assemble_theorem(jobs=jobs)
        if theorem == 1:
            verdict = verify_theorem1(classification.rows)
        elif theorem == 2:
            verdict = verify_theorem2(classification.rows)
        else:
            verdict = verify_theorem3(classification)
    if fmt == "json":
        _emit(verdict.to_dict(), "verdict")
    else:
        console.print(verdict_table(verdict))
        if theorem == 3:
            orders = ", ".join(map(str, sorted(classification.realized_orders)))
            console.print(f"realized orders: {{{orders}}}")
        for finding in verdict.findings:
            console.print(f"[yellow]finding:[/yellow] {finding}")
        console.print("[green]PASS[/green]" if verdict.passed else "[red]FAIL[/red]")
    if not verdict.passed:
        raise typer.Exit(code=1)


@app.command("report")
def report(
    fmt: str = typer.Option("table", "--format", "-f", help="json, table or markdown"),
    output: Path = typer.Option(None, "-o", "--output", help="Write to a file instead"),
    jobs: int = typer.Option(None, "--jobs", "-j", min=1, help="Worker processes"),
):
    """The full classification table with example matrices and exclusion certificates."""
    if fmt not in (*FORMATS, "markdown"):
        err_console.print("[red]Error:[/red] format must be json, table or markdown")
        raise typer.Exit(code=2)
    with _errors():
        classification = assemble_theorem(jobs=jobs)
    if output is not None:
        if fmt == "table":
            err_console.print("[red]Error:[/red] --output needs --format json or markdown")
            raise typer.Exit(code=2)
        path = write_report(classification, output, fmt)
        console.print(f"[green]✓[/green] Report saved to: {path.absolute()}")
        return
    if fmt == "json":
        _emit(classification_payload(classification), "report")
    elif fmt == "markdown":
        typer.echo(render_markdown(classification), nl=False)
    else:
        console.print(rows_table(classification.rows))
        console.print(certificates_table(classification.certificates))


if __name__ == "__main__":
    app()
