"""Lattice expressions and Gram files.

Grammar (whitespace ignored, ``⊕`` accepted for ``+`` and ``−`` for ``-``)::

    expr  := term ("+" term)*
    term  := [count] atom ["(" integer ")"]
    atom  := "U" | "A" n | "D" n | "E" n | "[" integer "]" | "btA"
           | "bL" | "bLambda" | "bR" | "0" | "(" expr ")"

Examples: ``3U+2[-2]``, ``A2+A2(3)``, ``D4+[-2]``, ``U(2)+[-2]``.
"""

from __future__ import annotations

import json
from pathlib import Path

from . import lattice as lat
from .errors import LatticeError, ParseError
from .lattice import Lattice

_NAMED = {
    "btA": lat.btA,
    "bLambda": lat.bLambda,
    "bL": lat.bL,
    "bR": lat.bR,
}


class _Parser:
    def __init__(self, text: str) -> None:
        self.original = text
        self.text = text.replace("⊕", "+").replace("−", "-")
        self.pos = 0

    # -- low level --------------------------------------------------------

    def _skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _peek(self) -> str:
        self._skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def _error(self, message: str, position: int | None = None) -> ParseError:
        return ParseError(message, text=self.original, position=self.pos if position is None
                          else position)

    def _expect(self, char: str) -> None:
        if self._peek() != char:
            found = self._peek() or "end of input"
            raise self._error(f"expected {char!r}, found {found!r}")
        self.pos += 1

    def _integer(self, *, signed: bool = False) -> int:
        self._skip()
        start = self.pos
        if signed and self.pos < len(self.text) and self.text[self.pos] in "+-":
            self.pos += 1
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        token = self.text[start:self.pos]
        if token in ("", "+", "-"):
            self.pos = start
            raise self._error("expected an integer")
        return int(token)

    # -- grammar ----------------------------------------------------------

    def parse(self) -> Lattice:
        result = self.expr()
        if self._peek():
            raise self._error(f"unexpected {self._peek()!r}")
        return result

    def expr(self) -> Lattice:
        parts = [self.term()]
        while self._peek() == "+":
            self.pos += 1
            parts.append(self.term())
        return parts[0] if len(parts) == 1 else lat.direct_sum(parts)

    def term(self) -> Lattice:
        count = 1
        if self._peek().isdigit() and not self._is_zero_lattice():
            start = self.pos
            count = self._integer()
            if count < 1:
                raise self._error("repetition count must be positive", start)
        atom = self.atom()
        if self._peek() == "(":
            save = self.pos
            self.pos += 1
            if self._peek().isdigit() or self._peek() == "-":
                scale = self._integer(signed=True)
                self._expect(")")
                try:
                    atom = lat.rescale(atom, scale)
                except LatticeError as exc:
                    raise self._error(str(exc), save) from exc
            else:
                raise self._error("expected a rescaling factor")
        if count == 1:
            return atom
        return lat.direct_sum([atom] * count)

    def _is_zero_lattice(self) -> bool:
        rest = self.text[self.pos:].lstrip()
        return rest == "0"

    def atom(self) -> Lattice:
        c = self._peek()
        start = self.pos
        if c == "(":
            self.pos += 1
            inner = self.expr()
            self._expect(")")
            return inner
        if c == "[":
            self.pos += 1
            value = self._integer(signed=True)
            self._expect("]")
            try:
                return lat.rank1(value)
            except LatticeError as exc:
                raise self._error(str(exc), start) from exc
        for name in sorted(_NAMED, key=len, reverse=True):
            if self.text.startswith(name, self.pos):
                self.pos += len(name)
                return _NAMED[name]()
        if c == "U":
            self.pos += 1
            return lat.U()
        if c == "0":
            self.pos += 1
            return Lattice.zero()
        if c in ("A", "D", "E"):
            self.pos += 1
            if not self._peek().isdigit():
                raise self._error(f"{c} needs an index")
            index_pos = self.pos
            n = self._integer()
            builder = {"A": lat.A, "D": lat.D, "E": lat.E}[c]
            try:
                return builder(n)
            except LatticeError as exc:
                raise self._error(str(exc), index_pos) from exc
        if not c:
            raise self._error("unexpected end of input")
        raise self._error(f"unknown lattice symbol {c!r}")


def parse_lattice(text: str) -> Lattice:
    """Parse a lattice expression such as ``3U+2[-2]``.

    A leading ``@`` reads a Gram file instead (see :func:`read_gram_file`).
    """
    stripped = text.strip()
    if stripped.startswith("@"):
        return read_gram_file(Path(stripped[1:]))
    if not stripped:
        raise ParseError("empty lattice expression", text=text, position=0)
    result = _Parser(stripped).parse()
    if result.name is None or result.name != stripped:
        return Lattice(result.gram, name=stripped if result.rank else "0")
    return result


def parse_gram_text(content: str, name: str | None = None) -> Lattice:
    """Parse whitespace-separated integer rows, or the JSON form ``{"gram": [...]}``."""
    stripped = content.strip()
    if stripped.startswith("{"):
        payload = json.loads(stripped)
        if "gram" not in payload:
            raise LatticeError("JSON Gram file needs a 'gram' key", reason="format")
        return lat.make_lattice(payload["gram"], name=payload.get("name", name))
    rows = []
    for lineno, line in enumerate(stripped.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rows.append([int(tok) for tok in line.split()])
        except ValueError as exc:
            raise LatticeError(f"line {lineno}: non-integer entry", reason="format") from exc
    return lat.make_lattice(rows, name=name)


def read_gram_file(path: Path) -> Lattice:
    with path.open(encoding="utf-8") as f:
        return parse_gram_text(f.read(), name=path.stem)


def format_gram_text(L: Lattice) -> str:
    return "\n".join(" ".join(str(x) for x in row) for row in L.gram) + "\n"


__all__ = ["format_gram_text", "parse_gram_text", "parse_lattice", "read_gram_file"]
