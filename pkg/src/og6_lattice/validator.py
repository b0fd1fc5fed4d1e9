"""JSON Schema validation for everything the CLI prints.

Each payload kind has a Draft 2020-12 schema at ``schemas/<kind>.schema.json``.
Schemas point at each other by ``$id`` (a lattice payload embeds an fqf
payload, a report embeds rows), so all of them are registered together
before any validator is built.
"""

from __future__ import annotations

import json
from collections.abc import Iterable
from functools import lru_cache
from pathlib import Path
from typing import Any, Literal

from jsonschema import Draft202012Validator
from referencing import Registry, Resource

from .errors import ValidationError

Kind = Literal[
    "lattice", "enumerated", "fqf", "embedding", "isometry", "row", "report", "verdict"
]
KINDS: tuple[str, ...] = (
    "lattice", "enumerated", "fqf", "embedding", "isometry", "row", "report", "verdict"
)
SCHEMAS_DIR = Path(__file__).resolve().parent / "schemas"


def _path_string(parts: Iterable[str | int]) -> str:
    """``["disc_form", "orders", 0]`` -> ``"disc_form.orders[0]"``; root is ``""``."""
    text = ""
    for part in parts:
        if isinstance(part, int):
            text += f"[{part}]"
        else:
            text = f"{text}.{part}" if text else str(part)
    return text


@lru_cache(maxsize=None)
def load_schema(kind: Kind) -> dict:
    """The schema document for ``kind``, read once."""
    if kind not in KINDS:
        raise ValueError(f"unknown kind: {kind!r} (expected one of {', '.join(KINDS)})")
    return json.loads((SCHEMAS_DIR / f"{kind}.schema.json").read_text(encoding="utf-8"))


@lru_cache(maxsize=1)
def _registry() -> Registry:
    return Registry().with_resources(
        (load_schema(kind)["$id"], Resource.from_contents(load_schema(kind))) for kind in KINDS
    )


@lru_cache(maxsize=None)
def _kind_validator(kind: Kind) -> Draft202012Validator:
    return Draft202012Validator(load_schema(kind), registry=_registry())


def _errors(validator: Draft202012Validator, payload: Any) -> list[dict[str, str]]:
    found = [
        {"path": _path_string(err.absolute_path), "message": err.message}
        for err in validator.iter_errors(payload)
    ]
    return sorted(found, key=lambda e: (e["path"], e["message"]))


def validate_iter(payload: Any, *, schema: dict) -> list[dict[str, str]]:
    """All schema violations of ``payload`` as ``{"path", "message"}`` dicts, sorted by path.

    An empty list means the payload is valid.
    """
    return _errors(Draft202012Validator(schema, registry=_registry()), payload)


def validate(payload: Any, *, schema: dict) -> None:
    errors = validate_iter(payload, schema=schema)
    if errors:
        raise ValidationError(errors)


def validate_for_kind(payload: Any, *, kind: Kind) -> None:
    """Raise :class:`ValidationError` unless ``payload`` matches the ``kind`` schema."""
    errors = _errors(_kind_validator(kind), payload)
    if errors:
        raise ValidationError(errors)


__all__ = ["KINDS", "Kind", "load_schema", "validate", "validate_for_kind", "validate_iter"]
