"""Exception hierarchy shared by every og6_lattice module.

Mathematical absence (no embedding, no isometry of the requested order) is
never an exception: operations return ``None`` or an empty list. Exceptions
are reserved for malformed input, exhausted budgets and internal
contradictions.
"""

from __future__ import annotations


class Og6Error(Exception):
    """Root of every error raised by this package."""


class LatticeError(Og6Error, ValueError):
    """Raised when a Gram matrix or sublattice basis is invalid.

    ``reason`` is a short machine-readable tag (``"odd"``, ``"degenerate"``,
    ``"asymmetric"``, ``"not_square"``, ``"empty"``, ``"range"``,
    ``"dependent"``, ``"not_primitive"``, ``"indefinite"``).
    """

    def __init__(self, message: str, *, reason: str = "invalid") -> None:
        self.reason = reason
        super().__init__(message)


class ParseError(LatticeError):
    """Raised when a lattice expression cannot be parsed."""

    def __init__(self, message: str, *, text: str, position: int) -> None:
        self.text = text
        self.position = position
        pointer = " " * position + "^"
        super().__init__(f"{message} at column {position}\n  {text}\n  {pointer}", reason="parse")


class FqfError(Og6Error, ValueError):
    """Raised for malformed finite quadratic forms or maps between them."""


class BudgetExceededError(Og6Error, RuntimeError):
    """Raised when a brute-force search would exceed its configured budget."""

    def __init__(self, budget: str, limit: int, needed: int | None = None) -> None:
        self.budget = budget
        self.limit = limit
        self.needed = needed
        detail = f" (needs {needed})" if needed is not None else ""
        super().__init__(f"{budget} budget of {limit} exceeded{detail}")


class EmbeddingError(Og6Error, ValueError):
    """Raised for embedding problems outside the supported range."""


class IsometryError(Og6Error, ValueError):
    """Raised when a matrix is not an isometry or its order cannot be certified."""


class PipelineError(Og6Error, RuntimeError):
    """Raised when the classification reaches a state that contradicts its own data."""


class ValidationError(Og6Error):
    """Raised when a JSON payload fails schema validation.

    The ``errors`` attribute carries ``{"path": ..., "message": ...}`` dicts.
    """

    def __init__(self, errors: list[dict[str, str]]) -> None:
        self.errors = errors
        first = errors[0] if errors else {"path": "", "message": "invalid"}
        where = first["path"] or "top level"
        more = f" (+{len(errors) - 1} more)" if len(errors) > 1 else ""
        super().__init__(f"schema violation at {where}: {first['message']}{more}")


__all__ = [
    "BudgetExceededError",
    "EmbeddingError",
    "FqfError",
    "IsometryError",
    "LatticeError",
    "Og6Error",
    "ParseError",
    "PipelineError",
    "ValidationError",
]
