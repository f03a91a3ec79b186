"""Exception types and the dense-tensor sizing guard."""
from __future__ import annotations

import os

DEFAULT_MAX_CELLS = 1 << 24
MAX_CELLS_ENV = "DIRINFO_MAC_MAX_CELLS"


class FsmacError(Exception):
    """Base class for all package errors."""


class SpecError(FsmacError):
    """Invalid input: malformed channel spec, alphabet mismatch, bad pmf."""


class SizingError(FsmacError):
    """A dense tensor would exceed the configured cell budget."""


def max_cells() -> int:
    raw = os.environ.get(MAX_CELLS_ENV)
    if raw is None:
        return DEFAULT_MAX_CELLS
    try:
        value = int(raw)
    except ValueError as exc:
        raise SpecError(f"{MAX_CELLS_ENV} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise SpecError(f"{MAX_CELLS_ENV} must be positive, got {value}")
    return value


def check_cells(cells: int, what: str = "tensor") -> None:
    """Reject dense allocations larger than the cell budget."""
    bound = max_cells()
    if cells > bound:
        raise SizingError(f"{what} needs {cells} cells, bound is {bound}")
