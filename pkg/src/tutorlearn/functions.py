"""Domain-general function registry used by how-learning.

All functions operate on non-negative integer strings and are partial: any
application outside that domain (non-numeric input, negative difference,
inexact division) is undefined and returns None.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional


@dataclass(frozen=True)
class FunctionSpec:
    """A deterministic partial function over value strings."""

    id: str
    arity: int
    commutative: bool
    apply: Callable[..., Optional[str]] = field(compare=False)


def _as_int(value: str) -> Optional[int]:
    if not value or not value.isdigit():
        return None
    return int(value)


def _add(x: str, y: str) -> Optional[str]:
    a, b = _as_int(x), _as_int(y)
    if a is None or b is None:
        return None
    return str(a + b)


def _add3(x: str, y: str, z: str) -> Optional[str]:
    a, b, c = _as_int(x), _as_int(y), _as_int(z)
    if a is None or b is None or c is None:
        return None
    return str(a + b + c)


def _subtract(x: str, y: str) -> Optional[str]:
    a, b = _as_int(x), _as_int(y)
    if a is None or b is None or a < b:
        return None
    return str(a - b)


def _multiply(x: str, y: str) -> Optional[str]:
    a, b = _as_int(x), _as_int(y)
    if a is None or b is None:
        return None
    return str(a * b)


def _divide(x: str, y: str) -> Optional[str]:
    a, b = _as_int(x), _as_int(y)
    if a is None or b is None or b == 0 or a % b != 0:
        return None
    return str(a // b)


def _ones_place(x: str) -> Optional[str]:
    a = _as_int(x)
    if a is None:
        return None
    return str(a % 10)


def _tens_place(x: str) -> Optional[str]:
    a = _as_int(x)
    if a is None:
        return None
    return str((a // 10) % 10)


_DEFAULT_SPECS = (
    FunctionSpec("Add", 2, True, _add),
    FunctionSpec("Add3", 3, True, _add3),
    FunctionSpec("Subtract", 2, False, _subtract),
    FunctionSpec("Divide", 2, False, _divide),
    FunctionSpec("Multiply", 2, True, _multiply),
    FunctionSpec("GetTensPlace", 1, False, _tens_place),
    FunctionSpec("GetOnesPlace", 1, False, _ones_place),
)


def default_registry() -> dict[str, FunctionSpec]:
    """The seven arithmetic functions both tutor domains rely on."""
    return {spec.id: spec for spec in _DEFAULT_SPECS}


def registry_from_ids(function_ids) -> dict[str, FunctionSpec]:
    """Build a registry from a config-selected subset of the default functions."""
    available = default_registry()
    registry = {}
    for fid in function_ids:
        if fid not in available:
            raise KeyError(f"unknown domain-general function: {fid!r}")
        registry[fid] = available[fid]
    return registry
