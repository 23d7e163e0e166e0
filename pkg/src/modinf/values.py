"""Structured model values with structural equality and a canonical order.

Models return ordinary Python data; :func:`to_value` converts it into the
tagged form used for ordering, equality-safe keys and serialisation:

* ``None`` or ``()``  -> :class:`Unit`
* ``bool``            -> :class:`Bool`
* ``int``             -> :class:`Int`
* ``float``           -> :class:`Real`
* 2-tuple             -> :class:`Pair`
* ``list`` or other tuples -> :class:`List`
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from typing import Any, Union

from .core import UnsupportedPayload

__all__ = [
    "Unit",
    "Bool",
    "Int",
    "Real",
    "Pair",
    "List",
    "Value",
    "to_value",
    "from_value",
    "sort_key",
    "encode_json",
    "to_jsonable",
    "encode_text",
    "check_equality_safe",
]


@dataclass(frozen=True)
class Unit:
    def __str__(self) -> str:
        return "()"


@dataclass(frozen=True)
class Bool:
    b: bool


@dataclass(frozen=True)
class Int:
    i: int

    def __post_init__(self):
        if not -(2**63) <= self.i < 2**63:
            raise ValueError("Int values are signed 64-bit")


@dataclass(frozen=True, eq=False)
class Real:
    r: float

    def _bits(self) -> bytes:
        return struct.pack("<d", self.r)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Real) and self._bits() == other._bits()

    def __hash__(self) -> int:
        return hash(("Real", self._bits()))


@dataclass(frozen=True)
class Pair:
    fst: "Value"
    snd: "Value"


@dataclass(frozen=True)
class List:
    items: tuple["Value", ...]


Value = Union[Unit, Bool, Int, Real, Pair, List]

_TAGS = {Unit: 0, Bool: 1, Int: 2, Real: 3, Pair: 4, List: 5}


def to_value(x: Any) -> Value:
    if isinstance(x, (Unit, Bool, Int, Real, Pair, List)):
        return x
    if x is None or (isinstance(x, tuple) and len(x) == 0):
        return Unit()
    if isinstance(x, bool):
        return Bool(x)
    if isinstance(x, int):
        return Int(x)
    if isinstance(x, float):
        return Real(x)
    if isinstance(x, tuple) and len(x) == 2:
        return Pair(to_value(x[0]), to_value(x[1]))
    if isinstance(x, (list, tuple)):
        return List(tuple(to_value(v) for v in x))
    raise UnsupportedPayload(f"cannot convert {type(x).__name__} to a Value")


def from_value(v: Value) -> Any:
    if isinstance(v, Unit):
        return ()
    if isinstance(v, Bool):
        return v.b
    if isinstance(v, Int):
        return v.i
    if isinstance(v, Real):
        return v.r
    if isinstance(v, Pair):
        return (from_value(v.fst), from_value(v.snd))
    return [from_value(i) for i in v.items]


def sort_key(v: Value) -> tuple:
    """Total order: by tag, then contents (Reals by IEEE total order)."""
    v = to_value(v)
    tag = _TAGS[type(v)]
    if isinstance(v, Unit):
        return (tag,)
    if isinstance(v, Bool):
        return (tag, v.b)
    if isinstance(v, Int):
        return (tag, v.i)
    if isinstance(v, Real):
        (bits,) = struct.unpack("<q", struct.pack("<d", v.r))
        return (tag, bits if bits >= 0 else -(bits & ((1 << 63) - 1)) - 1)
    if isinstance(v, Pair):
        return (tag, sort_key(v.fst), sort_key(v.snd))
    return (tag, len(v.items), tuple(sort_key(i) for i in v.items))


def to_jsonable(x: Any) -> Any:
    """JSON-ready form of a model value: Unit is None, Pair and List are lists."""
    return _jsonable(to_value(x))


def _jsonable(v: Value) -> Any:
    if isinstance(v, Unit):
        return None
    if isinstance(v, Bool):
        return v.b
    if isinstance(v, Int):
        return v.i
    if isinstance(v, Real):
        if not math.isfinite(v.r):
            return repr(v.r)
        return v.r
    if isinstance(v, Pair):
        return [_jsonable(v.fst), _jsonable(v.snd)]
    return [_jsonable(i) for i in v.items]


def encode_json(x: Any) -> str:
    """JSON text: Unit is null, Pair and List are arrays."""
    return json.dumps(_jsonable(to_value(x)), separators=(",", ":"))


def encode_text(x: Any) -> str:
    """Flat text form used in CSV cells: ``()``, ``true``, ``3``, ``0.5``, ``(a,b)``, ``[a;b]``."""
    v = to_value(x)
    if isinstance(v, Unit):
        return "()"
    if isinstance(v, Bool):
        return "true" if v.b else "false"
    if isinstance(v, Int):
        return str(v.i)
    if isinstance(v, Real):
        return repr(v.r)
    if isinstance(v, Pair):
        return f"({encode_text(v.fst)},{encode_text(v.snd)})"
    return "[" + ";".join(encode_text(i) for i in v.items) + "]"


def check_equality_safe(x: Any) -> None:
    """Raise :class:`UnsupportedPayload` unless ``x`` has decidable structural equality."""
    if x is None or isinstance(x, (bool, int, float, str, Unit, Bool, Int, Real, Pair, List)):
        return
    if isinstance(x, tuple):
        for item in x:
            check_equality_safe(item)
        return
    raise UnsupportedPayload(f"payload of type {type(x).__name__} has no decidable equality")
