"""Finite mass functions and the discrete representations built on them.

``MassFn`` is the semantic target: every discrete representation's meaning
function lands there. ``ENUM`` (weighted lists) and ``TERM`` (weighted
binary trees) are executable representations whose meaning is computable
exactly, which is what makes them usable as test oracles.
"""

from __future__ import annotations

import itertools
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Iterator

from .core import Representation, Weighted, check_weight
from .values import sort_key

__all__ = [
    "MassFn",
    "mass_return",
    "mass_bind",
    "mass_flip",
    "mass_score",
    "MassRep",
    "MASS",
    "EnumRep",
    "ENUM",
    "enum_meaning",
    "aggr",
    "Return",
    "Flip",
    "TermRep",
    "TERM",
    "term_meaning",
    "term_to_rep",
]


def _order(x: Any) -> tuple:
    try:
        return (0, sort_key(x))
    except Exception:
        return (1, repr(x))


class MassFn(Mapping):
    """Finitely supported map from payloads to positive weights.

    Zero-weight entries are dropped on construction, so the key set is the
    support. Iteration follows a canonical order on values.
    """

    __slots__ = ("_d",)

    def __init__(self, entries: Mapping | Iterable[tuple[Any, float]] = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        d: dict = {}
        for x, w in items:
            w = check_weight(w)
            if w > 0.0:
                d[x] = d.get(x, 0.0) + w
        self._d = d

    @classmethod
    def _trusted(cls, d: dict) -> "MassFn":
        m = cls.__new__(cls)
        m._d = {x: w for x, w in d.items() if w > 0.0}
        return m

    def __getitem__(self, x: Any) -> float:
        return self._d[x]

    def get(self, x: Any, default: float = 0.0) -> float:
        return self._d.get(x, default)

    def __iter__(self) -> Iterator:
        return iter(sorted(self._d, key=_order))

    def __len__(self) -> int:
        return len(self._d)

    def total(self) -> float:
        return sum(self._d.values())

    def normalized(self) -> "MassFn":
        t = self.total()
        if t == 0.0:
            return MassFn()
        return MassFn._trusted({x: w / t for x, w in self._d.items()})

    def scaled(self, s: float) -> "MassFn":
        return MassFn._trusted({x: w * s for x, w in self._d.items()})

    def max_abs_diff(self, other: Mapping) -> float:
        keys = set(self._d) | set(other.keys())
        return max((abs(self.get(k) - other.get(k, 0.0)) for k in keys), default=0.0)

    def isclose(self, other: Mapping, tol: float = 1e-12) -> bool:
        return self.max_abs_diff(other) <= tol

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Mapping):
            return dict(self._d) == {k: v for k, v in other.items() if v != 0}
        return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        body = ", ".join(f"{x!r}: {self._d[x]!r}" for x in self)
        return f"MassFn({{{body}}})"


def mass_return(x: Any) -> MassFn:
    return MassFn._trusted({x: 1.0})


def mass_bind(mu: Mapping, f: Callable[[Any], Mapping]) -> MassFn:
    out: dict = {}
    for x, w in mu.items():
        for y, v in f(x).items():
            out[y] = out.get(y, 0.0) + w * v
    return MassFn._trusted(out)


def mass_flip() -> MassFn:
    return MassFn._trusted({False: 0.5, True: 0.5})


def mass_score(r: float) -> MassFn:
    return MassFn._trusted({(): check_weight(r)})


class MassRep(Representation):
    """The mass-function monad viewed as a representation; meaning is the identity."""

    def ret(self, x):
        return mass_return(x)

    def bind(self, a, f):
        return mass_bind(a, f)

    def flip(self):
        return mass_flip()

    def score(self, r):
        return mass_score(r)

    def fail(self):
        return MassFn()

    def meaning(self, a):
        return MassFn(a)


MASS = MassRep()


# --- enumeration -----------------------------------------------------------


def enum_meaning(xs: Iterable[tuple[float, Any]]) -> MassFn:
    out: dict = {}
    for r, x in xs:
        out[x] = out.get(x, 0.0) + r
    return MassFn._trusted(out)


class EnumRep(Representation):
    """Weighted lists ``[Weighted(r, x), ...]``; a payload may repeat."""

    def ret(self, x):
        return [Weighted(1.0, x)]

    def bind(self, xs, f):
        return [Weighted(r * s, y) for r, x in xs for s, y in f(x)]

    def map(self, xs, g):
        return [Weighted(r, g(x)) for r, x in xs]

    def sequence(self, items):
        out = []
        for combo in itertools.product(*items):
            w = 1.0
            for r, _ in combo:
                w *= r
            out.append(Weighted(w, tuple(x for _, x in combo)))
        return out

    def flip(self):
        return [Weighted(0.5, False), Weighted(0.5, True)]

    def score(self, r):
        return [Weighted(check_weight(r), ())]

    def fail(self):
        return []

    def meaning(self, xs):
        return enum_meaning(xs)


ENUM = EnumRep()


def aggr(xs: Iterable[tuple[float, Any]]) -> list[Weighted]:
    """Merge entries with equal payloads by summing their weights (first-occurrence order)."""
    acc: dict = {}
    for r, x in xs:
        acc[x] = acc.get(x, 0.0) + r
    return [Weighted(r, x) for x, r in acc.items()]


# --- weighted binary terms -------------------------------------------------


@dataclass(frozen=True)
class Return:
    weight: float
    payload: Any


@dataclass(frozen=True)
class Flip:
    left: Any  # taken when the coin shows False
    right: Any  # taken when the coin shows True


def _scale(s: float, t):
    if isinstance(t, Return):
        return Return(s * t.weight, t.payload)
    return Flip(_scale(s, t.left), _scale(s, t.right))


class TermRep(Representation):
    """Binary trees whose leaves carry weighted values."""

    def ret(self, x):
        return Return(1.0, x)

    def bind(self, t, f):
        if isinstance(t, Return):
            return _scale(t.weight, f(t.payload))
        return Flip(self.bind(t.left, f), self.bind(t.right, f))

    def flip(self):
        return Flip(Return(1.0, False), Return(1.0, True))

    def score(self, r):
        return Return(check_weight(r), ())

    def meaning(self, t):
        return term_meaning(t)


TERM = TermRep()


def term_meaning(t) -> MassFn:
    if isinstance(t, Return):
        return mass_bind(mass_score(t.weight), lambda _: mass_return(t.payload))
    left, right = term_meaning(t.left), term_meaning(t.right)
    return mass_bind(mass_flip(), lambda b: right if b else left)


def term_to_rep(t, rep: Representation):
    """Interpret a term in any representation providing ``flip`` and ``score``."""
    if isinstance(t, Return):
        return rep.bind(rep.score(t.weight), lambda _: rep.ret(t.payload))
    return rep.bind(rep.flip(), lambda b: term_to_rep(t.right if b else t.left, rep))
