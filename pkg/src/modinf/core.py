"""Weighted values, the random-number contract and the representation interface.

A *representation* bundles a monadic interface (``ret``/``bind``) with a
meaning function into finite mass functions. Representations are plain
objects; the values they manipulate are ordinary Python data (lists,
tuples, program trees). Optional capabilities (``sample``, ``score``,
``flip``, ``fail``) are provided by the representations that support them.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Any, Callable, Iterable, NamedTuple

__all__ = [
    "InferenceError",
    "StepBudgetExceeded",
    "InvalidPath",
    "InvalidPrefix",
    "UnsupportedPayload",
    "Weighted",
    "check_weight",
    "RngState",
    "split_key",
    "split_keys",
    "next_uniform",
    "normal_quantile",
    "Representation",
    "DEFAULT_STEP_BUDGET",
]

DEFAULT_STEP_BUDGET = 10**6


class InferenceError(Exception):
    """Base class for library errors."""


class StepBudgetExceeded(InferenceError):
    pass


class InvalidPath(InferenceError):
    pass


class InvalidPrefix(InferenceError):
    pass


class UnsupportedPayload(InferenceError):
    pass


def check_weight(w: float) -> float:
    """Return ``w`` as a float, rejecting negative, NaN and infinite weights."""
    w = float(w)
    if not (0.0 <= w < math.inf):
        raise ValueError(f"weight must be finite and nonnegative, got {w!r}")
    return w


class _WeightedBase(NamedTuple):
    weight: float
    payload: Any


class Weighted(_WeightedBase):
    """A payload paired with a nonnegative weight."""

    __slots__ = ()

    def __new__(cls, weight: float, payload: Any) -> "Weighted":
        if not (0.0 <= weight < math.inf):
            raise ValueError(f"weight must be finite and nonnegative, got {weight!r}")
        return _WeightedBase.__new__(cls, weight, payload)

    def __repr__(self) -> str:
        return f"Weighted({self.weight!r}, {self.payload!r})"


# --- random numbers --------------------------------------------------------

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_SPLIT = 0xD1B54A32D192ED03


def _fmix(z: int) -> int:
    # splitmix64 finalizer
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def split_key(key: int, counter: int, index: int) -> int:
    """Key of child stream ``index`` split off at position ``counter`` of stream ``key``."""
    return _fmix((_split_base(key, counter) + (index + 1) * _GOLDEN) & _MASK)


def split_keys(key: int, counter: int, n: int) -> list[int]:
    """Keys of child streams ``0..n-1`` split off at the same position."""
    base = _split_base(key, counter)
    return [_fmix((base + (i + 1) * _GOLDEN) & _MASK) for i in range(n)]


def _split_base(key: int, counter: int) -> int:
    return _fmix((key ^ _fmix((counter * _SPLIT + 1) & _MASK)) & _MASK)


@dataclass(frozen=True, slots=True)
class RngState:
    """Counter-based splitmix64 stream: draw ``i`` is ``fmix(key + (i+1)*golden)``.

    States are values; drawing returns a new state. ``split`` derives an
    independent child stream from the current position and a child index.
    """

    key: int
    counter: int = 0

    @classmethod
    def from_seed(cls, seed: int) -> "RngState":
        if not 0 <= seed <= _MASK:
            raise ValueError("seed must be a 64-bit unsigned integer")
        return cls(_fmix((seed + _GOLDEN) & _MASK), 0)

    def advance(self, n: int = 1) -> "RngState":
        return RngState(self.key, self.counter + n)

    def split(self, index: int) -> "RngState":
        return RngState(split_key(self.key, self.counter, index), 0)

    def uniform(self) -> float:
        z = _fmix((self.key + (self.counter + 1) * _GOLDEN) & _MASK)
        return (z >> 11) * 1.1102230246251565e-16  # 2**-53


def next_uniform(rng: RngState) -> tuple[float, RngState]:
    """Return a draw in ``[0, 1)`` and the state advanced by one position."""
    return rng.uniform(), RngState(rng.key, rng.counter + 1)


_STANDARD_NORMAL = statistics.NormalDist()


def normal_quantile(p: float) -> float:
    """Standard normal inverse CDF."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"normal_quantile is defined on (0, 1), got {p!r}")
    return _STANDARD_NORMAL.inv_cdf(p)


# --- representation interface ---------------------------------------------


class Representation:
    """Monadic interface with a meaning function.

    Subclasses implement ``ret``, ``bind`` and usually ``meaning``. ``map``
    and ``sequence`` have generic definitions in terms of ``ret``/``bind``;
    representations whose unit law holds override them with direct
    versions.
    """

    def ret(self, x: Any) -> Any:
        raise NotImplementedError

    def bind(self, a: Any, f: Callable[[Any], Any]) -> Any:
        raise NotImplementedError

    def map(self, a: Any, g: Callable[[Any], Any]) -> Any:
        return self.bind(a, lambda x: self.ret(g(x)))

    def then(self, a: Any, b: Callable[[], Any]) -> Any:
        """``do {a; b()}``, discarding the first result."""
        return self.bind(a, lambda _: b())

    def sequence(self, items: Iterable[Any]) -> Any:
        """Run computations left to right and collect their results in a tuple."""
        items = list(items)

        def go(i: int) -> Any:
            if i == len(items):
                return self.ret(())
            return self.bind(items[i], lambda x: self.map(go(i + 1), lambda xs: (x,) + xs))

        return go(0)

    def meaning(self, a: Any):
        raise NotImplementedError(f"{type(self).__name__} has no computable meaning")

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"
