"""Turning one uniform draw into a choice among weighted items."""

from __future__ import annotations

import bisect
from itertools import accumulate
from typing import Any, Sequence

__all__ = ["Take", "Fail", "FAIL", "dwrand", "WeightedSelector", "preimage_intervals"]


class Take:
    __slots__ = ("value",)

    def __init__(self, value: Any):
        self.value = value

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Take) and other.value == self.value

    def __hash__(self) -> int:
        return hash(("Take", self.value))

    def __repr__(self) -> str:
        return f"Take({self.value!r})"


class Fail:
    __slots__ = ()

    def __repr__(self) -> str:
        return "FAIL"


FAIL = Fail()


def dwrand(xs: Sequence[tuple[float, Any]], r: float):
    """Pick item ``i`` with probability ``w_i / sum(w)`` when ``r`` is uniform on [0, 1).

    Fuel ``total * r`` is compared against running weight sums; item ``i``
    owns the half-open fuel interval ``[C_{i-1}, C_i)``. Returns ``FAIL``
    when the total weight is zero.
    """
    total = 0.0
    for w, _ in xs:
        total += w
    if total == 0.0:
        return FAIL
    fuel = total * r
    acc = 0.0
    last = None
    for w, x in xs:
        acc += w
        if w > 0.0:
            last = x
            if fuel < acc:
                return Take(x)
    # fuel rounded up to the total: only possible for r within an ulp of 1
    return Take(last)


class WeightedSelector:
    """Precomputed :func:`dwrand` for one list: O(log n) per draw, same answers.

    Running sums are accumulated in the same order as :func:`dwrand`, so the
    interval boundaries are bit-identical.
    """

    __slots__ = ("_cum", "_items", "total")

    def __init__(self, xs: Sequence[tuple[float, Any]]):
        pos = [(w, x) for w, x in xs]
        self._cum = list(accumulate(w for w, _ in pos))
        self._items = [x for _, x in pos]
        self.total = self._cum[-1] if self._cum else 0.0

    def __call__(self, r: float):
        if self.total == 0.0:
            return FAIL
        i = bisect.bisect_right(self._cum, self.total * r)
        if i >= len(self._items):
            i = len(self._items) - 1
            while self._cum[i] == (self._cum[i - 1] if i else 0.0):
                i -= 1
        return Take(self._items[i])


def preimage_intervals(xs: Sequence[tuple[float, Any]]) -> list[tuple[float, float]]:
    """The set of draws mapped to ``Take(x_i)``, as a half-open interval ``[lo, hi)`` per item.

    Derived from the running sums that :func:`dwrand` scans; empty lists or
    zero totals give no intervals (every draw fails).
    """
    total = sum(w for w, _ in xs)
    if total == 0.0:
        return []
    out, acc = [], 0.0
    for w, _ in xs:
        lo = acc
        acc += w
        out.append((lo / total, acc / total))
    return out
