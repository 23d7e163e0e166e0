"""Inference transformers: weighting, lists, populations and suspension.

Each transformer wraps a base representation and provides the monadic
interface, ``lift`` from the base, ``tmap`` (turning a transformation of
the base into one of the transformed representation) and a meaning
function computed through the base's meaning.
"""

from __future__ import annotations

import math
from typing import Any, Callable

from .core import DEFAULT_STEP_BUDGET, Representation, StepBudgetExceeded, Weighted, check_weight
from .discrete import MassFn

__all__ = [
    "Weighting",
    "waggr",
    "ListT",
    "Population",
    "spark",
    "spawn",
    "Done",
    "Yield",
    "Suspension",
    "advance",
    "finish",
]


class Weighting(Representation):
    """``T(Weighted[X])``: conditioning deferred into a carried weight."""

    def __init__(self, inner: Representation):
        self.inner = inner

    def ret(self, x):
        return self.inner.ret(Weighted(1.0, x))

    def bind(self, a, f):
        inner = self.inner

        def step(rx):
            r = rx[0]
            return inner.map(f(rx[1]), lambda sy: Weighted(r * sy[0], sy[1]))

        return inner.bind(a, step)

    def map(self, a, g):
        return self.inner.map(a, lambda rx: Weighted(rx[0], g(rx[1])))

    def score(self, r):
        return self.inner.ret(Weighted(check_weight(r), ()))

    def lift(self, a):
        return self.inner.map(a, lambda x: Weighted(1.0, x))

    def sample(self):
        return self.lift(self.inner.sample())

    def flip(self):
        return self.lift(self.inner.flip())

    def tmap(self, tau: Callable[[Any], Any]) -> Callable[[Any], Any]:
        return tau

    def meaning(self, a) -> MassFn:
        out: dict = {}
        for (r, x), m in self.inner.meaning(a).items():
            out[x] = out.get(x, 0.0) + m * r
        return MassFn._trusted(out)

    def __repr__(self) -> str:
        return f"Weighting({self.inner!r})"


def waggr(w: Weighting, a):
    """Turn the carried weight back into a score of the inner representation."""
    inner = w.inner
    return inner.bind(a, lambda rx: inner.bind(inner.score(rx[0]), lambda _: inner.ret(rx[1])))


def _concat(xss: tuple) -> tuple:
    out: list = []
    for xs in xss:
        out.extend(xs)
    return tuple(out)


class ListT(Representation):
    """``T(tuple[X, ...])``. Not a lawful monad over non-commutative bases; only meaning is preserved."""

    def __init__(self, base: Representation):
        self.base = base

    def ret(self, x):
        return self.base.ret((x,))

    def bind(self, a, f):
        base = self.base

        def step(xs):
            if len(xs) == 1:  # concatenating one list is the identity
                return f(xs[0])
            return base.map(base.sequence([f(x) for x in xs]), _concat)

        return base.bind(a, step)

    def map(self, a, g):
        return self.base.map(a, lambda xs: tuple(g(x) for x in xs))

    def lift(self, a):
        return self.base.map(a, lambda x: (x,))

    def sample(self):
        return self.lift(self.base.sample())

    def flip(self):
        return self.lift(self.base.flip())

    def score(self, r):
        return self.lift(self.base.score(r))

    def fail(self):
        return self.base.ret(())

    def tmap(self, tau):
        return tau

    def meaning(self, a) -> MassFn:
        out: dict = {}
        for xs, m in self.base.meaning(a).items():
            for x in xs:
                out[x] = out.get(x, 0.0) + m
        return MassFn._trusted(out)

    def __repr__(self) -> str:
        return f"ListT({self.base!r})"


def _weighted(r: float, x: Any) -> Weighted:
    # products of validated weights; overflow to inf is the only way to go wrong
    if r == math.inf:
        raise ValueError("particle weight overflowed")
    return tuple.__new__(Weighted, (r, x))


def _unit_particle(x: Any) -> tuple:
    return (tuple.__new__(Weighted, (1.0, x)),)


def _rescale(r: float, ys: tuple) -> tuple:
    if len(ys) == 1:
        s, y = ys[0]
        return (_weighted(r * s, y),)
    return tuple([_weighted(r * s, y) for s, y in ys])


class Population(Weighting):
    """``T(tuple[Weighted[X], ...])``, i.e. weighting over the list transformer.

    The empty population is the failure value: its meaning is zero.
    """

    def __init__(self, base: Representation):
        super().__init__(ListT(base))
        self.base = base

    # ret, score, bind and map fuse the Weighting and ListT steps

    def ret(self, x):
        return self.base.ret((tuple.__new__(Weighted, (1.0, x)),))

    def score(self, r):
        return self.base.ret((tuple.__new__(Weighted, (check_weight(r), ())),))

    def bind(self, a, f):
        base = self.base

        def step(xs):
            if len(xs) == 1:
                r, x = xs[0]
                if r == 1.0:
                    return f(x)
                return base.map(f(x), lambda ys: _rescale(r, ys))
            rs = [r for r, _ in xs]
            return base.map(
                base.sequence([f(x) for _, x in xs]),
                lambda yss: tuple([_weighted(r * s, y) for r, ys in zip(rs, yss) for s, y in ys]),
            )

        return base.bind(a, step)

    def map(self, a, g):
        return self.base.map(a, lambda xs: tuple([_weighted(r, g(x)) for r, x in xs]))

    def fail(self):
        return self.base.ret(())

    def lift(self, a):
        return self.base.map(a, _unit_particle)

    def sample(self):
        return self.lift(self.base.sample())

    def flip(self):
        return self.lift(self.base.flip())

    def tmap(self, tau):
        return tau

    def __repr__(self) -> str:
        return f"Population({self.base!r})"


def spark(pop: Population, n: int):
    """``n`` unit particles of weight ``1/n``; total mass 1."""
    if n < 1:
        raise ValueError("spark needs n >= 1")
    return pop.base.ret((tuple.__new__(Weighted, (1.0 / n, ())),) * n)


def spawn(pop: Population, n: int, a):
    """Run ``a`` once for each of ``n`` sparked particles; meaning is unchanged."""
    return pop.bind(spark(pop, n), lambda _: a)


# --- suspension ------------------------------------------------------------


class Done:
    __slots__ = ("value",)

    def __init__(self, value: Any):
        self.value = value

    def __repr__(self) -> str:
        return f"Done({self.value!r})"


class Yield:
    __slots__ = ("rest",)

    def __init__(self, rest: Any):
        self.rest = rest

    def __repr__(self) -> str:
        return "Yield(<suspended>)"


class Suspension(Representation):
    """``T(Done(X) | Yield(Sus T X))``: execution pauses at every score."""

    def __init__(self, base: Representation, budget: int = DEFAULT_STEP_BUDGET):
        self.base = base
        self.budget = budget

    def ret(self, x):
        return self.base.ret(Done(x))

    def bind(self, a, f):
        base = self.base

        def step(t):
            if type(t) is Done:
                return f(t.value)
            return base.ret(Yield(self.bind(t.rest, f)))

        return base.bind(a, step)

    def map(self, a, g):
        def step(t):
            if type(t) is Done:
                return Done(g(t.value))
            return Yield(self.map(t.rest, g))

        return self.base.map(a, step)

    def lift(self, a):
        return self.base.map(a, Done)

    def score(self, r):
        return self.base.ret(Yield(self.lift(self.base.score(r))))

    def sample(self):
        return self.lift(self.base.sample())

    def flip(self):
        return self.lift(self.base.flip())

    def fail(self):
        return self.lift(self.base.fail())

    def tmap(self, tau):
        """Apply ``tau`` at every suspension layer."""
        base = self.base

        def go(a):
            return tau(base.map(a, lambda t: t if type(t) is Done else Yield(go(t.rest))))

        return go

    def meaning(self, a) -> MassFn:
        return self.base.meaning(finish(self, a))

    def __repr__(self) -> str:
        return f"Suspension({self.base!r})"


def advance(sus: Suspension, a):
    """Resume every suspended branch up to its next score; finished branches pass through."""
    base = sus.base
    return base.bind(a, lambda t: base.ret(t) if type(t) is Done else t.rest)


def finish(sus: Suspension, a, budget: int | None = None):
    """Run every branch to completion, collapsing all suspension layers."""
    base = sus.base
    budget = sus.budget if budget is None else budget

    def go(a, left):
        def step(t):
            if type(t) is Done:
                return base.ret(t.value)
            if left <= 0:
                raise StepBudgetExceeded(f"more than {budget} suspension layers")
            return go(t.rest, left - 1)

        return base.bind(a, step)

    return go(a, budget)
