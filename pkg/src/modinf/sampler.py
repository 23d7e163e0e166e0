"""Executable probabilistic programs as free trees over uniform draws.

A program is one of

* ``Pure(x)``          -- finished with result ``x``
* ``Sample(k)``        -- draw ``r`` uniformly from [0, 1) and continue with ``k(r)``
* ``Score(w, rest)``   -- multiply the run's weight by ``w`` and continue with ``rest``

plus internal node kinds: ``Map`` (a delayed pure function), ``Bind`` (a delayed graft, so that building a
long chain of binds is O(1) per bind and interpretation never recurses) and
``Gather`` (independent sub-programs run as a batch; semantically the same
as binding them one after the other, but each child draws from its own
split random stream, which is what makes particle evaluation order
irrelevant).

Interpreters either consume fresh randomness (:func:`run_fresh`) or replay
an explicit path of draws (:func:`path_in`, :func:`weight_of`,
:func:`valuate`, :func:`subterm`).
"""

from __future__ import annotations

import gc
import math
import threading
from contextlib import contextmanager
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Sequence

from .core import (
    DEFAULT_STEP_BUDGET,
    InvalidPath,
    InvalidPrefix,
    Representation,
    RngState,
    StepBudgetExceeded,
    Weighted,
    check_weight,
    split_keys,
)

__all__ = [
    "Pure",
    "Sample",
    "Score",
    "Bind",
    "Map",
    "Gather",
    "Path",
    "program_return",
    "program_bind",
    "program_map",
    "program_sample",
    "program_score",
    "program_sequence",
    "SamplerRep",
    "SAMPLER",
    "EagerSamplerRep",
    "EAGER_SAMPLER",
    "head",
    "run_fresh",
    "run",
    "path_in",
    "weight_of",
    "log_weight_of",
    "valuate",
    "log_weight_and_value",
    "subterm",
    "program_to_rep",
]

Path = tuple  # tuple[float, ...]; every entry in [0, 1)


class Pure:
    __slots__ = ("payload",)

    def __init__(self, payload: Any):
        self.payload = payload

    def __repr__(self) -> str:
        return f"Pure({self.payload!r})"


class Sample:
    __slots__ = ("cont",)

    def __init__(self, cont: Callable[[float], Any]):
        self.cont = cont

    def __repr__(self) -> str:
        return "Sample(<cont>)"


class Score:
    __slots__ = ("factor", "rest")

    def __init__(self, factor: float, rest: Any):
        self.factor = check_weight(factor)
        self.rest = rest

    def __repr__(self) -> str:
        return f"Score({self.factor!r}, {self.rest!r})"


class Bind:
    __slots__ = ("prog", "cont")

    def __init__(self, prog: Any, cont: Callable[[Any], Any]):
        self.prog = prog
        self.cont = cont

    def __repr__(self) -> str:
        return f"Bind({self.prog!r}, <cont>)"


class Map:
    __slots__ = ("prog", "fn")

    def __init__(self, prog: Any, fn: Callable[[Any], Any]):
        self.prog = prog
        self.fn = fn

    def __repr__(self) -> str:
        return f"Map({self.prog!r}, <fn>)"


class Gather:
    __slots__ = ("progs", "cont")

    def __init__(self, progs: Sequence[Any], cont: Callable[[tuple], Any] = Pure):
        self.progs = tuple(progs)
        self.cont = cont

    def __repr__(self) -> str:
        return f"Gather(<{len(self.progs)} programs>)"


def program_return(x: Any) -> Pure:
    return Pure(x)


def program_bind(p: Any, f: Callable[[Any], Any]) -> Bind:
    return Bind(p, f)


def program_map(p: Any, g: Callable[[Any], Any]) -> Map:
    return Map(p, g)


def program_sample() -> Sample:
    return Sample(Pure)


def program_score(r: float) -> Score:
    return Score(r, Pure(()))


def program_sequence(progs: Sequence[Any]) -> Gather:
    return Gather(progs)


# --- head normalisation ----------------------------------------------------


def _graft(k: Callable, f: Callable) -> Callable:
    return lambda x: Bind(k(x), f)


def _then_pure(g: Callable) -> Callable:
    return lambda x: Pure(g(x))


def _compose(g: Callable, f: Callable) -> Callable:
    return lambda x: f(g(x))


def head(t: Any) -> Any:
    """Rewrite ``t`` until its outermost node is Pure, Sample, Score or Gather."""
    if type(t) is Map:
        t = Bind(t.prog, _then_pure(t.fn))
    while type(t) is Bind:
        m, f = t.prog, t.cont
        mc = type(m)
        if mc is Pure:
            t = f(m.payload)
            if type(t) is Map:
                t = Bind(t.prog, _then_pure(t.fn))
        elif mc is Bind:
            t = Bind(m.prog, _graft(m.cont, f))
        elif mc is Map:
            t = Bind(m.prog, _compose(m.fn, f))
        elif mc is Sample:
            return Sample(_graft(m.cont, f))
        elif mc is Score:
            return Score(m.factor, Bind(m.rest, f))
        elif mc is Gather:
            return Gather(m.progs, _graft(m.cont, f))
        else:
            raise TypeError(f"not a program: {m!r}")
    return t


def _sequential(progs: tuple, k: Callable) -> Any:
    # a Gather read as plain sequential binds; used by path replay
    def go(i: int, acc: tuple) -> Any:
        if i == len(progs):
            return k(acc)
        return Bind(progs[i], lambda x: go(i + 1, acc + (x,)))

    return go(0, ())


def _head_seq(t: Any) -> Any:
    t = head(t)
    while type(t) is Gather:
        t = head(_sequential(t.progs, t.cont))
    return t


# --- fresh interpretation --------------------------------------------------

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _uniform(key: int, counter: int) -> float:
    z = (key + (counter + 1) * _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    z ^= z >> 31
    return (z >> 11) * 1.1102230246251565e-16


@contextmanager
def _gc_paused():
    # interpretation allocates many short-lived closures; reference counting
    # frees them, and the cycle collector only adds pauses
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was_enabled:
            gc.enable()


def _interpret(t, key: int, counter: int, budget: int, record: bool, pool):
    # returns (weight, payload, path or None, counter); pending continuations
    # of Bind nodes live on an explicit stack instead of being regrafted
    w = 1.0
    path: list | None = [] if record else None
    stack: list = []
    steps = 0
    while True:
        cls = type(t)
        if cls is Bind or cls is Map:
            stack.append(t)
            t = t.prog
        elif cls is Pure:
            x = t.payload
            while stack and type(stack[-1]) is Map:
                x = stack.pop().fn(x)
            if not stack:
                return w, x, path, counter
            t = stack.pop().cont(x)
        elif cls is Sample:
            steps += 1
            if steps > budget:
                raise StepBudgetExceeded(f"more than {budget} Sample nodes in one run")
            r = _uniform(key, counter)
            counter += 1
            if record:
                path.append(r)
            t = t.cont(r)
        elif cls is Score:
            w *= t.factor
            t = t.rest
        elif cls is Gather:
            progs = t.progs
            keys = split_keys(key, counter, len(progs))
            counter += 1
            if pool is not None and len(progs) > 1:
                futures = [pool.submit(_interpret, p, k, 0, budget, record, None) for p, k in zip(progs, keys)]
                results = [fut.result() for fut in futures]
            else:
                results = [_interpret(p, k, 0, budget, record, None) for p, k in zip(progs, keys)]
            values = []
            for cw, cx, cpath, _ in results:
                w *= cw
                values.append(cx)
                if record:
                    path.extend(cpath)
            t = t.cont(tuple(values))
        else:
            raise TypeError(f"not a program: {t!r}")


def run(t: Any, rng: RngState, *, budget: int = DEFAULT_STEP_BUDGET, workers: int = 1):
    """Interpret ``t`` with fresh draws; return ``(Weighted, RngState)`` without recording the path.

    With ``workers > 1`` the children of the outermost batch (one per
    particle) are evaluated on a thread pool. Each child owns a stream split
    from the parent, so results do not depend on ``workers``.
    """
    with _gc_paused():
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                w, x, _, counter = _interpret(t, rng.key, rng.counter, budget, False, pool)
        else:
            w, x, _, counter = _interpret(t, rng.key, rng.counter, budget, False, None)
    return Weighted(w, x), RngState(rng.key, counter)


def run_fresh(t: Any, rng: RngState, *, budget: int = DEFAULT_STEP_BUDGET):
    """Interpret ``t`` with fresh draws.

    Returns ``(Weighted(weight, payload), path, rng)`` where ``path`` lists
    every uniform draw consumed, in replay order.
    """
    with _gc_paused():
        w, x, path, counter = _interpret(t, rng.key, rng.counter, budget, True, None)
    return Weighted(w, x), tuple(path), RngState(rng.key, counter)


# --- replay along an explicit path ----------------------------------------


class _Seq:
    # a Gather being replayed child by child: results so far and what follows
    __slots__ = ("progs", "done", "cont")

    def __init__(self, progs: tuple, done: tuple, cont: Callable):
        self.progs = progs
        self.done = done
        self.cont = cont


def _enter(t, stack: list):
    """Push pending continuations until ``t`` is Pure, Sample or Score."""
    while True:
        cls = type(t)
        if cls is Bind or cls is Map:
            stack.append(t)
            t = t.prog
        elif cls is Gather:
            if not t.progs:
                t = t.cont(())
            else:
                stack.append(_Seq(t.progs, (), t.cont))
                t = t.progs[0]
        else:
            return t


def _return(x, stack: list):
    """Feed ``x`` to the innermost pending continuation; ``Pure(x)`` once none is left."""
    while stack:
        fr = stack.pop()
        cls = type(fr)
        if cls is Map:
            x = fr.fn(x)
        elif cls is Bind:
            return fr.cont(x)
        else:
            done = fr.done + (x,)
            if len(done) < len(fr.progs):
                stack.append(_Seq(fr.progs, done, fr.cont))
                return fr.progs[len(done)]
            return fr.cont(done)
    return Pure(x)


def _rebuild(t, stack: list):
    """The program equal to ``t`` run under the pending continuations of ``stack``."""
    for fr in reversed(stack):
        cls = type(fr)
        if cls is Bind:
            t = Bind(t, fr.cont)
        elif cls is Map:
            t = Map(t, fr.fn)
        else:
            t = Bind(t, _rest_of_seq(fr))
    return t


def _rest_of_seq(fr: _Seq) -> Callable:
    def k(x):
        done = fr.done + (x,)
        rest = fr.progs[len(done):]
        return _sequential(rest, lambda ys: fr.cont(done + ys)) if rest else fr.cont(done)

    return k


def _replay(t: Any, p: Sequence[float], log: bool = False):
    """Return ``(weight_or_log_weight, value)`` or ``None`` if ``p`` is not a path of ``t``."""
    w = 0.0 if log else 1.0
    i, n = 0, len(p)
    stack: list = []
    while True:
        t = _enter(t, stack)
        cls = type(t)
        if cls is Sample:
            if i == n:
                return None
            t = t.cont(p[i])
            i += 1
        elif cls is Score:
            if log:
                w += math.log(t.factor) if t.factor > 0.0 else -math.inf
            else:
                w *= t.factor
            t = t.rest
        elif cls is Pure:
            if not stack:
                return (w, t.payload) if i == n else None
            t = _return(t.payload, stack)
        else:
            raise TypeError(f"not a program: {t!r}")


def path_in(t: Any, p: Sequence[float]) -> bool:
    """True iff replaying ``t`` consumes exactly the draws in ``p``."""
    return _replay(t, p) is not None


def _replay_or_raise(t, p, log=False):
    res = _replay(t, p, log)
    if res is None:
        raise InvalidPath(f"path of length {len(p)} is not a complete path of the program")
    return res


def weight_of(t: Any, p: Sequence[float]) -> float:
    return _replay_or_raise(t, p)[0]


def log_weight_of(t: Any, p: Sequence[float]) -> float:
    return _replay_or_raise(t, p, log=True)[0]


def valuate(t: Any, p: Sequence[float]) -> Any:
    return _replay_or_raise(t, p)[1]


def log_weight_and_value(t: Any, p: Sequence[float]) -> tuple[float, Any]:
    return _replay_or_raise(t, p, log=True)


def subterm(t: Any, prefix: Sequence[float]) -> tuple[Any, float]:
    """Residual program after consuming ``prefix``, with the weight accumulated on the way.

    Stops as soon as the last draw of ``prefix`` is consumed; Score nodes
    after that point stay in the residual.
    """
    if not prefix:
        return t, 1.0
    w = 1.0
    i, n = 0, len(prefix)
    stack: list = []
    while True:
        t = _enter(t, stack)
        cls = type(t)
        if cls is Sample:
            t = t.cont(prefix[i])
            i += 1
            if i == n:
                return _rebuild(t, stack), w
        elif cls is Score:
            w *= t.factor
            t = t.rest
        elif cls is Pure:
            if not stack:
                raise InvalidPrefix("prefix is longer than the program's run")
            t = _return(t.payload, stack)
        else:
            raise TypeError(f"not a program: {t!r}")


# --- the sampler as a representation ---------------------------------------


class SamplerRep(Representation):
    """Programs as a sampling and conditioning representation (no computable meaning)."""

    def ret(self, x):
        return Pure(x)

    def bind(self, a, f):
        return Bind(a, f)

    def map(self, a, g):
        return Map(a, g)

    def sequence(self, items):
        return Gather(items)

    def sample(self):
        return Sample(Pure)

    def score(self, r):
        return Score(r, Pure(()))

    def flip(self):
        return Sample(lambda r: Pure(r >= 0.5))

    def fail(self):
        return Score(0.0, Pure(None))


SAMPLER = SamplerRep()

_EAGER_DEPTH = 64
_eager = threading.local()


class EagerSamplerRep(SamplerRep):
    """The sampler, applying continuations to finished programs at construction.

    Same programs up to evaluation order, so runs are bit-identical; it
    saves building and interpreting a node per bind when the bound program
    is already ``Pure``. Nested eager binds are capped per thread, past
    which a lazy ``Bind`` keeps construction from recursing without bound.
    Not suited to the tracing layer, which rebuilds continuations on replay.
    """

    def bind(self, a, f):
        if type(a) is Pure:
            depth = getattr(_eager, "depth", 0)
            if depth < _EAGER_DEPTH:
                _eager.depth = depth + 1
                try:
                    return f(a.payload)
                finally:
                    _eager.depth = depth
        return Bind(a, f)

    def map(self, a, g):
        if type(a) is Pure:
            return Pure(g(a.payload))
        return Map(a, g)


EAGER_SAMPLER = EagerSamplerRep()


def program_to_rep(t: Any, rep: Representation) -> Any:
    """Interpret a program in any representation with ``sample`` and ``score``."""
    t = head(t)
    cls = type(t)
    if cls is Pure:
        return rep.ret(t.payload)
    if cls is Sample:
        k = t.cont
        return rep.bind(rep.sample(), lambda r: program_to_rep(k(r), rep))
    if cls is Score:
        rest = t.rest
        return rep.bind(rep.score(t.factor), lambda _: program_to_rep(rest, rep))
    k = t.cont
    return rep.bind(
        rep.sequence([program_to_rep(p, rep) for p in t.progs]),
        lambda xs: program_to_rep(k(xs), rep),
    )
