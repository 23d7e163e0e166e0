"""Traces, the Metropolis-Hastings-Green update and lightweight trace MH.

A :class:`TraceRep` pairs a program with a base-representation value over
its paths. Two invariants tie them together: every path in the support is a
complete path of the program, and replaying the paths (``valuate``) gives
back the program's meaning. Trace MH moves the paths while keeping both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, NamedTuple

from .core import InvalidPath, Representation, RngState
from .discrete import MassFn
from .randomiser import dwrand
from .sampler import (
    SAMPLER,
    Bind,
    Pure,
    Sample,
    Score,
    _enter,
    _return,
    log_weight_and_value,
    log_weight_of,
    path_in,
    program_map,
    program_score,
    run,
    subterm,
    valuate,
    weight_of,
)

__all__ = [
    "TraceRep",
    "LabelledPath",
    "path_value",
    "Tracing",
    "MhState",
    "prior",
    "trace_from_model",
    "mhg_update",
    "uniform_discrete",
    "TraceKernel",
    "propose_psi",
    "ratio_rho",
    "ratio_from_logs",
    "Reciprocity",
    "ratio_reciprocity_check",
    "trace_mh_step",
    "marginal",
]


@dataclass(frozen=True)
class TraceRep:
    program: Any
    paths: Any


@dataclass
class MhState:
    """Current path of a concrete chain with its cached weight."""

    current: tuple
    cached_weight: float
    cached_log_weight: float

    @classmethod
    def at(cls, t, p) -> "MhState":
        lw = log_weight_of(t, p)
        return cls(tuple(p), math.exp(lw), lw)


def prior(t, base: Representation):
    """Distribution of complete paths of ``t`` under uniform draws, ignoring scores."""
    return _prior(t, [], base)


def _prior(t, stack: list, base: Representation):
    while True:
        t = _enter(t, stack)
        cls = type(t)
        if cls is Score:  # factors are dropped
            t = t.rest
        elif cls is Pure:
            if not stack:
                return base.ret(())
            t = _return(t.payload, stack)
        else:
            k = t.cont
            return base.bind(
                base.sample(),
                lambda r: base.map(_prior(k(r), list(stack), base), lambda q: (r,) + q),
            )


def trace_from_model(t, base: Representation) -> TraceRep:
    """Prior paths reweighted by the program's weight along each path."""
    return TraceRep(
        t,
        base.bind(prior(t, base), lambda p: base.map(base.score(weight_of(t, p)), lambda _: p)),
    )


_UNKNOWN = object()


class LabelledPath(tuple):
    """A path that remembers its value under one program.

    Compares and hashes as the plain tuple of draws; the label only saves
    replaying the program in :func:`path_value`.
    """

    def __new__(cls, draws, program, value=_UNKNOWN):
        self = tuple.__new__(cls, draws)
        self.program = program
        self.value = value
        return self


def path_value(t, p):
    """``valuate(t, p)``, reusing the label of a path built for ``t``."""
    if type(p) is LabelledPath and p.program is t:
        if p.value is _UNKNOWN:
            p.value = valuate(t, p)
        return p.value
    return valuate(t, p)


class Tracing(Representation):
    """Representation of values as (program, distribution over its paths).

    Paths built here are labelled with their values, so ``bind`` does not
    replay the program to recover the value of a path.
    """

    def __init__(self, base: Representation):
        self.base = base

    def ret(self, x):
        t = Pure(x)
        return TraceRep(t, self.base.ret(LabelledPath((), t, x)))

    def bind(self, tr: TraceRep, f: Callable[[Any], TraceRep]) -> TraceRep:
        base, t = self.base, tr.program
        program = Bind(t, lambda x: f(x).program)

        def extend(p):
            nxt = f(path_value(t, p))
            u = nxt.program
            return base.map(nxt.paths, lambda q: LabelledPath(p + q, program, path_value(u, q)))

        return TraceRep(program, base.bind(tr.paths, extend))

    def map(self, tr, g):
        t = tr.program
        program = program_map(t, g)
        return TraceRep(program, self.base.map(tr.paths, lambda p: LabelledPath(p, program, g(path_value(t, p)))))

    def sample(self):
        t = Sample(Pure)
        return TraceRep(t, self.base.map(self.base.sample(), lambda r: LabelledPath((r,), t, r)))

    def flip(self):
        return self.map(self.sample(), lambda r: r >= 0.5)

    def score(self, r):
        t = program_score(r)
        return TraceRep(t, self.base.map(self.base.score(r), lambda _: LabelledPath((), t, ())))

    def fail(self):
        return TraceRep(program_score(0.0), self.base.fail())

    def tmap(self, tau):
        return lambda tr: TraceRep(tr.program, tau(tr.paths))

    def meaning(self, tr) -> MassFn:
        out: dict = {}
        for p, m in self.base.meaning(tr.paths).items():
            x = path_value(tr.program, p)
            out[x] = out.get(x, 0.0) + m
        return MassFn._trusted(out)

    def __repr__(self) -> str:
        return f"Tracing({self.base!r})"


def mhg_update(base: Representation, a, psi: Callable, rho: Callable):
    """Propose ``y ~ psi(x)`` and keep it iff a fresh uniform is below ``min(1, rho(x, y))``."""
    return base.bind(
        a,
        lambda x: base.bind(
            psi(x),
            lambda y: base.map(base.sample(), lambda r: y if r < min(1.0, rho(x, y)) else x),
        ),
    )


_INDEX_CACHE: dict[int, list] = {}


def uniform_discrete(base: Representation, n: int):
    """Uniform choice from ``{0, ..., n}`` built from one uniform draw."""
    items = _INDEX_CACHE.get(n)
    if items is None:
        items = _INDEX_CACHE.setdefault(n, [(1.0, i) for i in range(n + 1)])
    return base.map(base.sample(), lambda r: dwrand(items, r).value)


def ratio_from_logs(log_wp: float, len_p: int, log_wq: float, len_q: int) -> float:
    """``w(q)(|p|+1) / (w(p)(|q|+1))`` from log weights; 0/0 is 0 and w/0 is inf."""
    if log_wq == -math.inf:
        return 0.0
    if log_wp == -math.inf:
        return math.inf
    lr = log_wq - log_wp + math.log(len_p + 1) - math.log(len_q + 1)
    return math.exp(lr) if lr < 709.0 else math.inf


def ratio_rho(t, p, q) -> float:
    if not path_in(t, p) or not path_in(t, q):
        raise InvalidPath("ratio needs complete paths of the program")
    return ratio_from_logs(log_weight_of(t, p), len(p), log_weight_of(t, q), len(q))


class TraceKernel:
    """The lightweight proposal ``psi_t`` and ratio ``rho_t`` for one program.

    ``psi_t(p)`` keeps a uniformly chosen prefix of ``p`` (any length from 0
    to ``|p|``) and regenerates the rest from the prior of the residual
    program. Log weights of visited paths are memoised.
    """

    def __init__(self, t, base: Representation, cache_size: int = 4096):
        self.program = t
        self.base = base
        self._replayed = lru_cache(maxsize=cache_size)(lambda p: log_weight_and_value(t, p))

    def log_weight(self, p) -> float:
        """Log weight of a complete path (memoised); raises InvalidPath otherwise."""
        return self._replayed(p)[0]

    def value(self, p):
        return self._replayed(p)[1]

    def psi(self, p):
        base, t = self.base, self.program
        self.log_weight(p)  # validates p, and rho will need it anyway

        def regenerate(i):
            keep = p[:i]
            rest, _ = subterm(t, keep)
            return base.map(prior(rest, base), lambda q: LabelledPath(keep + q, t))

        return base.bind(uniform_discrete(base, len(p)), regenerate)

    def rho(self, p, q) -> float:
        lq, x = self._replayed(q)
        if type(q) is LabelledPath and q.program is self.program:
            q.value = x
        return ratio_from_logs(self.log_weight(p), len(p), lq, len(q))


def propose_psi(t, p, rng: RngState) -> tuple[tuple, RngState]:
    """Draw one proposal from ``psi_t(p)`` with fresh randomness."""
    out, rng = run(TraceKernel(t, SAMPLER).psi(tuple(p)), rng)
    return out.payload, rng


class Reciprocity(NamedTuple):
    reciprocal: bool
    zero_symmetric: bool

    def __bool__(self) -> bool:
        return self.reciprocal and self.zero_symmetric


def ratio_reciprocity_check(t, p, q, rel_tol: float = 1e-9) -> Reciprocity:
    """Check ``rho(p,q) * rho(q,p) == 1`` (when both weights are positive) and ``rho(p,q)=0 <=> rho(q,p)=0``.

    Pairs where one weight is zero and the other positive fail the zero
    symmetry test; such pairs occur in models with hard constraints.
    """
    fwd, bwd = ratio_rho(t, p, q), ratio_rho(t, q, p)
    wp, wq = log_weight_of(t, p), log_weight_of(t, q)
    if wp > -math.inf and wq > -math.inf:
        reciprocal = abs(fwd * bwd - 1.0) <= rel_tol
    else:
        reciprocal = True
    return Reciprocity(reciprocal, (fwd == 0.0) == (bwd == 0.0))


def trace_mh_step(base: Representation, tr: TraceRep, kernel: TraceKernel | None = None) -> TraceRep:
    """One MHG update of the paths; the program is unchanged."""
    if kernel is None or kernel.program is not tr.program or kernel.base is not base:
        kernel = TraceKernel(tr.program, base)
    return TraceRep(tr.program, mhg_update(base, tr.paths, kernel.psi, kernel.rho))


def marginal(base: Representation, tr: TraceRep):
    """Forget the paths: replay each one and keep its value."""
    t = tr.program
    return base.map(tr.paths, lambda p: path_value(t, p))
