"""Inference algorithms assembled from transformations.

* :func:`importance` -- independent weighted runs of the model
* :func:`smc` -- spawn, then ``k`` rounds of (resample, advance), then finish,
  over ``Suspension(Population(base))``
* :func:`trace_mh` -- a concrete trace Metropolis-Hastings chain
* :func:`rmsmc` -- :func:`smc` with ``l`` trace-MH moves after every resample,
  over ``Suspension(Tracing(Population(base)))``

``smc`` and ``rmsmc`` return population representations; with the default
sampler base these are programs, and :func:`run_population` turns them into
weighted particles.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any

from .core import DEFAULT_STEP_BUDGET, Representation, RngState, Weighted
from .randomiser import FAIL, Fail, Take, WeightedSelector, dwrand, preimage_intervals
from .sampler import EAGER_SAMPLER, SAMPLER, program_to_rep, run, valuate
from .tracing import (
    MhState,
    TraceKernel,
    TraceRep,
    Tracing,
    marginal,
    path_value,
    trace_from_model,
    trace_mh_step,
)
from .transformers import Done, Population, Suspension, advance, finish, spawn

__all__ = [
    "SmcConfig",
    "Take",
    "Fail",
    "FAIL",
    "dwrand",
    "preimage_intervals",
    "dwsampler",
    "resample",
    "importance",
    "smc",
    "rmsmc",
    "run_smc",
    "run_rmsmc",
    "run_population",
    "trace_mh",
    "trace_mh_chain",
]


@dataclass(frozen=True)
class SmcConfig:
    particles: int
    steps: int
    rejuvenation: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.particles < 1:
            raise ValueError("particles must be >= 1")
        if self.steps < 0 or self.rejuvenation < 0:
            raise ValueError("steps and rejuvenation must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def dwsampler(rep: Representation, xs):
    """Score by the total weight, then pick one item with probability proportional to its weight."""
    select = WeightedSelector(xs)

    def pick(r):
        choice = select(r)
        return rep.fail() if choice is FAIL else rep.ret(choice.value)

    return rep.bind(rep.score(select.total), lambda _: rep.bind(rep.sample(), pick))


def resample(pop: Population, n: int, a):
    """Multinomial resampling: ``n`` draws with replacement, each carrying ``total / n``."""
    return pop.base.bind(a, lambda xs: spawn(pop, n, dwsampler(pop, xs)))


def run_population(a, rng: RngState, *, workers: int = 1, budget: int = DEFAULT_STEP_BUDGET):
    """Run a population program; return the particles (weights already include the run weight)."""
    out, rng = run(a, rng, workers=workers, budget=budget)
    if out.weight != 1.0:
        particles = [Weighted(out.weight * w, x) for w, x in out.payload]
    else:
        particles = list(out.payload)
    return particles, rng


def importance(model, n: int, rng: RngState, *, budget: int = DEFAULT_STEP_BUDGET, workers: int = 1):
    """``n`` independent weighted runs of ``model``; run ``i`` uses stream ``rng.split(i)``."""
    if n < 1:
        raise ValueError("n must be >= 1")

    def one(i):
        return run(model, rng.split(i), budget=budget)[0]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(one, range(n)))
    else:
        out = [one(i) for i in range(n)]
    return out, rng.advance()


def _pending(resampler, finished):
    # resample unless every particle has finished; then the step is a no-op
    def step(pop, n, a):
        base = pop.base
        return base.bind(a, lambda xs: base.ret(xs) if all(finished(x) for _, x in xs) else resampler(pop, n, base.ret(xs)))

    return step


def smc(model, cfg: SmcConfig, base: Representation = EAGER_SAMPLER, *, resampler=resample):
    """SMC with ``cfg.particles`` particles for ``cfg.steps`` steps, as a ``Population(base)`` value.

    ``resampler(pop, n, a)`` acts on the population at the current suspension
    point; steps beyond the model's last score leave finished particles untouched.
    """
    n = cfg.particles
    pop = Population(base)
    sus = Suspension(pop)
    step = _pending(resampler, lambda t: type(t) is Done)
    a = spawn(pop, n, program_to_rep(model, sus))
    for _ in range(cfg.steps):
        a = advance(sus, step(pop, n, a))
    return finish(sus, a)


def rmsmc(model, cfg: SmcConfig, base: Representation = SAMPLER, *, resampler=resample):
    """Resample-move SMC: ``cfg.rejuvenation`` trace-MH moves after every resample."""
    n = cfg.particles
    pop = Population(base)
    sus = Suspension(Tracing(pop))
    a = program_to_rep(model, sus)
    a = TraceRep(a.program, spawn(pop, n, a.paths))
    for _ in range(cfg.steps):
        t = a.program
        done = lambda p, t=t: type(path_value(t, p)) is Done
        a = TraceRep(t, _pending(resampler, done)(pop, n, a.paths))
        if cfg.rejuvenation:
            kernel = TraceKernel(t, pop)
            move = lambda tr: trace_mh_step(pop, tr, kernel)
            for _ in range(cfg.rejuvenation):
                a = TraceRep(t, _unless_finished(pop, done, move, a))
        a = advance(sus, a)
    return marginal(pop, finish(sus, a))


def _unless_finished(pop, finished, move, tr):
    base = pop.base
    return base.bind(
        tr.paths,
        lambda xs: base.ret(xs) if all(finished(p) for _, p in xs) else move(TraceRep(tr.program, base.ret(xs))).paths,
    )


def run_smc(model, cfg: SmcConfig, *, workers: int = 1, budget: int = DEFAULT_STEP_BUDGET):
    particles, _ = run_population(smc(model, cfg), RngState.from_seed(cfg.seed), workers=workers, budget=budget)
    return particles


def run_rmsmc(model, cfg: SmcConfig, *, workers: int = 1, budget: int = DEFAULT_STEP_BUDGET):
    particles, _ = run_population(rmsmc(model, cfg), RngState.from_seed(cfg.seed), workers=workers, budget=budget)
    return particles


def trace_mh_chain(model, steps: int, rng: RngState, *, budget: int = DEFAULT_STEP_BUDGET):
    """Run a concrete trace-MH chain; return the list of visited ``MhState`` (initial state first)."""
    tr, rng = run(trace_from_model(model, SAMPLER).paths, rng, budget=budget)
    kernel = TraceKernel(model, SAMPLER)
    state = MhState.at(model, tr.payload)
    states = [state]
    for _ in range(steps):
        step = trace_mh_step(SAMPLER, TraceRep(model, SAMPLER.ret(state.current)), kernel)
        out, rng = run(step.paths, rng, budget=budget)
        p = out.payload
        if p is not state.current:
            lw = kernel.log_weight(p)
            state = MhState(p, math.exp(lw), lw)
        states.append(state)
    return states


def trace_mh(model, steps: int, burn_in: int, seed: int, *, budget: int = DEFAULT_STEP_BUDGET) -> list[Any]:
    """Values of the chain states after ``burn_in`` discarded steps."""
    if not 0 <= burn_in < steps:
        raise ValueError("need 0 <= burn_in < steps")
    states = trace_mh_chain(model, steps, RngState.from_seed(seed), budget=budget)
    return [valuate(model, s.current) for s in states[burn_in + 1 :]]
