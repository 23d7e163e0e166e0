import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gen import build, program_strategy
from modinf import DiscretizedBase, RngState, exact_meaning, importance, program_to_rep, run, summarize
from modinf.core import InvalidPath
from modinf.models import gaussian_mean, lin_gauss_ssm
from modinf.oracle import normal_normal_posterior
from modinf.sampler import SAMPLER, Pure, Sample, Score, path_in, valuate, weight_of
from modinf.tracing import (
    LabelledPath,
    TraceKernel,
    TraceRep,
    Tracing,
    marginal,
    mhg_update,
    prior,
    propose_psi,
    ratio_from_logs,
    ratio_reciprocity_check,
    ratio_rho,
    trace_from_model,
    trace_mh_step,
)
from modinf.transformers import Population

TOL = 1e-10
CELLS = DiscretizedBase(2)


def two_branch():
    return Sample(lambda r: Score(2.0 if r >= 0.5 else 1.0, Pure(r >= 0.5)))


_W = {0: 1.0, 1: 2.0, 2: 4.0, 3: 4.0}


def three_bits():
    def bits(a, b, c):
        return (a >= 0.5, b >= 0.5, c >= 0.5)

    return Sample(lambda a: Sample(lambda b: Sample(lambda c: Score(_W[sum(bits(a, b, c))], Pure(bits(a, b, c))))))


def test_prior_examples():
    assert CELLS.meaning(prior(Pure("x"), CELLS)) == {(): 1.0}
    assert CELLS.meaning(prior(Score(5.0, Pure("x")), CELLS)) == {(): 1.0}
    out, _ = run(prior(Sample(Pure), SAMPLER), RngState.from_seed(3))
    (r,) = out.payload
    assert 0.0 <= r < 1.0 and out.weight == 1.0


def test_trace_from_model_examples():
    assert CELLS.meaning(trace_from_model(Pure("x"), CELLS).paths) == {(): 1.0}
    assert CELLS.meaning(trace_from_model(Score(2.0, Pure("x")), CELLS).paths) == {(): 2.0}


@settings(max_examples=80)
@given(program_strategy(4))
def test_trace_pushforward_is_exact(desc):
    t = build(desc, SAMPLER)
    tr = trace_from_model(t, CELLS)
    ref = exact_meaning(CELLS, program_to_rep(t, CELLS))
    assert Tracing(CELLS).meaning(tr).isclose(ref, TOL)
    assert CELLS.meaning(marginal(CELLS, tr)).isclose(ref, TOL)
    for p in CELLS.meaning(tr.paths):
        assert path_in(t, p)


@settings(max_examples=80)
@given(program_strategy(4))
def test_tracing_paths_are_complete_and_labelled(desc):
    rep = Tracing(CELLS)
    tr = build(desc, rep)
    for w, p in tr.paths:
        assert path_in(tr.program, p)
        if type(p) is LabelledPath and p.program is tr.program:
            assert p.value == valuate(tr.program, p)


def test_marginal_of_pure():
    assert CELLS.meaning(marginal(CELLS, TraceRep(Pure("x"), CELLS.ret(())))) == {"x": 1.0}


def test_mhg_update_extremes():
    base = CELLS
    a = base.ret("x")
    propose = lambda x: base.ret("y")
    assert base.meaning(mhg_update(base, a, propose, lambda x, y: 0.0)) == {"x": 1.0}
    assert base.meaning(mhg_update(base, a, propose, lambda x, y: math.inf)) == {"y": 1.0}
    assert base.meaning(mhg_update(base, a, propose, lambda x, y: 1.0)) == {"y": 1.0}


def test_mhg_update_two_state_detailed_balance():
    # target pi = (1/3, 2/3) on {a, b}; propose the other state
    base = DiscretizedBase(2)
    pi = {"a": 1.0, "b": 2.0}
    other = {"a": "b", "b": "a"}
    step = lambda x: mhg_update(base, base.ret(x), lambda s: base.ret(other[s]), lambda s, u: pi[u] / pi[s])
    out = {y: sum(pi[x] * base.meaning(step(x)).get(y) for x in pi) for y in pi}
    assert out == pytest.approx(pi, abs=TOL)


def test_psi_examples():
    t = Sample(Pure)
    k = TraceKernel(t, SAMPLER)
    # first draw picks the prefix length (two choices here), the rest regenerate
    assert valuate(k.psi((0.3,)), [0.1, 0.9]) == (0.9,)
    assert valuate(k.psi((0.3,)), [0.8]) == (0.3,)
    # the empty path keeps nothing and regenerates everything
    two = Sample(lambda a: Sample(lambda b: Pure(a + b)))
    out, _ = propose_psi(Pure(1), (), RngState.from_seed(0))
    assert out == ()
    out, _ = propose_psi(two, (0.1, 0.2), RngState.from_seed(0))
    assert len(out) == 2 and path_in(two, out)
    with pytest.raises(InvalidPath):
        k.psi((0.3, 0.4))


def test_ratio_examples():
    t = two_branch()
    assert ratio_rho(t, (0.7,), (0.7,)) == 1.0
    assert ratio_from_logs(math.log(1.0), 3, math.log(2.0), 1) == pytest.approx(4.0)
    assert ratio_from_logs(0.0, 1, -math.inf, 1) == 0.0
    assert ratio_from_logs(-math.inf, 1, 0.0, 1) == math.inf
    with pytest.raises(InvalidPath):
        ratio_rho(t, (), (0.5,))


@pytest.mark.parametrize("model", [gaussian_mean, lin_gauss_ssm], ids=["gaussian-mean", "lin-gauss-ssm"])
def test_reciprocity_on_proposals(model):
    t = model()
    rng = RngState.from_seed(8)
    tr, rng = run(trace_from_model(t, SAMPLER).paths, rng)
    p = tr.payload
    for _ in range(300):
        q, rng = propose_psi(t, p, rng)
        assert ratio_reciprocity_check(t, p, q)
        p = q


def test_zero_symmetry_fails_under_hard_constraints():
    t = Sample(lambda r: Score(1.0 if r < 0.5 else 0.0, Pure(r)))
    check = ratio_reciprocity_check(t, (0.2,), (0.7,))
    assert check.reciprocal and not check.zero_symmetric
    assert not check


def test_mh_step_on_pure_is_a_fixed_point():
    tr = TraceRep(Pure("x"), CELLS.ret(()))
    step = trace_mh_step(CELLS, tr)
    assert Tracing(CELLS).meaning(step) == Tracing(CELLS).meaning(tr)


def transition_matrix(t, cells, n):
    base = DiscretizedBase(cells)
    mids = [(j + 0.5) / cells for j in range(cells)]
    states = list(itertools.product(mids, repeat=n))
    kernel = TraceKernel(t, base)
    K = {p: base.meaning(trace_mh_step(base, TraceRep(t, base.ret(p)), kernel).paths) for p in states}
    pi = {p: weight_of(t, p) for p in states}
    z = sum(pi.values())
    return states, K, {p: w / z for p, w in pi.items()}


@pytest.mark.parametrize("model,cells,draws", [(two_branch, 2, 1), (three_bits, 4, 3)], ids=["two-cell", "eight-cell"])
def test_trace_mh_is_exactly_stationary(model, cells, draws):
    states, K, pi = transition_matrix(model(), cells, draws)
    for p in states:
        assert sum(K[p].values()) == pytest.approx(1.0, abs=TOL)
    for q in states:
        assert abs(sum(pi[p] * K[p].get(q) for p in states) - pi[q]) <= TOL


def test_rmsmc_stack_meaning_matches_model():
    # a trace MH step inside Tracing(Population(cells)) keeps the meaning
    base = Population(DiscretizedBase(2))
    t = two_branch()
    tr = trace_from_model(t, base)
    moved = trace_mh_step(base, tr)
    assert Tracing(base).meaning(moved).isclose(Tracing(base).meaning(tr), TOL)


def test_marginal_matches_conjugate_posterior():
    t = gaussian_mean()
    n = 20000
    out, _ = importance(marginal(SAMPLER, trace_from_model(t, SAMPLER)), n, RngState.from_seed(4))
    s = summarize([w for w, _ in out], [x for _, x in out])
    mean, _ = normal_normal_posterior(0.0, 1.0, 1.0, [0.8, 1.3, 0.2, 1.9, 1.1])
    assert abs(s.weighted_mean - mean) <= 3 * s.std_error
