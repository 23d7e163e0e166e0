"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Seeds are pinned, so every statistical check is reproducible. The lines are
also collected in ``RESULTS`` and echoed in the pytest terminal summary.
Run directly (``python3 tests/test_acceptance.py``) to print just the lines.
"""

import itertools
import math
import random
import statistics
import subprocess
import sys
import time

import pytest

from gen import GRID_WEIGHTS, PAYLOADS, build, kernel, random_program, random_term, representations
from modinf import ENUM, TERM, DiscretizedBase, RngState, SmcConfig, exact_meaning, program_to_rep, run, summarize
from modinf.algorithms import resample, rmsmc, run_population, smc, trace_mh
from modinf.discrete import aggr, enum_meaning, mass_bind, term_meaning, term_to_rep
from modinf.models import GAUSSIAN_MEAN_DATA, SSM_DATA, SSM_PARAMS, beta_bernoulli, gaussian_mean, lin_gauss_ssm
from modinf.oracle import batch_means_se, beta_bernoulli_posterior, kalman_filter, normal_normal_posterior
from modinf.randomiser import FAIL, Take, dwrand, preimage_intervals
from modinf.sampler import SAMPLER, Pure, Sample, Score, weight_of
from modinf.tracing import TraceKernel, TraceRep, prior, propose_psi, ratio_reciprocity_check, trace_mh_step
from modinf.transformers import ListT, Population, Suspension, Weighting, spawn, waggr

RESULTS = {}
REPLICATES = 100


def report(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def estimate(particles):
    return summarize([w for w, _ in particles], [float(x) for _, x in particles]).weighted_mean


def replicate_check(estimates, oracle, k=3.0):
    mean = statistics.fmean(estimates)
    se = statistics.stdev(estimates) / math.sqrt(len(estimates))
    return abs(mean - oracle) <= k * se, mean, se


# --- 1: discrete validity ---------------------------------------------------


def _laws_error(rep, t, ts, gs):
    f, g = kernel(ts, rep), kernel(gs, rep)
    m = rep.meaning
    a = term_to_rep(t, rep)
    mu = term_meaning(t)
    pairs = [
        (m(a), mu),
        (m(rep.bind(a, f)), mass_bind(mu, lambda x: term_meaning(ts[x % len(ts)]))),
        (m(rep.bind(a, rep.ret)), mu),
        (m(rep.bind(rep.bind(a, f), g)), m(rep.bind(a, lambda x: rep.bind(f(x), g)))),
        (m(rep.map(a, lambda x: x + 10)), m(rep.bind(a, lambda x: rep.ret(x + 10)))),
        (m(rep.sequence([a, f(1)])), m(rep.bind(a, lambda x: rep.bind(f(1), lambda y: rep.ret((x, y)))))),
    ]
    pairs += [(m(rep.bind(rep.ret(x), f)), m(f(x))) for x in PAYLOADS]
    return max(x.max_abs_diff(y) for x, y in pairs)


TRANSFORMERS = (Weighting, ListT, Population, Suspension)


def _transformations_error(t, xs, n):
    mu = term_meaning(t)
    errs = [enum_meaning(aggr(xs)).max_abs_diff(enum_meaning(xs))]
    a = term_to_rep(t, ENUM)
    errs.append(enum_meaning(aggr(a)).max_abs_diff(mu))
    for make in TRANSFORMERS:
        rep = make(ENUM)
        errs.append(rep.meaning(rep.lift(a)).max_abs_diff(mu))
        errs.append(rep.meaning(rep.tmap(aggr)(term_to_rep(t, rep))).max_abs_diff(mu))
    w = Weighting(ENUM)
    errs.append(ENUM.meaning(waggr(w, term_to_rep(t, w))).max_abs_diff(mu))
    # three particles over terms multiply out too far; enumeration copes
    for base in (ENUM, TERM) if n < 3 else (ENUM,):
        pop = Population(base)
        errs.append(pop.meaning(spawn(pop, n, term_to_rep(t, pop))).max_abs_diff(mu))
    return max(errs)


def _smc_composite_holds(rng):
    # grid-aligned resampling: two particles, scores in {0, 1, 3} on four cells or {0, 1} on two
    if rng.random() < 0.5:
        cells, depth, kmax, weights = 2, 4, 3, (0.0, 1.0)
    else:
        cells, depth, kmax, weights = 4, 2, 1, GRID_WEIGHTS
    base = DiscretizedBase(cells)
    prog = build(random_program(rng, depth, weights), SAMPLER)
    ref = exact_meaning(base, program_to_rep(prog, base))
    got = Population(base).meaning(smc(prog, SmcConfig(2, rng.randint(0, kmax)), base))
    return got.max_abs_diff(ref)


def test_criterion_1_discrete_validity():
    tol = 1e-10
    rng = random.Random(20240601)
    reps = representations()
    start = time.perf_counter()
    cases, worst = 0, 0.0
    for i in range(520):
        t = random_term(rng, 6)
        ts = [random_term(rng, 3) for _ in range(rng.randint(1, 3))]
        gs = [random_term(rng, 2) for _ in range(rng.randint(1, 3))]
        xs = [(rng.choice([0.0, 0.25, 1.0, 2.0]), rng.randrange(4)) for _ in range(rng.randrange(8))]
        _, rep = reps[i % len(reps)]
        worst = max(worst, _laws_error(rep, t, ts, gs), _transformations_error(t, xs, 3 if i % 10 == 9 else 1 + i % 2))
        if i % 4 == 0:
            worst = max(worst, _smc_composite_holds(rng))
        cases += 1
    elapsed = time.perf_counter() - start
    report(1, worst <= tol and elapsed < 60.0, f"{cases} random cases, max |diff| {worst:.2e} (tol 1e-10), {elapsed:.1f}s (limit 60s)")


# --- 2: dwrand lemma --------------------------------------------------------


def _populations(rng):
    fixed = [
        [(0.5, "a"), (0.25, "b"), (0.25, "c")],
        [(1.0, "x")],
        [(0.0, "a"), (2.0, "b"), (0.0, "c")],
        [(1e-300, "tiny"), (1.0, "big")],
        [(3.0, i) for i in range(100)],
    ]
    for xs in fixed:
        yield xs
    for _ in range(2000):
        n = rng.randint(1, 30)
        yield [(rng.choice([0.0, rng.random(), rng.expovariate(1.0) * 10]), i) for i in range(n)]


def test_criterion_2_dwrand_lemma():
    rng = random.Random(7)
    worst, mismatches, checked, zero_checked = 0.0, 0, 0, 0
    for xs in _populations(rng):
        total = math.fsum(w for w, _ in xs)
        if total == 0.0:
            continue
        ivs = preimage_intervals(xs)
        for (w, x), (lo, hi) in zip(xs, ivs):
            worst = max(worst, abs((hi - lo) - w / total))
            if hi - lo > 1e-9:
                # draws inside the interval select the item
                for r in (lo + 1e-12 * (hi - lo), 0.5 * (lo + hi), hi - 1e-9 * (hi - lo)):
                    if dwrand(xs, r) != Take(x):
                        mismatches += 1
        checked += 1
    for xs in ([], [(0.0, "a")], [(0.0, i) for i in range(10)]):
        for j in range(1000):
            if dwrand(xs, j / 1000) is not FAIL:
                mismatches += 1
        zero_checked += 1
    ok = worst <= 1e-12 and mismatches == 0
    report(2, ok, f"{checked} positive-total populations, max interval error {worst:.2e} (tol 1e-12), {zero_checked} zero-total populations all Fail, {mismatches} mismatches")


# --- 3: MH stationarity -----------------------------------------------------

# acceptance thresholds and the uniform prefix choice must land on the cell
# grid, so ratios between weights are multiples of 1/cells
_EIGHT_WEIGHTS = (1.0, 2.0, 4.0, 8.0, 8.0, 4.0, 2.0, 1.0)


def _two_cells():
    return Sample(lambda r: Score(2.0 if r >= 0.5 else 1.0, Pure(r >= 0.5)))


def _eight_cells():
    def cell(r):
        return int(r * 8)

    return Sample(lambda r: Score(_EIGHT_WEIGHTS[cell(r)], Pure(cell(r))))


def _stationarity_error(t, cells, draws):
    base = DiscretizedBase(cells)
    mids = [(j + 0.5) / cells for j in range(cells)]
    states = list(itertools.product(mids, repeat=draws))
    kernel = TraceKernel(t, base)
    K = {p: base.meaning(trace_mh_step(base, TraceRep(t, base.ret(p)), kernel).paths) for p in states}
    z = math.fsum(weight_of(t, p) for p in states)
    pi = {p: weight_of(t, p) / z for p in states}
    return max(abs(math.fsum(pi[p] * K[p].get(q) for p in states) - pi[q]) for q in states)


def test_criterion_3_mh_stationarity():
    start = time.perf_counter()
    err2 = _stationarity_error(_two_cells(), 2, 1)
    err8 = _stationarity_error(_eight_cells(), 8, 1)
    elapsed = time.perf_counter() - start
    ok = max(err2, err8) <= 1e-10 and elapsed < 5.0
    report(3, ok, f"|piK - pi| = {err2:.2e} (2 states), {err8:.2e} (8 states), tol 1e-10, {elapsed:.2f}s (limit 5s)")


# --- 4: rho reciprocity -----------------------------------------------------


def _reciprocity_failures(t, pairs, seed):
    # walk a chain of proposals p -> psi(p), checking every consecutive pair
    out, rng = run(prior(t, SAMPLER), RngState.from_seed(seed))
    p, bad = out.payload, 0
    for _ in range(pairs):
        q, rng = propose_psi(t, p, rng)
        if not ratio_reciprocity_check(t, p, q, rel_tol=1e-9):
            bad += 1
        p = q
    return bad


def test_criterion_4_rho_reciprocity():
    pairs = 10**4
    parts, total_bad = [], 0
    for name, model in (("gaussian-mean", gaussian_mean), ("lin-gauss-ssm", lin_gauss_ssm), ("beta-bernoulli", beta_bernoulli)):
        bad = _reciprocity_failures(model(), pairs, seed=31)
        total_bad += bad
        parts.append(f"{name} {pairs - bad}/{pairs}")
    report(4, total_bad == 0, "rho(p,q)*rho(q,p) within 1e-9 of 1: " + ", ".join(parts))


# --- 5: SMC conjugate -------------------------------------------------------


def _smc_estimates(model, cfg_of, runner=smc):
    out = []
    for seed in range(REPLICATES):
        cfg = cfg_of(seed)
        particles, _ = run_population(runner(model, cfg), RngState.from_seed(seed))
        out.append(estimate(particles))
    return out


def test_criterion_5_smc_conjugate():
    oracle, _ = beta_bernoulli_posterior(6, 9)
    start = time.perf_counter()
    ests = _smc_estimates(beta_bernoulli(), lambda s: SmcConfig(1000, 9, seed=s))
    elapsed = time.perf_counter() - start
    ok, mean, se = replicate_check(ests, oracle)
    report(5, ok and elapsed < 30.0, f"mean of {REPLICATES} estimates {mean:.5f} vs 7/11={oracle:.5f}, |diff| {abs(mean - oracle):.2e} <= 3*SE {3 * se:.2e}: {ok}; {elapsed:.1f}s (limit 30s)")


# --- 6: trace MH conjugate --------------------------------------------------


def test_criterion_6_trace_mh_conjugate():
    mean, var = normal_normal_posterior(0.0, 1.0, 1.0, GAUSSIAN_MEAN_DATA)
    start = time.perf_counter()
    xs = trace_mh(gaussian_mean(), 20000, 2000, seed=1)
    elapsed = time.perf_counter() - start
    m = statistics.fmean(xs)
    v = statistics.pvariance(xs)
    se = batch_means_se(xs)
    ok_mean = abs(m - mean) <= 3 * se
    ok_var = abs(v - var) <= 0.15 * var
    report(6, ok_mean and ok_var and elapsed < 30.0, f"chain mean {m:.4f} vs {mean:.4f} (3 batch SE {3 * se:.4f}), variance {v:.4f} vs {var:.4f} (rel err {abs(v - var) / var:.3f} <= 0.15), {elapsed:.1f}s (limit 30s)")


# --- 7: SMC vs Kalman -------------------------------------------------------


def test_criterion_7_smc_kalman():
    oracle, _ = kalman_filter(SSM_PARAMS, SSM_DATA)[-1]
    ests = _smc_estimates(lin_gauss_ssm(), lambda s: SmcConfig(2000, len(SSM_DATA), seed=s))
    ok, mean, se = replicate_check(ests, oracle)
    report(7, ok, f"mean of {REPLICATES} final-state estimates {mean:.5f} vs Kalman {oracle:.5f}, |diff| {abs(mean - oracle):.2e} <= 3*SE {3 * se:.2e}")


# --- 8: rmsmc ---------------------------------------------------------------


def _recording_resampler(log):
    def resampler(pop, n, a):
        base = pop.base

        def step(xs):
            before = math.fsum(w for w, _ in xs)
            return base.map(resample(pop, n, base.ret(xs)), lambda ys: log.append((before, math.fsum(w for w, _ in ys))) or ys)

        return base.bind(a, step)

    return resampler


def test_criterion_8_rmsmc():
    oracle, _ = beta_bernoulli_posterior(6, 9)
    model = beta_bernoulli()
    log = []
    runner = lambda m, cfg: rmsmc(m, cfg, resampler=_recording_resampler(log))
    start = time.perf_counter()
    ests0 = _smc_estimates(model, lambda s: SmcConfig(1000, 9, 0, seed=s), runner)
    ok0, mean0, se0 = replicate_check(ests0, oracle)
    smc_ests = _smc_estimates(model, lambda s: SmcConfig(1000, 9, seed=s))
    same = sum(a == b for a, b in zip(ests0, smc_ests))
    ests2 = _smc_estimates(model, lambda s: SmcConfig(1000, 9, 2, seed=s), runner)
    ok2, mean2, se2 = replicate_check(ests2, oracle)
    elapsed = time.perf_counter() - start
    worst = max(abs(after - before) / before for before, after in log if before > 0)
    ok_w = worst <= 1e-9 and len(log) == 2 * REPLICATES * 9
    detail = (
        f"l=0 mean {mean0:.5f} (|diff| {abs(mean0 - oracle):.2e} <= 3*SE {3 * se0:.2e}: {ok0}, "
        f"{same}/{REPLICATES} replicates equal to smc); "
        f"l=2 mean {mean2:.5f} (|diff| {abs(mean2 - oracle):.2e} <= 3*SE {3 * se2:.2e}: {ok2}); "
        f"{len(log)} resamples, max relative weight change {worst:.2e} (tol 1e-9); {elapsed:.0f}s"
    )
    report(8, ok0 and ok2 and ok_w, detail)


# --- 9: determinism ---------------------------------------------------------

CLI_SPECS = [
    ["--model", "sprinkler", "--algo", "enumerate"],
    ["--model", "geometric-soft", "--algo", "importance", "--particles", "500", "--seed", "3"],
    ["--model", "beta-bernoulli", "--algo", "smc", "--particles", "1000", "--steps", "4", "--seed", "7"],
    ["--model", "lin-gauss-ssm", "--algo", "smc", "--particles", "500", "--steps", "3", "--seed", "11", "--output", "csv"],
    ["--model", "gaussian-mean", "--algo", "mh", "--steps", "3000", "--burnin", "500", "--seed", "1"],
    ["--model", "beta-bernoulli", "--algo", "rmsmc", "--particles", "200", "--steps", "9", "--rejuv", "1", "--seed", "5"],
]


def _cli(args):
    res = subprocess.run([sys.executable, "-m", "modinf.cli", *args], capture_output=True)
    assert res.returncode == 0, res.stderr
    return res.stdout


def _parallel_variant(args):
    algo = args[args.index("--algo") + 1]
    return args + ["--workers", "4"] if algo in ("importance", "smc", "rmsmc") else None


def test_criterion_9_determinism():
    checked, bad = 0, []
    for args in CLI_SPECS:
        first = _cli(args)
        if _cli(args) != first:
            bad.append(" ".join(args))
        par = _parallel_variant(args)
        if par is not None and _cli(par) != first:
            bad.append(" ".join(par))
        checked += 1
    report(9, not bad, f"{checked} run specs byte-identical across two invocations and workers 1 vs 4" + (f"; differing: {bad}" if bad else ""))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
