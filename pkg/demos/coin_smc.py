"""SMC and resample-move SMC on the beta-bernoulli coin (posterior mean 7/11)."""
import time

from modinf import SmcConfig, run_rmsmc, run_smc, summarize
from modinf.oracle import beta_bernoulli_posterior
from modinf.models import beta_bernoulli


def mean(particles):
    return summarize([w for w, _ in particles], [x for _, x in particles]).weighted_mean


exact, _ = beta_bernoulli_posterior(6, 9)
print(f"exact posterior mean {exact:.4f}")
for label, run, cfg in [
    ("smc", run_smc, SmcConfig(1000, 9, seed=3)),
    ("rmsmc, no moves", run_rmsmc, SmcConfig(1000, 9, 0, seed=3)),
    ("rmsmc, 1 move", run_rmsmc, SmcConfig(500, 9, 1, seed=3)),
]:
    t0 = time.perf_counter()
    est = mean(run(beta_bernoulli(), cfg))
    print(f"{label:16s} {est:.4f}  ({time.perf_counter() - t0:.1f}s)")
