"""Exact posterior of the sprinkler network, three ways.

The same program is interpreted over a discretized uniform (exact), by
plain importance sampling, and through a two-particle SMC stack whose
meaning matches the model exactly.
"""
from modinf import DiscretizedBase, RngState, SmcConfig, exact_meaning, importance, program_to_rep, smc
from modinf.models import REGISTRY, sprinkler
from modinf.sampler import Pure, Sample, Score
from modinf.transformers import Population

base = DiscretizedBase(REGISTRY["sprinkler"].cells)
post = exact_meaning(base, program_to_rep(sprinkler(), base)).normalized()
print("exact      P(rain | wet) =", round(post[True], 6))

particles, _ = importance(sprinkler(), 20000, RngState.from_seed(1))
z = sum(w for w, _ in particles)
print("importance P(rain | wet) =", round(sum(w for w, x in particles if x) / z, 6))

# a coin thresholded at 1/2 with weights 1 and 3: exact over four cells
coin = Sample(lambda r: Score(3.0 if r >= 0.5 else 1.0, Pure(r >= 0.5)))
cells = DiscretizedBase(4)
print("model meaning:", dict(exact_meaning(cells, program_to_rep(coin, cells))))
print("smc meaning:  ", dict(Population(cells).meaning(smc(coin, SmcConfig(2, 1), cells))))
