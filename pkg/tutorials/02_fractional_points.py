# ## Fractional points and swap rounding
#
# The multi-objective pipeline averages many sets into a fractional point,
# then turns that point back into a single set.

import numpy as np

import multisub as ms
from multisub.instances import random_coverage

f = random_coverage(12, 30, np.random.default_rng(1), density=0.2)

# ### Monte-Carlo estimate versus exact enumeration

x = ms.FractionalPoint(np.linspace(0.1, 0.9, 12))
est = ms.estimate_multilinear(f, x, ms.EstimatorConfig(samples=20_000, rng_seed=0))
est, ms.exact_multilinear(f, x)

# Shrinking a point towards zero loses at most proportionally.

ms.concavity_check(f, x, theta=0.5, cfg=ms.EstimatorConfig(100_000))

# ### Swap rounding
#
# Five bases of size 4 with uneven weights. Each element should land in the
# rounded set about as often as its coordinate says.

rng = np.random.default_rng(2)
bases = [ms.ElementSet(sorted(rng.choice(12, 4, replace=False).tolist())) for _ in range(5)]
w = rng.random(5)
comb = ms.ConvexCombination(bases, w / w.sum())
target = comb.point(12).coords

counts = np.zeros(12)
for seed in range(5000):
    counts[list(ms.swap_round(comb, seed))] += 1

np.round(np.c_[target, counts / 5000], 3)
