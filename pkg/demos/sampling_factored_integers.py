"""Drawing integers together with their factorizations, near-uniformly.

Run: python3 demos/sampling_factored_integers.py
"""
# %%
import random
from collections import Counter

import numpy as np

from primelearn.numtheory import count_multiplicity_vectors
from primelearn.sampler import Sampler, SamplerConfig, compute_step_two_tables, exact_pmf, support

cfg = SamplerConfig(m=10, K=2)
tables = compute_step_two_tables(cfg)
print("C_K =", tables.C_K, " exact class sizes below it:", tables.exact_counts)

# %%
# Each draw comes with its factorization for free; nothing is factored afterwards.
s = Sampler(cfg)
rng = random.Random(0)
for fx in (s.draw(rng) for _ in range(6)):
    print(f"{fx.value:5d} = " + " * ".join(f"{p}^{r}" for p, r in zip(fx.primes, fx.mults)))

# %%
# How close to uniform?  The exact pmf is small enough to expand by hand.
pmf = exact_pmf(cfg)
supp = sorted(support(cfg.m, cfg.K))
p = np.array([pmf[x] for x in supp])
u = 1 / len(supp)
print(f"support {len(supp)}; pmf/uniform ranges over [{p.min() / u:.3f}, {p.max() / u:.3f}]")

draws = Counter(s.draw(rng).value for _ in range(50_000))
tv = 0.5 * sum(abs(pmf[x] - draws[x] / 50_000) for x in supp)
print(f"TV(empirical, exact) with 5e4 draws: {tv:.4f}; rejection rate {s.rejection_rate:.3f}")

# %%
# Step 3 relies on counting lattice points in a simplex; the volume is the asymptotic count.
for m in (16, 24, 48, 96):
    mc = count_multiplicity_vectors([17, 101], m)
    print(f"m={m:3d}: count {mc.count:5d}, volume {mc.volume:9.1f}, ratio {mc.ratio:.3f}")
