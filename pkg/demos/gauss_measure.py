"""Sample the Gauss measure through the conformal sampler and compare
digit frequencies and the Lyapunov exponent with closed forms."""

import math

import numpy as np

from cflimit.indexsets import full
from cflimit.measure import ConformalContext, lyapunov_estimate, sample_batch

ctx = ConformalContext.build(full(), h=1.0, seed=0)
batch = sample_batch(ctx, 1000, 200)

print("digit  sampled  Gauss-Kuzmin")
for i in range(1, 6):
    f = np.mean(batch.digits == i)
    gk = math.log2(1 + 1 / (i * (i + 2)))
    print(f"{i:5d}  {f:.4f}   {gk:.4f}")

r = lyapunov_estimate(ctx, 100_000, replicas=50)
print(f"Lyapunov {r.birkhoff:.4f} +- {r.stderr:.4f}, exact {math.pi ** 2 / (6 * math.log(2)):.4f}")
