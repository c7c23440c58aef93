"""Divergent versus convergent approximation functions:
survival of S+ against the product bound, and late witnesses on i0(0.5)."""

from cflimit.diophantine import ApproxFn, khinchine_experiment
from cflimit.indexsets import make_i0
from cflimit.measure import ConformalContext, sample_batch

ctx = ConformalContext.build(make_i0(0.5), seed=0)
batch = sample_batch(ctx, 2000, 300)
print(f"h = {ctx.h:.5f}")

div = khinchine_experiment(ctx, ApproxFn.log(ctx.h), 1.0, 0, 0, batch=batch)
for n in (0, 10, 100, 1000, 2000):
    print(f"n={n:5d} survival {div.survival[n]:.3f} bound {div.bound[n]:.3f}")

conv = khinchine_experiment(ctx, ApproxFn.power(0.5), 1.0, 0, 0, batch=batch)
print(f"power(0.5): witnesses after prefix in {conv.witness_after_prefix:.3f} of samples")
