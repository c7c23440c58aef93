"""Build the Liouville and I_delta alphabets and look at what makes them
special: stage windows, exceptional sets and regularity constants."""

from cflimit.indexsets import build_I_delta, build_liouville_set, check_c1, check_stage_inequalities

L = build_liouville_set(0.4, 3)
for c, m in zip(check_stage_inequalities(L), L.maxima()):
    print(f"stage {c['stage']}: max has {m.bit_length()} bits, window ok {c['window']}")

r = build_I_delta(0.7, n_max=1 << 14)
ex = r.exceptional_sets()
print(f"N1={r.n1} N2={r.n2}; {len(ex['minus_not_in_I'])} elements of I_- missing from I")
print("first elements:", r.set.first(12))
c1 = check_c1(r.set, 0.7)
print(f"c1 at h=0.7: {c1.verdict}, max/min {c1.spread:.1f}, witness {c1.witness}")
