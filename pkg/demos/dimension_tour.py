"""Certified dimension brackets for a few alphabets, with the transfer
operator eigenvalue as an uncertified cross-check."""

from cflimit.indexsets import finite, full, make_geometric, make_i0
from cflimit.pressure import bowen_dimension, lambda_bracket
from cflimit.transfer import transfer_lambda

alphabets = {
    "{1,2}": finite([1, 2]),
    "{1,2,3}": finite([1, 2, 3]),
    "geometric(2)": make_geometric(2),
    "i0(0.5)": make_i0(0.5),
    "full": full(),
}

for name, I in alphabets.items():
    r = bowen_dimension(I, tol=0.01)
    b = r.bracket
    print(f"{name:14s} HD in [{b.lo_float:.5f}, {b.hi_float:.5f}]")

# at the midpoint the certified lambda bracket should contain the eigenvalue
I = finite([1, 2])
t = float(bowen_dimension(I, tol=0.01).bracket.mid)
lam = lambda_bracket(I, t)
eig = transfer_lambda(I, t).eigenvalue
print(f"t={t:.5f}: certified lambda [{lam.lo_float:.9f}, {lam.hi_float:.9f}], eigenvalue {eig:.9f}")
