import math
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from cflimit.contfrac import DigitWord, DomainError
from cflimit.indexsets import finite, full, make_geometric, make_i0
from cflimit.pressure import (
    bowen_dimension,
    classify_regularity,
    kz_increment_bounds,
    lambda_bracket,
    level_sum,
    level_sums,
    pressure_bracket,
    theta,
)


def exact(x) -> Fraction:
    return Fraction(*x.as_integer_ratio())


def brute_level_sum(digits, n, t):
    # sum over I^n of q_n^(-2t), by exhaustive enumeration
    return math.fsum(DigitWord.from_digits(w).q_cur ** (-2 * t) for w in product(digits, repeat=n))


def fib(n):
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def test_level_sum_examples():
    I = finite([1, 2])
    assert level_sum(I, 1.0, 1).contains(1.25)
    two = Fraction(1, 4) + Fraction(1, 9) + Fraction(1, 9) + Fraction(1, 25)
    b = level_sum(I, 1.0, 2)
    assert exact(b.lo) <= two <= exact(b.hi)
    for n in range(1, 10):
        assert level_sum(finite([1]), 0.7, n).contains(fib(n + 1) ** (-1.4))


@settings(max_examples=25, deadline=None)
@given(st.sets(st.integers(1, 12), min_size=1, max_size=4), st.integers(1, 4), st.floats(0.1, 1.5))
def test_level_sum_matches_enumeration(digits, n, t):
    b = level_sum(finite(sorted(digits)), t, n)
    v = brute_level_sum(sorted(digits), n, t)
    assert b.lo_float <= v * (1 + 1e-12) and v * (1 - 1e-12) <= b.hi_float


@settings(max_examples=25, deadline=None)
@given(st.sets(st.integers(1, 30), min_size=1, max_size=5), st.floats(0.2, 1.2))
def test_submultiplicative_and_sandwich(digits, t):
    tab = level_sums(finite(sorted(digits)), t, 6)
    S = [tab.level(n) for n in range(1, 7)]
    for m in range(1, 4):
        for n in range(1, 7 - m):
            assert S[m + n - 1].lo <= S[m - 1].hi * S[n - 1].hi * (1 + 1e-12)
    for n in range(1, 7):
        lower = (S[n - 1].lo_float * 4.0 ** (-t)) ** (1.0 / n)
        for k in range(1, 7):
            assert lower <= S[k - 1].hi_float ** (1.0 / k) * (1 + 1e-12)


def test_lambda_examples():
    assert lambda_bracket(finite([1]), 0.0).contains(1)
    b = lambda_bracket(full(), 1.0, target_width=1e-3)
    assert b.contains(1)
    # {1, 2} near the Bowen root: depth-12 level sums as the oracle
    I = finite([1, 2])
    tab = level_sums(I, 0.53, 12)
    S12 = tab.level(12)
    lam = lambda_bracket(I, 0.53)
    assert lam.lo_float <= S12.hi_float ** (1 / 12)
    assert (S12.lo_float * 4 ** -0.53) ** (1 / 12) <= lam.hi_float


def test_kz_increment_examples():
    lo, hi = kz_increment_bounds(2, 0.5)
    assert lo == pytest.approx(1 / 3) and hi == pytest.approx(1 / 2)
    lo, hi = kz_increment_bounds(2, 1.0)
    assert lo == pytest.approx(1 / 9) and hi == pytest.approx(1 / 4)
    lo, hi = kz_increment_bounds(50, 1e-9)
    assert lo == pytest.approx(1, abs=1e-7) and hi == pytest.approx(1, abs=1e-7)
    with pytest.raises(DomainError):
        kz_increment_bounds(1, 0.5)


def test_bowen_examples():
    b = bowen_dimension(finite([1])).bracket
    assert b.contains(0)
    r = bowen_dimension(finite([1, 2]), tol=0.02)
    assert r.converged
    assert 0.5 < r.bracket.lo_float and r.bracket.hi_float < 0.56


def test_pressure_decreasing_in_t():
    I = finite([1, 2, 3])
    ts = [0.2, 0.4, 0.6, 0.8]
    br = [lambda_bracket(I, t) for t in ts]
    for a, b, t in zip(br, br[1:], ts):
        assert a.lo_float >= b.lo_float - (a.hi_float - a.lo_float) - (b.hi_float - b.lo_float)
        assert b.hi_float < a.hi_float
    p = pressure_bracket(I, 0.8)
    assert p.hi_float < 0


def test_monotone_in_alphabet_and_truncation():
    small, big = finite([1, 3]), finite([1, 2, 3, 5])
    assert lambda_bracket(small, 0.6).lo <= lambda_bracket(big, 0.6).hi
    his = [lambda_bracket(full().truncate(N), 0.8, target_width=1e-3).hi_float for N in (4, 16, 64)]
    assert his == sorted(his)
    whole = lambda_bracket(full(), 0.8, target_width=1e-3)
    assert his[-1] <= whole.hi_float


def test_theta_examples():
    assert theta(full()) == Fraction(1, 2)
    assert theta(make_geometric(2)) == 0
    assert theta(finite([1, 2, 3])) == 0
    assert theta(make_i0(0.5)) == pytest.approx(0.25)


def test_classify_examples():
    assert classify_regularity(finite([1, 5, 9])) == "strongly-regular"
    assert classify_regularity(make_geometric(2)) == "cofinitely-regular"
    assert classify_regularity(full()) == "cofinitely-regular"


def test_kz_consistency_small():
    I = finite([2, 5, 9])
    d = 0.6
    base = lambda_bracket(I, d)
    new = lambda_bracket(I.union([4]), d)
    lo, hi = kz_increment_bounds(4, d)
    eps = base.hi_float - base.lo_float + new.hi_float - new.lo_float
    assert new.lo_float >= base.lo_float + lo - eps
    assert new.hi_float <= base.hi_float + hi + eps


def test_negative_t_rejected():
    with pytest.raises(ValueError):
        lambda_bracket(finite([1, 2]), -0.1)
