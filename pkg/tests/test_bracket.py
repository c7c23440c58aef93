import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cflimit.bracket import Bracket, EmptyIntersection

rationals = st.fractions(min_value=-1000, max_value=1000, max_denominator=10 ** 6)
positive = st.fractions(min_value=Fraction(1, 1000), max_value=1000, max_denominator=10 ** 6)


def exact(x) -> Fraction:
    return Fraction(*x.as_integer_ratio())


def encloses(b: Bracket, v: Fraction) -> bool:
    return exact(b.lo) <= v <= exact(b.hi)


def point(q: Fraction) -> Bracket:
    # outward rounding of the decimal-free rational q = a/b
    return Bracket.point(q.numerator) / q.denominator


def test_point_rounds_outward():
    b = point(Fraction(1, 3))
    assert encloses(b, Fraction(1, 3))
    assert b.lo < b.hi


def test_invalid_bracket():
    with pytest.raises(ValueError):
        Bracket(2, 1)


def test_intersect_and_empty():
    a, b = Bracket(0, 2), Bracket(1, 3)
    c = a.intersect(b)
    assert (float(c.lo), float(c.hi)) == (1.0, 2.0)
    with pytest.raises(EmptyIntersection):
        Bracket(0, 1).intersect(Bracket(2, 3))


def test_queries():
    b = Bracket(0.9, 1.1)
    assert b.straddles(1) and not b.below(1) and not b.above(1)
    assert Bracket(0.2, 0.3).below(1) and Bracket(2, 3).above(1)
    assert b.contains(1.0) and b.contains(Bracket(0.95, 1.05))
    assert Bracket(1, 2).uncertified().certified is False
    assert (Bracket(1, 2) + Bracket(1, 2).uncertified()).certified is False


@settings(max_examples=300)
@given(rationals, rationals, rationals, rationals)
def test_arithmetic_encloses_exact_result(a, b, c, d):
    x, y = point(a), point(b)
    assert encloses(x + y, a + b)
    assert encloses(x - y, a - b)
    assert encloses(x * y, a * b)
    if b != 0:
        assert encloses(x / y, a / b)
    wide = Bracket(min(float(c), float(d)), max(float(c), float(d)))
    # any point of the operands lands inside the result
    v = Fraction(min(float(c), float(d)))
    assert encloses(x * wide, a * v)


def test_division_by_zero_bracket():
    with pytest.raises(ZeroDivisionError):
        Bracket(1, 2) / Bracket(-1, 1)


@settings(max_examples=200)
@given(positive, st.integers(min_value=1, max_value=12))
def test_root_and_power(a, n):
    x = point(a)
    r = x.root(n)
    # r^n encloses a
    assert exact(r.lo) ** n <= a <= exact(r.hi) ** n
    p = x ** n
    assert encloses(p, a ** n)


@settings(max_examples=200)
@given(positive)
def test_log_exp(a):
    x = point(a)
    lg = x.log()
    v = math.log(a.numerator) - math.log(a.denominator)
    assert float(lg.lo) <= v + 1e-12 and v - 1e-12 <= float(lg.hi)
    e = lg.exp()
    assert encloses(e, a)


def test_float_views_round_outward():
    b = point(Fraction(1, 3))
    assert Fraction(b.lo_float) <= Fraction(1, 3) <= Fraction(b.hi_float)
    assert b.as_dict()["certified"] is True
