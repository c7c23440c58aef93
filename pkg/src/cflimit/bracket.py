"""Closed intervals with outward rounding.

Endpoints are ``mpfr`` values at ``PRECISION`` bits.  Every operation
rounds the lower end down and the upper end up, so a bracket computed from
brackets that enclose the true values still encloses the true result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
from gmpy2 import mpfr

PRECISION = 128

_DOWN = gmpy2.context(precision=PRECISION, round=gmpy2.RoundDown)
_UP = gmpy2.context(precision=PRECISION, round=gmpy2.RoundUp)
_DOWN53 = gmpy2.context(precision=53, round=gmpy2.RoundDown)
_UP53 = gmpy2.context(precision=53, round=gmpy2.RoundUp)

INF = mpfr("inf")


def down(fn, *args):
    with gmpy2.context(_DOWN):
        return fn(*args)


def up(fn, *args):
    with gmpy2.context(_UP):
        return fn(*args)


def to_down(x):
    with gmpy2.context(_DOWN):
        return mpfr(x)


def to_up(x):
    with gmpy2.context(_UP):
        return mpfr(x)


class EmptyIntersection(ArithmeticError):
    """Two enclosures of the same quantity do not overlap."""


@dataclass(frozen=True)
class Bracket:
    """Certified enclosure ``[lo, hi]`` of a real number.

    ``certified`` is False when the enclosure is only heuristic (for example a
    partial enumeration that hit its budget); arithmetic propagates the flag.
    """

    lo: object
    hi: object
    certified: bool = True

    def __post_init__(self):
        lo, hi = to_down(self.lo), to_up(self.hi)
        if gmpy2.is_nan(lo) or gmpy2.is_nan(hi) or lo > hi:
            raise ValueError(f"invalid bracket [{self.lo}, {self.hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x) -> "Bracket":
        return cls(x, x)

    @classmethod
    def around(cls, value: float, rel: float, abs_: float = 0.0) -> "Bracket":
        """Bracket ``value * (1 -/+ rel) -/+ abs_`` (used for float envelopes)."""
        v = mpfr(value)
        lo = down(lambda: v - abs(v) * rel - abs_)
        hi = up(lambda: v + abs(v) * rel + abs_)
        return cls(lo, hi)

    # -- queries -----------------------------------------------------------
    @property
    def width(self):
        return up(lambda: self.hi - self.lo)

    @property
    def mid(self) -> float:
        if gmpy2.is_infinite(self.hi):
            return math.inf
        return float((self.lo + self.hi) / 2)

    @property
    def lo_float(self) -> float:
        with gmpy2.context(_DOWN53):
            return float(mpfr(self.lo))

    @property
    def hi_float(self) -> float:
        with gmpy2.context(_UP53):
            return float(mpfr(self.hi))

    def contains(self, x) -> bool:
        x = mpfr(x) if not isinstance(x, Bracket) else x
        if isinstance(x, Bracket):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    def below(self, c) -> bool:
        """True when every point of the bracket is ``< c``."""
        return self.hi < c

    def above(self, c) -> bool:
        return self.lo > c

    def straddles(self, c) -> bool:
        return not (self.below(c) or self.above(c))

    def intersect(self, other: "Bracket") -> "Bracket":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            raise EmptyIntersection(f"{self} and {other} are disjoint")
        return Bracket(lo, hi, self.certified and other.certified)

    def hull(self, other: "Bracket") -> "Bracket":
        return Bracket(min(self.lo, other.lo), max(self.hi, other.hi), self.certified and other.certified)

    # -- arithmetic --------------------------------------------------------
    def _coerce(self, other) -> "Bracket":
        return other if isinstance(other, Bracket) else Bracket(other, other)

    def __add__(self, other) -> "Bracket":
        o = self._coerce(other)
        return Bracket(down(lambda: self.lo + o.lo), up(lambda: self.hi + o.hi), self.certified and o.certified)

    __radd__ = __add__

    def __neg__(self) -> "Bracket":
        return Bracket(-self.hi, -self.lo, self.certified)

    def __sub__(self, other) -> "Bracket":
        o = self._coerce(other)
        return Bracket(down(lambda: self.lo - o.hi), up(lambda: self.hi - o.lo), self.certified and o.certified)

    def __rsub__(self, other) -> "Bracket":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Bracket":
        o = self._coerce(other)
        pairs = [(self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi)]
        with gmpy2.context(_DOWN):
            lo = min(a * b for a, b in pairs if not (gmpy2.is_infinite(a) and b == 0 or gmpy2.is_infinite(b) and a == 0))
        with gmpy2.context(_UP):
            hi = max(a * b for a, b in pairs if not (gmpy2.is_infinite(a) and b == 0 or gmpy2.is_infinite(b) and a == 0))
        return Bracket(lo, hi, self.certified and o.certified)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Bracket":
        o = self._coerce(other)
        if o.lo <= 0 <= o.hi:
            raise ZeroDivisionError("divisor bracket contains 0")
        inv = Bracket(down(lambda: 1 / o.hi), up(lambda: 1 / o.lo), o.certified)
        return self * inv

    def __pow__(self, s) -> "Bracket":
        """Real power of a nonnegative bracket, ``s >= 0`` given as a float or mpfr."""
        if self.lo < 0:
            raise ValueError("power of a bracket with negative part")
        s = mpfr(s)
        if s < 0:
            return Bracket(1, 1) / (self ** (-s))
        return Bracket(down(lambda: self.lo ** s), up(lambda: self.hi ** s), self.certified)

    def root(self, n: int) -> "Bracket":
        if n == 1:
            return self
        inv_lo = down(lambda: mpfr(1) / n)
        inv_hi = up(lambda: mpfr(1) / n)
        # x^(1/n) is increasing in the exponent for x >= 1 and decreasing for x < 1
        lo = down(lambda: min(self.lo ** inv_lo, self.lo ** inv_hi))
        hi = up(lambda: max(self.hi ** inv_lo, self.hi ** inv_hi))
        return Bracket(lo, hi, self.certified)

    def log(self) -> "Bracket":
        if self.lo <= 0:
            lo = -INF
        else:
            lo = down(gmpy2.log, self.lo)
        return Bracket(lo, up(gmpy2.log, self.hi), self.certified)

    def exp(self) -> "Bracket":
        return Bracket(down(gmpy2.exp, self.lo), up(gmpy2.exp, self.hi), self.certified)

    def uncertified(self) -> "Bracket":
        return Bracket(self.lo, self.hi, False)

    def as_dict(self) -> dict:
        return {"lo": self.lo_float, "hi": self.hi_float, "certified": self.certified}

    def __repr__(self) -> str:
        flag = "" if self.certified else ", uncertified"
        return f"Bracket({self.lo_float!r}, {self.hi_float!r}{flag})"
