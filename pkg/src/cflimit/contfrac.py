"""Exact continued-fraction arithmetic on [0, 1].

Digits are positive integers.  Convergent matrices are carried in Python
integers, so nothing here overflows; real-valued outputs (logarithms) are
floats unless a precision is requested.

Indexing follows ``q_{-1} = 0, q_0 = 1`` so that after consuming the digits
``w_0 .. w_{n-1}`` the pair ``(p_cur, q_cur)`` is the depth-``n`` convergent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import islice
from typing import Iterable, Iterator, Optional, Sequence

import gmpy2


class InvalidDigitError(ValueError):
    """A continued-fraction digit was not a positive integer."""


class DomainError(ValueError):
    """An argument lies outside the domain of the map."""


@dataclass(frozen=True)
class DigitWord:
    """Finite digit string together with its convergent matrix."""

    digits: tuple = ()
    p_prev: int = 1
    p_cur: int = 0
    q_prev: int = 0
    q_cur: int = 1

    @classmethod
    def empty(cls) -> "DigitWord":
        return cls()

    @classmethod
    def from_digits(cls, digits: Iterable[int]) -> "DigitWord":
        p_prev, p_cur, q_prev, q_cur = 1, 0, 0, 1
        ds = []
        for i in digits:
            i = _check_digit(i)
            p_prev, p_cur = p_cur, i * p_cur + p_prev
            q_prev, q_cur = q_cur, i * q_cur + q_prev
            ds.append(i)
        return cls(tuple(ds), p_prev, p_cur, q_prev, q_cur)

    def __len__(self) -> int:
        return len(self.digits)

    @property
    def value(self) -> Fraction:
        """The convergent ``p_n / q_n`` (0 for the empty word)."""
        return Fraction(self.p_cur, self.q_cur)

    @property
    def determinant(self) -> int:
        return self.p_cur * self.q_prev - self.p_prev * self.q_cur


def _check_digit(i) -> int:
    if isinstance(i, bool) or int(i) != i or i < 1:
        raise InvalidDigitError(f"continued-fraction digits must be positive integers, got {i!r}")
    return int(i)


def append_digit(w: DigitWord, i: int) -> DigitWord:
    """Extend ``w`` by one digit using ``q_{n+1} = i q_n + q_{n-1}``."""
    i = _check_digit(i)
    return DigitWord(
        w.digits + (i,),
        w.p_cur,
        i * w.p_cur + w.p_prev,
        w.q_cur,
        i * w.q_cur + w.q_prev,
    )


def _as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def gauss_step(x) -> tuple[Optional[int], Fraction]:
    """One application of the Gauss map to an exact rational.

    Returns ``(digit, G(x))``.  ``G(0) = 0`` has no digit, reported as
    ``(None, 0)``.
    """
    x = _as_fraction(x)
    if x < 0 or x > 1:
        raise DomainError(f"Gauss map is defined on [0, 1], got {x}")
    if x == 0:
        return None, Fraction(0)
    inv = 1 / x
    d = inv.numerator // inv.denominator
    return d, inv - d


def xi_eta(x) -> tuple[int, float]:
    """First digit ``xi = floor(1/x)`` and ``eta = log(1 + xi)``."""
    x = _as_fraction(x)
    if x <= 0 or x > 1:
        raise DomainError(f"xi/eta need x in (0, 1], got {x}")
    inv = 1 / x
    xi = inv.numerator // inv.denominator
    return xi, math.log1p(xi)


def expansion(x, max_digits: Optional[int] = None) -> list[int]:
    """Digits of a rational in (0, 1] obtained by iterating the Gauss map."""
    x = _as_fraction(x)
    out: list[int] = []
    while x != 0 and (max_digits is None or len(out) < max_digits):
        d, x = gauss_step(x)
        out.append(d)
    return out


def cylinder_interval(w: DigitWord) -> tuple[Fraction, Fraction]:
    """Closed interval ``g_w([0, 1])`` as ``(lo, hi)``."""
    if not w.digits:
        return Fraction(0), Fraction(1)
    a = Fraction(w.p_cur, w.q_cur)
    b = Fraction(w.p_prev + w.p_cur, w.q_prev + w.q_cur)
    return (a, b) if a <= b else (b, a)


def cylinder_length(w: DigitWord) -> Fraction:
    return Fraction(1, w.q_cur * (w.q_cur + w.q_prev))


def sup_derivative(w: DigitWord) -> Fraction:
    """``max |g_w'|`` on [0, 1]; attained at 0 and equal to ``1/q_n^2``."""
    return Fraction(1, w.q_cur * w.q_cur)


def inf_derivative(w: DigitWord) -> Fraction:
    """``min |g_w'|`` on [0, 1]; attained at 1."""
    s = w.q_cur + w.q_prev
    return Fraction(1, s * s)


def distortion_ratio(w: DigitWord) -> Fraction:
    """``max |g_w'| / min |g_w'| = ((q_{n-1} + q_n) / q_n)^2``, always in [1, 4]."""
    s = w.q_prev + w.q_cur
    return Fraction(s * s, w.q_cur * w.q_cur)


def _log_ratio(a: int, b: int) -> float:
    # sign-correct log(a/b) for positive integers, including a == b
    if a == b:
        return 0.0
    r = Fraction(a, b)
    if Fraction(1, 2) < r < 2:
        return math.log1p(float(r - 1))
    return math.log(a) - math.log(b)


def log_q_bounds_check(w: DigitWord) -> tuple[float, float]:
    """Slacks of ``sum(eta)/2 - log(sqrt 2) <= log q_n <= sum(eta)``.

    Returns ``(log q_n - lower, upper - log q_n)``.  The signs are exact:
    each slack is computed as the log of an exact rational, so a violation
    can never be produced (or hidden) by rounding.
    """
    prod = 1
    for d in w.digits:
        prod *= d + 1
    q = w.q_cur
    lower = 0.5 * _log_ratio(2 * q * q, prod)
    upper = _log_ratio(prod, q)
    return lower, upper


def log_q_bounds_exact(w: DigitWord) -> bool:
    """Integer form of the same check: ``prod <= 2 q^2`` and ``q <= prod``."""
    prod = 1
    for d in w.digits:
        prod *= d + 1
    return prod <= 2 * w.q_cur * w.q_cur and w.q_cur <= prod


def convergents(digits: Iterable[int]) -> Iterator[tuple[int, int]]:
    """Yield ``(p_n, q_n)`` for n = 1, 2, ..."""
    p_prev, p_cur, q_prev, q_cur = 1, 0, 0, 1
    for i in digits:
        i = _check_digit(i)
        p_prev, p_cur = p_cur, i * p_cur + p_prev
        q_prev, q_cur = q_cur, i * q_cur + q_prev
        yield p_cur, q_cur


def evaluate(digits: Sequence[int], tail=0, precision: Optional[int] = None):
    """Value of ``[0; d_0, ..., d_{n-1} + tail]``.

    With ``precision=None`` and a rational ``tail`` the result is an exact
    ``Fraction``; otherwise it is an ``mpfr`` at the requested bit precision.
    """
    w = DigitWord.from_digits(digits)
    if precision is None:
        t = _as_fraction(tail)
        return (w.p_cur + t * w.p_prev) / (w.q_cur + t * w.q_prev)
    with gmpy2.context(precision=precision):
        t = gmpy2.mpfr(tail)
        return (w.p_cur + t * w.p_prev) / (w.q_cur + t * w.q_prev)


@dataclass
class CFPoint:
    """A point of [0, 1]: either an exact rational or a lazy digit stream.

    Only the realised prefix is stored; ``prefix(n)`` pulls more digits
    from the stream on demand.
    """

    rational: Optional[Fraction] = None
    stream: Optional[Iterator[int]] = None
    precision: int = 128
    _digits: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if (self.rational is None) == (self.stream is None):
            raise ValueError("give exactly one of rational / stream")
        if self.rational is not None:
            self.rational = _as_fraction(self.rational)
            if not 0 <= self.rational <= 1:
                raise DomainError("CFPoint lives in [0, 1]")
            self.stream = iter(expansion(self.rational))

    @classmethod
    def from_digits(cls, digits: Iterable[int], precision: int = 128) -> "CFPoint":
        return cls(stream=(_check_digit(d) for d in digits), precision=precision)

    def prefix(self, n: int) -> DigitWord:
        if len(self._digits) < n:
            self._digits.extend(islice(self.stream, n - len(self._digits)))
        return DigitWord.from_digits(self._digits[:n])

    def to_mpfr(self, depth: int = 64):
        """Value to ``precision`` bits; rationals are exact, streams use ``depth`` digits."""
        with gmpy2.context(precision=self.precision):
            if self.rational is not None:
                return gmpy2.mpfr(self.rational.numerator) / self.rational.denominator
            w = self.prefix(depth)
            return gmpy2.mpfr(w.p_cur) / w.q_cur
