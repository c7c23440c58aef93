"""Digit alphabets ``I`` of positive integers.

An :class:`IndexSet` is the union of three kinds of pieces:

* ``explicit``: a sorted tuple of integers (possibly huge);
* ``blocks``: runs ``[start, start + length)`` of consecutive integers stored
  by their endpoints, for runs far too long to list;
* ``lazy``: an infinite rule-based part (all integers, powers of ``a``, the
  subset-sum set ``I_0`` and its affine images), contributing only its
  elements above ``lazy_min``.

Tail sums ``sum_{i in I, i > K} i^(-2t)`` are returned as ``(lo, hi)`` pairs
that are rigorous up to float rounding of individual terms (relative
``1e-12``); ``hi`` is ``inf`` when the series diverges.
"""

from __future__ import annotations

import bisect
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import special

ENUM_COUNT_CAP = 1 << 21
TERM_REL = 1e-12


class EnumerationBudgetError(RuntimeError):
    """Enumerating the requested range would exceed the element budget."""


class UnsupportedSetError(ValueError):
    """The set carries no oracle for the requested quantity."""


def _fsum_pow(elements, s: float) -> float:
    if len(elements) == 0:
        return 0.0
    a = np.asarray(elements, dtype=float)
    return math.fsum(np.power(a, -s))


def _powneg(x: int, s: float) -> float:
    # x^(-s) for possibly huge integers
    if x < 2 ** 1000:
        return float(x) ** (-s)
    return math.exp(-s * math.log(x))


def _exp_capped(v: float, over: float = sys.float_info.max) -> float:
    # exp that saturates instead of raising; ``over`` is returned past float range
    return math.exp(v) if v < 709.0 else over


def _log_shifted(n: int, c: float) -> float:
    # log(n + c) for a possibly huge integer n and a small float c
    if n < 2 ** 1000:
        return math.log(n + c)
    return math.log(n)


def _short(n: int) -> str:
    # huge integers print as a power of ten
    if n < 10 ** 15:
        return str(n)
    return f"~10^{math.log10(n):.6g}"


@dataclass(frozen=True, repr=False)
class Block:
    """Consecutive integers ``start, ..., start + length - 1``."""

    start: int
    length: int

    @property
    def stop(self) -> int:
        return self.start + self.length

    @property
    def last(self) -> int:
        return self.start + self.length - 1

    def __contains__(self, x: int) -> bool:
        return self.start <= x < self.stop

    def __repr__(self) -> str:
        return f"Block({_short(self.start)}, {_short(self.length)})"

    def power_sum_bounds(self, s: float, shift_lo: float = 0.0, shift_hi: float = 0.0) -> tuple[float, float]:
        """Bounds for ``sum_i (i + c)^(-s)`` over the block with ``c`` in ``[shift_lo, shift_hi]``.

        Uses ``length * endpoint`` bounds in log space, tight when
        ``length << start``; otherwise integral bounds.
        """
        if self.length == 0:
            return 0.0, 0.0
        if s == 0:
            return float(self.length), float(self.length)
        if self.start < 2 ** 50 and self.length <= 4096:
            i = np.arange(self.start, self.stop, dtype=float)
            return (math.fsum((i + shift_hi) ** (-s)) * (1 - TERM_REL),
                    math.fsum((i + shift_lo) ** (-s)) * (1 + TERM_REL))
        log_len = math.log(self.length)
        if self.length * 10 ** 6 < self.start or self.start > 2 ** 1000:
            a = log_len - s * _log_shifted(self.last + 1, shift_hi)
            b = log_len - s * _log_shifted(self.start, shift_lo)
            # log of a huge integer carries relative error ~1e-16 * |log|
            slack = 1e-14 * (1 + s * math.log(self.last + 2))
            return _exp_capped(a - slack), _exp_capped(b + slack, math.inf)
        a = float(self.start)
        b = float(self.last)
        if s == 1:
            lo = math.log((b + 1 + shift_hi) / (a + shift_hi))
            hi = (a + shift_lo) ** -1 + math.log((b + shift_lo) / (a + shift_lo))
        else:
            lo = ((a + shift_hi) ** (1 - s) - (b + 1 + shift_hi) ** (1 - s)) / (s - 1)
            hi = (a + shift_lo) ** (-s) + ((a + shift_lo) ** (1 - s) - (b + shift_lo) ** (1 - s)) / (s - 1)
        return lo * (1 - 1e-9), hi * (1 + 1e-9)

    def log_weighted_bounds(self, s: float) -> tuple[float, float]:
        """Bounds for ``sum_i log(1 + i) * i^(-s)`` over the block."""
        lo, hi = self.power_sum_bounds(s)
        return lo * _log_shifted(self.start, 1.0), hi * math.log(self.last + 1)


# -- lazy parts ---------------------------------------------------------------


class LazyPart:
    """Infinite rule-based set of positive integers."""

    tag = "lazy"

    def upto(self, x: int) -> np.ndarray:
        """Sorted elements ``<= x`` (int64)."""
        raise NotImplementedError

    def contains(self, x: int) -> bool:
        raise NotImplementedError

    def remainder(self, x: int, s: float) -> tuple[float, float]:
        """Bounds for ``sum_{i > x} i^(-s)`` over the part (any ``x``)."""
        raise NotImplementedError

    enum_limit: int = 1 << 40

    def shell(self, lo: int, hi: int):
        """Slots for the elements in ``(lo, hi]``: ``(n_slots, slot -> element | None)``.

        Every element of the range is hit by exactly one slot; extra slots
        map to None.  Used for rejection sampling of far tails.
        """
        e = self.upto(hi)
        e = e[e > lo]
        return len(e), lambda k: int(e[k])


class FullPart(LazyPart):
    tag = "full"

    def upto(self, x):
        if x > ENUM_COUNT_CAP * 64:
            raise EnumerationBudgetError(f"full alphabet up to {x}")
        return np.arange(1, int(x) + 1, dtype=np.int64)

    def contains(self, x):
        return x >= 1

    def remainder(self, x, s):
        if s <= 1:
            return 0.0, math.inf
        x = max(int(x), 0)
        exact = float(special.zeta(s, x + 1)) if x < 2 ** 52 else 0.0
        # integral comparison gives rigorous brackets around the Hurwitz value
        lo = (x + 1.0) ** (1 - s) / (s - 1)
        hi = (x + 1.0) ** (-s) + lo
        if exact and lo <= exact <= hi:
            return exact * (1 - TERM_REL), exact * (1 + TERM_REL)
        return lo * (1 - TERM_REL), hi * (1 + TERM_REL)

    def shell(self, lo, hi):
        return hi - lo, lambda k: lo + 1 + k


class GeometricPart(LazyPart):
    tag = "geometric"

    def __init__(self, a: int):
        if a < 2:
            raise ValueError("geometric alphabets need a >= 2")
        self.a = a

    def upto(self, x):
        out, p = [], self.a
        while p <= x:
            out.append(p)
            p *= self.a
        return np.array(out, dtype=object if out and out[-1] >= 2 ** 63 else np.int64)

    def contains(self, x):
        if x < self.a:
            return False
        while x % self.a == 0:
            x //= self.a
        return x == 1

    def first_exponent_above(self, x: int) -> int:
        k, p = 1, self.a
        while p <= x:
            p *= self.a
            k += 1
        return k

    def remainder(self, x, s):
        if s <= 0:
            return 0.0, math.inf
        k0 = self.first_exponent_above(x)
        r = self.a ** (-s)
        v = math.exp(-s * k0 * math.log(self.a)) / (1 - r)
        return v * (1 - TERM_REL), v * (1 + TERM_REL)

    def shell(self, lo, hi):
        e = [int(v) for v in self.upto(hi) if v > lo]
        return len(e), lambda k: e[k]


class I0Part(LazyPart):
    """All ``1 + sum_{n in S} floor(2^(n/delta))`` over finite ``S`` of ``n >= 1``."""

    tag = "i0"

    def __init__(self, delta: float):
        if not 0 < delta < 1:
            raise ValueError("I_0 needs 0 < delta < 1")
        self.delta = delta
        self._terms: list[int] = []
        self._cache = np.array([1], dtype=np.int64)
        self._cache_upto = 1
        self.enum_limit = None

    def term(self, n: int) -> int:
        while len(self._terms) < n:
            m = len(self._terms) + 1
            self._terms.append(int(math.floor(2 ** (m / self.delta))))
        return self._terms[n - 1]

    def terms_upto(self, x: int) -> list[int]:
        out, n = [], 1
        while self.term(n) <= x:
            out.append(self.term(n))
            n += 1
        return out

    def superincreasing(self, upto_terms: int = 64) -> bool:
        acc = 0
        for n in range(1, upto_terms + 1):
            if self.term(n) <= acc:
                return False
            acc += self.term(n)
        return True

    def upto(self, x):
        x = int(x)
        if x <= self._cache_upto:
            return self._cache[self._cache <= x]
        sums = np.array([0], dtype=np.int64)
        for b in self.terms_upto(x - 1):
            shifted = sums + b
            shifted = shifted[shifted <= x - 1]
            sums = np.union1d(sums, shifted)
            if len(sums) > ENUM_COUNT_CAP:
                raise EnumerationBudgetError(f"I_0 enumeration beyond {ENUM_COUNT_CAP} elements")
        out = sums + 1
        self._cache, self._cache_upto = out, x
        return out

    def enumeration_limit(self) -> int:
        """Largest power of two whose enumeration stays within the element budget."""
        if self.enum_limit is None:
            x = 2
            while 2 ** (len(self.terms_upto(4 * x)) + 1) <= ENUM_COUNT_CAP and x < 2 ** 16:
                x *= 2
            self.enum_limit = x
        return self.enum_limit

    def contains(self, x):
        if x < 1:
            return False
        if x <= self._cache_upto:
            k = np.searchsorted(self._cache, x)
            return k < len(self._cache) and self._cache[k] == x
        if self.superincreasing():
            r = x - 1
            for b in reversed(self.terms_upto(r)):
                if b <= r:
                    r -= b
            return r == 0
        return x in set(self.upto(x).tolist())

    def remainder(self, x, s):
        return self.shifted_remainder(x, s, 0.0)

    def shifted_remainder(self, x, s, c: float):
        """Bounds for ``sum_{i in I_0, i > x} (i + c)^(-s)`` (``c > -1``) without enumeration.

        Subset sums are split by their largest term; a subtree whose spread
        ``R`` is small next to its base ``a`` is summed from the exact first
        two moments of its subset sums with a third-order Taylor remainder.
        Subsets whose largest index exceeds ``n_top`` are bounded in closed
        form using ``1 + b_n >= 2^(n/delta)``.
        """
        if s <= self.delta:
            return 0.0, math.inf
        key = (int(x), float(s), float(c))
        cache = self.__dict__.setdefault("_rem_cache", {})
        if key in cache:
            return cache[key]
        rho = 2.0 ** (1 - s / self.delta)
        n_top = int(math.ceil(-46 / math.log2(rho))) if rho > 0 else 1
        n_top = max(1, min(n_top, int(900 * self.delta)))
        b = [float(self.term(n)) for n in range(1, n_top + 1)]
        pref = [0.0]
        sq = [0.0]
        for v in b:
            pref.append(pref[-1] + v)
            sq.append(sq[-1] + v * v)
        X = float(x) + c
        eps = 1e-3
        c3 = s * (s + 1) * (s + 2) / 6

        def walk(n, base):
            R = pref[n]
            if base + R <= X:
                return 0.0, 0.0
            if n == 0:
                v = base ** (-s)
                return v, v
            if base > X and R <= eps * base:
                cnt = 2.0 ** n
                m1 = 2.0 ** (n - 1) * R
                m2 = 2.0 ** (n - 2) * (R * R + sq[n])
                scale = base ** (-s)
                hi = scale * (cnt - s * m1 / base + s * (s + 1) / 2 * m2 / (base * base))
                lo = hi - scale * c3 * cnt * (R / base) ** 3
                return lo, hi
            l1, h1 = walk(n - 1, base)
            l2, h2 = walk(n - 1, base + b[n - 1])
            return l1 + l2, h1 + h2

        lo, hi = walk(n_top, 1.0 + c)
        # 1 + b_n + c >= 2^(n/delta) (1 + c) for -1 < c <= 0
        hi += 0.5 * rho ** (n_top + 1) / (1 - rho) * (1 + min(c, 0.0)) ** (-s)
        if not self.superincreasing(n_top):
            lo = 0.0
        out = (lo * (1 - 1e-12), hi * (1 + 1e-12))
        cache[key] = out
        return out

    def shell(self, lo, hi):
        if hi <= self.enumeration_limit():
            return super().shell(lo, hi)
        if not self.superincreasing():
            raise UnsupportedSetError("I_0 shell sampling needs distinct subset sums")
        terms = self.terms_upto(hi - 1)

        def pick(mask):
            v = 1 + sum(b for k, b in enumerate(terms) if (mask >> k) & 1)
            return v if lo < v <= hi else None

        return 1 << len(terms), pick


class AffinePart(LazyPart):
    """``{mul * j + add : j in base}`` for ``mul >= 1`` and ``add in {0, -1, ...}``."""

    tag = "affine"

    def __init__(self, base: LazyPart, mul: int, add: int):
        if mul < 1 or add > 0 or add <= -mul:
            raise ValueError("AffinePart needs mul >= 1 and -mul < add <= 0")
        self.base, self.mul, self.add = base, mul, add

    def _j_above(self, x: int) -> int:
        # largest j with mul*j + add <= x
        return (x - self.add) // self.mul

    def upto(self, x):
        j = self.base.upto(self._j_above(int(x)))
        return j * self.mul + self.add

    def contains(self, x):
        return (x - self.add) % self.mul == 0 and self.base.contains((x - self.add) // self.mul)

    def enumeration_limit(self) -> int:
        lim = getattr(self.base, "enumeration_limit", None)
        return self.mul * lim() + self.add if callable(lim) else 0

    def remainder(self, x, s):
        j = self._j_above(int(x))
        if hasattr(self.base, "shifted_remainder"):
            lo, hi = self.base.shifted_remainder(j, s, self.add / self.mul)
            f = self.mul ** (-s)
            return lo * f, hi * f
        lo, hi = self.base.remainder(j, s)
        if math.isinf(hi):
            return 0.0, math.inf
        # (mul j + add)^(-s) lies between (mul j)^(-s) and (mul j)^(-s) * (1 + add/(mul (j+1)))^(-s)
        f = self.mul ** (-s)
        stretch = (1 + self.add / (self.mul * (j + 1))) ** (-s)
        return lo * f, hi * f * stretch

    def shell(self, lo, hi):
        n, pick = self.base.shell(self._j_above(lo), self._j_above(hi))

        def mapped(k):
            j = pick(k)
            if j is None:
                return None
            v = j * self.mul + self.add
            return v if lo < v <= hi else None

        return n, mapped


# -- the set -------------------------------------------------------------------


class IndexSet:
    """A digit alphabet; see the module docstring for the representation."""

    def __init__(
        self,
        family: str,
        params: Optional[dict] = None,
        explicit: Iterable[int] = (),
        blocks: Sequence[Block] = (),
        lazy: Optional[LazyPart] = None,
        lazy_min: int = 0,
        theta: Optional[Fraction | float] = None,
        diverges_at_theta: Optional[bool] = None,
    ):
        ex = sorted(set(int(v) for v in explicit))
        if ex and ex[0] < 1:
            raise ValueError("alphabet elements must be >= 1")
        self.family = family
        self.params = dict(params or {})
        self.explicit = tuple(ex)
        self.blocks = tuple(sorted(blocks, key=lambda b: b.start))
        self.lazy = lazy
        self.lazy_min = int(lazy_min)
        self._theta = theta
        self._diverges = diverges_at_theta
        self._explicit_np = None

    # -- basic structure -----------------------------------------------------
    @property
    def is_finite(self) -> bool:
        return self.lazy is None

    @property
    def tag(self) -> str:
        if not self.params:
            return self.family
        inner = ",".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.family}({inner})"

    def __repr__(self) -> str:
        return f"IndexSet({self.tag})"

    def __contains__(self, x) -> bool:
        x = int(x)
        k = bisect.bisect_left(self.explicit, x)
        if k < len(self.explicit) and self.explicit[k] == x:
            return True
        if any(x in b for b in self.blocks):
            return True
        return self.lazy is not None and x > self.lazy_min and self.lazy.contains(x)

    def cardinality(self) -> Optional[int]:
        if not self.is_finite:
            return None
        return len(self.explicit) + sum(b.length for b in self.blocks)

    def max_element(self) -> int:
        if not self.is_finite:
            raise ValueError("infinite alphabet has no maximum")
        cands = [self.explicit[-1]] if self.explicit else []
        cands += [b.last for b in self.blocks if b.length]
        return max(cands) if cands else 0

    def min_element(self) -> int:
        c = list(self.explicit[:1]) + [b.start for b in self.blocks if b.length]
        if self.lazy is not None:
            e = self.lazy.upto(max(2 * self.lazy_min + 64, 64))
            e = e[e > self.lazy_min]
            if len(e):
                c.append(int(e[0]))
        return min(c)

    def elements_upto(self, x: int, max_count: int = ENUM_COUNT_CAP) -> np.ndarray:
        """Sorted elements ``<= x`` as an array (object dtype for huge values)."""
        x = int(x)
        parts = [v for v in self.explicit if v <= x]
        for b in self.blocks:
            if b.start <= x:
                n = min(b.length, x - b.start + 1)
                if n + len(parts) > max_count:
                    raise EnumerationBudgetError(f"block {b} too long to list")
                parts.extend(range(b.start, b.start + n))
        if self.lazy is not None and x > self.lazy_min:
            lz = self.lazy.upto(x)
            lz = lz[lz > self.lazy_min]
            if len(lz) + len(parts) > max_count:
                raise EnumerationBudgetError(f"{self.tag}: more than {max_count} elements up to {x}")
            parts.extend(int(v) for v in lz)
        out = sorted(set(parts))
        big = out and out[-1] >= 2 ** 62
        return np.array(out, dtype=object if big else np.int64)

    def elements_between(self, lo: int, hi: int) -> np.ndarray:
        e = self.elements_upto(hi)
        return e[e > lo]

    def first(self, n: int) -> list[int]:
        """The ``n`` smallest elements (fewer if the set is finite and small)."""
        if self.is_finite and self.blocks == () and len(self.explicit) <= n:
            return list(self.explicit)
        x = 16
        while True:
            e = self.elements_upto(x)
            if len(e) >= n:
                return [int(v) for v in e[:n]]
            if self.is_finite and x >= self.max_element():
                return [int(v) for v in e]
            x *= 4

    def count_upto(self, x: int) -> int:
        return len(self.elements_upto(x))

    # -- sums ------------------------------------------------------------------
    def tail_bounds(self, k: int, t: float) -> tuple[float, float]:
        """Bounds for ``sum_{i in I, i > k} i^(-2t)``."""
        s = 2.0 * t
        k = int(k)
        lo = hi = 0.0
        ex = [v for v in self.explicit if v > k]
        if ex:
            small = [v for v in ex if v < 2 ** 1000]
            big = [v for v in ex if v >= 2 ** 1000]
            v = _fsum_pow(small, s) + math.fsum(_powneg(b, s) for b in big)
            lo += v * (1 - TERM_REL)
            hi += v * (1 + TERM_REL)
        for b in self.blocks:
            if b.last > k:
                sub = b if b.start > k else Block(k + 1, b.last - k)
                bl, bh = sub.power_sum_bounds(s)
                lo += bl
                hi += bh
        if self.lazy is not None:
            start = max(k, self.lazy_min)
            limit = getattr(self.lazy, "enumeration_limit", None)
            cut = limit() if callable(limit) else None
            if cut is not None and start < cut:
                e = self.lazy.upto(cut)
                e = e[e > start]
                v = _fsum_pow(e, s)
                rl, rh = self.lazy.remainder(cut, s)
                lo += v * (1 - TERM_REL) + rl
                hi += v * (1 + TERM_REL) + rh
            else:
                rl, rh = self.lazy.remainder(start, s)
                lo += rl
                hi += rh
        return lo, hi

    def tail_sum(self, k: int, t: float) -> float:
        """Point estimate of the tail sum (exact for closed-form families)."""
        lo, hi = self.tail_bounds(k, t)
        if math.isinf(hi):
            return math.inf
        return 0.5 * (lo + hi) if lo > 0 else hi

    def power_sum(self, t: float) -> tuple[float, float]:
        """Bounds for ``sum_{i in I} i^(-2t)``."""
        return self.tail_bounds(0, t)

    # -- derived sets -----------------------------------------------------------
    def truncate(self, n: int) -> "IndexSet":
        """Finite set ``I cap [1, n]`` (blocks are clipped, not expanded)."""
        ex = [v for v in self.explicit if v <= n]
        bl = [Block(b.start, min(b.length, n - b.start + 1)) for b in self.blocks if b.start <= n]
        if self.lazy is not None and n > self.lazy_min:
            lz = self.lazy.upto(n)
            ex += [int(v) for v in lz if v > self.lazy_min]
        return IndexSet(self.family if self.is_finite else "finite",
                        {**self.params, "truncated_at": int(n)}, ex, bl)

    def take(self, count: int) -> "IndexSet":
        """Finite set of the ``count`` smallest elements."""
        e = self.first(count)
        return IndexSet("finite", {"source": self.tag, "count": count}, e)

    def union(self, other: Iterable[int] | "IndexSet") -> "IndexSet":
        if isinstance(other, IndexSet):
            if not other.is_finite or other.blocks:
                raise ValueError("can only add explicit finite sets")
            other = other.explicit
        return IndexSet(self.family, self.params, self.explicit + tuple(int(v) for v in other),
                        self.blocks, self.lazy, self.lazy_min, self._theta, self._diverges)

    def with_tag(self, family: str, **params) -> "IndexSet":
        return IndexSet(family, params, self.explicit, self.blocks, self.lazy, self.lazy_min,
                        self._theta, self._diverges)


# -- families -----------------------------------------------------------------


def finite(elements: Iterable[int], family: str = "finite", **params) -> IndexSet:
    return IndexSet(family, params, elements, theta=Fraction(0), diverges_at_theta=True)


def full() -> IndexSet:
    """The whole alphabet ``N = {1, 2, ...}``."""
    return IndexSet("full", {}, lazy=FullPart(), theta=Fraction(1, 2), diverges_at_theta=True)


def make_geometric(a: int) -> IndexSet:
    """``{a, a^2, a^3, ...}``."""
    return IndexSet("geometric", {"a": int(a)}, lazy=GeometricPart(int(a)),
                    theta=Fraction(0), diverges_at_theta=True)


def make_i0(delta: float) -> IndexSet:
    """Subset sums ``1 + sum_{n in S} floor(2^(n/delta))``, ``S`` finite, ``n >= 1``."""
    if not 0 < delta < 1:
        raise ValueError("make_i0 needs 0 < delta < 1")
    return IndexSet("i0", {"delta": delta}, lazy=I0Part(delta), theta=delta / 2, diverges_at_theta=True)


def parse_set(spec: str) -> IndexSet:
    """Parse a set description.

    Accepts ``full``, ``"1,2,5"``, ``"1-10"`` ranges within a list,
    ``geometric:A``, ``i0:DELTA`` and ``file:PATH`` (one integer per line,
    ``#`` comments).
    """
    spec = spec.strip()
    if spec in ("full", "N"):
        return full()
    if spec.startswith("geometric:"):
        return make_geometric(int(spec.split(":", 1)[1]))
    if spec.startswith("i0:"):
        return make_i0(float(spec.split(":", 1)[1]))
    if spec.startswith("file:"):
        return read_alphabet_file(spec.split(":", 1)[1])
    out = []
    for tok in spec.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if "-" in tok:
            a, b = tok.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(tok))
    if not out or min(out) < 1:
        raise ValueError(f"cannot parse alphabet {spec!r}")
    return finite(out)


def read_alphabet_file(path: str) -> IndexSet:
    vals = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                vals.append(int(line))
    if vals != sorted(vals) or len(set(vals)) != len(vals) or (vals and vals[0] < 1):
        raise ValueError(f"{path}: alphabet files list distinct positive integers in ascending order")
    return finite(vals, source=path)


def write_alphabet_file(path: str, I: IndexSet, header: str = "") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in header.splitlines():
            fh.write(f"# {line}\n")
        for v in I.elements_upto(I.max_element()):
            fh.write(f"{int(v)}\n")
