"""Combinatorial Ahlfors-regularity checkers for digit alphabets.

Each checker samples a finite grid and reports measured constants.  A
bounded ratio on a grid is evidence, not proof; the verdicts are
``pass`` (constants within the configured tolerance), ``fail`` (with the
grid point that breaks it) and ``inconclusive`` (the enumeration could not
cover the request).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional

import numpy as np

from .base import EnumerationBudgetError, IndexSet

DEFAULT_HORIZON = 1 << 17
DEFAULT_ELEMENTS = 1 << 16
MAX_HORIZON = 1 << 60
DEFAULT_TOLERANCE = 64.0
VERDICTS = ("pass", "fail", "inconclusive")


@dataclass
class CheckResult:
    name: str
    verdict: str
    lo: float
    hi: float
    tolerance: float
    witness: Optional[dict] = None
    detail: dict = field(default_factory=dict)

    @property
    def spread(self) -> float:
        if self.lo <= 0:
            return math.inf
        return self.hi / self.lo

    def as_dict(self) -> dict:
        d = asdict(self)
        d["spread"] = self.spread
        return d


@dataclass
class RegularityReport:
    h: float
    checks: dict

    def verdict(self, name: str) -> str:
        return self.checks[name].verdict

    def as_dict(self) -> dict:
        return {"h": self.h, "checks": {k: v.as_dict() for k, v in self.checks.items()}}


def _horizon(I: IndexSet, horizon: Optional[int]) -> int:
    if horizon is not None:
        return int(horizon)
    if I.is_finite:
        return 4 * I.max_element()
    # sparse sets: widen until the window holds DEFAULT_ELEMENTS elements
    H = DEFAULT_HORIZON
    while H < MAX_HORIZON:
        try:
            if I.count_upto(H) >= DEFAULT_ELEMENTS:
                break
        except EnumerationBudgetError:
            H //= 4
            break
        H *= 4
    return min(H, MAX_HORIZON)


def _elements(I: IndexSet, horizon: int) -> np.ndarray:
    e = I.elements_upto(horizon)
    if e.dtype == object:
        raise EnumerationBudgetError("elements too large for the counting checkers")
    return e


def _log_sample(e: np.ndarray, count: int) -> np.ndarray:
    """Up to ``count`` entries of ``e``, log-spaced by index, small ones always kept."""
    if len(e) <= count:
        return e
    idx = np.unique(np.geomspace(1, len(e), count).astype(np.int64) - 1)
    return e[idx]


def _dyadic(hi: int, start: int = 1) -> list[int]:
    out, r = [], start
    while r <= hi:
        out.append(r)
        r *= 2
    return out


def check_c1(I: IndexSet, h: float, centers: Optional[Iterable[int]] = None,
             radii: Optional[Iterable[int]] = None, horizon: Optional[int] = None,
             tolerance: float = DEFAULT_TOLERANCE, max_centers: int = 300) -> CheckResult:
    """Ratio ``#(B(y, r) cap I) / r^h`` over centres ``y in I`` and radii ``r >= 1``.

    Defaults: log-spaced centres among all enumerated elements and every
    dyadic radius whose ball stays inside the enumerated range.
    """
    H = _horizon(I, horizon)
    e = _elements(I, H)
    if len(e) == 0:
        return CheckResult("c1", "inconclusive", 0.0, 0.0, tolerance, detail={"reason": "no elements"})
    ys = np.asarray(sorted(int(y) for y in centers), dtype=np.int64) if centers is not None \
        else _log_sample(e, max_centers)
    lo = (math.inf, None)
    hi = (-math.inf, None)
    uncovered = 0
    for y in ys:
        if y not in I:
            raise ValueError(f"centre {y} is not in the alphabet")
        rs = list(radii) if radii is not None else _dyadic(H - int(y))
        for r in rs:
            if r < 1:
                raise ValueError("radii must be >= 1")
            if y + r > H and not I.is_finite:
                uncovered += 1
                continue
            c = int(np.searchsorted(e, y + r, side="right") - np.searchsorted(e, y - r, side="left"))
            v = c / r ** h
            if v < lo[0]:
                lo = (v, (int(y), r, c))
            if v > hi[0]:
                hi = (v, (int(y), r, c))
    detail = {"horizon": H, "centers": len(ys), "uncovered": uncovered}
    if lo[1] is None or (uncovered and radii is not None):
        return CheckResult("c1", "inconclusive", max(lo[0], 0.0) if lo[1] else 0.0,
                           hi[0] if hi[1] else 0.0, tolerance, detail=detail)
    spread = hi[0] / lo[0]
    verdict = "pass" if spread <= tolerance else "fail"
    witness = None
    if verdict == "fail":
        witness = {"min": dict(zip(("y", "r", "count"), lo[1])),
                   "max": dict(zip(("y", "r", "count"), hi[1]))}
    detail["argmin"] = lo[1]
    detail["argmax"] = hi[1]
    return CheckResult("c1", verdict, lo[0], hi[0], tolerance, witness, detail)


def _next_at_least(I: IndexSet, k: int) -> Optional[int]:
    """Least element ``>= k``, or None for a finite set that ends earlier."""
    cands = [v for v in I.explicit if v >= k][:1]
    for b in I.blocks:
        if b.last >= k:
            cands.append(max(b.start, k))
    if I.lazy is not None:
        x = max(2 * k, 64)
        while True:
            e = I.lazy.upto(x)
            e = e[(e >= k) & (e > I.lazy_min)]
            if len(e):
                cands.append(int(e[0]))
                break
            x *= 4
    return min(cands) if cands else None


def _runs(I: IndexSet, hi: int) -> list[tuple[int, int]]:
    """Maximal runs ``(first, last)`` of consecutive elements meeting ``[1, hi]``."""
    pts = [v for v in I.explicit if v <= hi]
    if I.lazy is not None and hi > I.lazy_min:
        lz = I.lazy.upto(hi)
        pts += [int(v) for v in lz if v > I.lazy_min]
    segs = [(v, v) for v in pts] + [(b.start, b.last) for b in I.blocks if b.length and b.start <= hi]
    segs.sort()
    out: list[list[int]] = []
    for a, b in segs:
        if out and a <= out[-1][1] + 1:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


def check_c2_gap(I: IndexSet, k_max: int, cap: float = DEFAULT_TOLERANCE) -> CheckResult:
    """Least ``m`` with ``[k, m k] cap I`` nonempty for every ``k <= k_max``."""
    k_max = int(k_max)
    runs = _runs(I, k_max)
    worst, at = 0, None

    def gap(k: int, nxt: Optional[int]):
        nonlocal worst, at
        if nxt is None:
            worst, at = math.inf, k
            return
        m = -(-nxt // k)
        if m > worst:
            worst, at = m, k

    if not runs:
        gap(1, _next_at_least(I, 1))
    else:
        gap(1, runs[0][0])
        for (_, b), (c, _) in zip(runs, runs[1:]):
            if b < k_max:
                gap(b + 1, c)
        last = runs[-1][1]
        if last < k_max:
            gap(last + 1, _next_at_least(I, last + 1))
    m = worst
    verdict = "pass" if m <= cap else "fail"
    witness = {"k": at, "m": m} if verdict == "fail" else None
    return CheckResult("c2", verdict, 1.0, float(m), cap, witness, {"k_max": k_max, "argmax": at})


def check_c3_tail(I: IndexSet, h: float, ks: Optional[Iterable[int]] = None,
                  horizon: Optional[int] = None, tolerance: float = DEFAULT_TOLERANCE) -> CheckResult:
    """Range of ``k^h sum_{i in I, i > k} i^(-2h)`` over ``k = 2^j`` and ``2^j + 1``."""
    H = horizon or (1 << 24)
    if ks is None:
        ks = sorted(set(_dyadic(H) + [k + 1 for k in _dyadic(H)]))
    lo = (math.inf, None)
    hi = (-math.inf, None)
    for k in ks:
        tl, th = I.tail_bounds(int(k), h)
        if math.isinf(th):
            return CheckResult("c3", "fail", 0.0, math.inf, tolerance,
                               {"k": int(k), "divergent": True}, {"divergent": True})
        a, b = k ** h * tl, k ** h * th
        if a < lo[0]:
            lo = (a, int(k))
        if b > hi[0]:
            hi = (b, int(k))
    detail = {"argmin": lo[1], "argmax": hi[1], "divergent": False}
    if lo[0] <= 0:
        return CheckResult("c3", "fail", 0.0, hi[0], tolerance, {"k": lo[1], "tail": 0.0}, detail)
    verdict = "pass" if hi[0] / lo[0] <= tolerance else "fail"
    witness = {"k_min": lo[1], "k_max": hi[1]} if verdict == "fail" else None
    return CheckResult("c3", verdict, lo[0], hi[0], tolerance, witness, detail)


def _pair_grid(e: np.ndarray, H: int, max_left: int) -> list[tuple[int, int]]:
    lefts = set(_dyadic(H)) | {int(v) for v in _log_sample(e, max_left)}
    pairs = []
    for k1 in sorted(lefts):
        for d in _dyadic(H - k1):
            pairs.append((k1, k1 + d))
    return pairs


def _window_sums(e: np.ndarray, h: float, pairs):
    """``sum_{k1 <= i <= k2, i in I} i^(-2h)`` from enumerated prefix sums."""
    w = np.concatenate([[0.0], np.cumsum(e.astype(float) ** (-2 * h))])
    k1 = np.array([p[0] for p in pairs], dtype=np.int64)
    k2 = np.array([p[1] for p in pairs], dtype=np.int64)
    a = np.searchsorted(e, k1, side="left")
    b = np.searchsorted(e, k2, side="right")
    # the gap is taken in integers: k2 - k1 is below float resolution near 2^60
    return k1.astype(float), k2.astype(float), (k2 - k1).astype(float), w[b] - w[a]


def check_lower_b(I: IndexSet, h: float, horizon: Optional[int] = None,
                  cap: float = DEFAULT_TOLERANCE, max_left: int = 200) -> CheckResult:
    """Supremum of ``(k1 k2)^h / (k2 - k1)^h * sum_{k1 <= i <= k2} i^(-2h)`` on a dyadic pair grid."""
    H = _horizon(I, horizon)
    e = _elements(I, H)
    pairs = _pair_grid(e, H, max_left)
    k1, k2, d, s = _window_sums(e, h, pairs)
    v = (k1 * k2) ** h / d ** h * s
    j = int(np.argmax(v))
    sup = float(v[j])
    verdict = "pass" if sup <= cap else "fail"
    witness = {"k1": pairs[j][0], "k2": pairs[j][1]} if verdict == "fail" else None
    return CheckResult("lower_b", verdict, 0.0, sup, cap, witness,
                       {"pairs": len(pairs), "argmax": pairs[j], "horizon": H})


def check_upper_b(I: IndexSet, h: float, horizon: Optional[int] = None,
                  floor: float = 1 / DEFAULT_TOLERANCE, max_left: int = 200,
                  tail_horizon: Optional[int] = None) -> CheckResult:
    """The two infima of the upper-regularity criterion.

    The pair infimum only ranges over pairs whose harmonic-mean point
    ``2 k1 k2 / (k1 + k2)`` lies within distance 1 of the alphabet.
    """
    H = _horizon(I, horizon)
    e = _elements(I, H)
    pairs = _pair_grid(e, H, max_left)
    k1, k2, d, s = _window_sums(e, h, pairs)
    c = 2 * k1 * k2 / (k1 + k2)
    j = np.searchsorted(e, c - 1, side="left")
    near = (j < len(e)) & (e[np.minimum(j, len(e) - 1)] <= c + 1)
    v = np.where(near, (k1 * k2) ** h / d ** h * s, np.inf)
    if not np.any(near):
        pair_inf, arg = math.inf, None
    else:
        idx = int(np.argmin(v))
        pair_inf, arg = float(v[idx]), pairs[idx]
    # tail infimum: k^h sum_{i >= k} i^(-2h) = k^h * tail_bounds(k - 1)
    TH = tail_horizon or max(H, 1 << 24)
    ks = sorted(set(_dyadic(TH) + [k + 1 for k in _dyadic(TH)]))
    tail_inf, targ = math.inf, None
    for k in ks:
        tl, _ = I.tail_bounds(k - 1, h)
        val = k ** h * tl
        if val < tail_inf:
            tail_inf, targ = val, k
    low = min(pair_inf, tail_inf)
    verdict = "pass" if low >= floor else "fail"
    witness = None
    if verdict == "fail":
        witness = {"pair": arg, "k": targ} if pair_inf <= tail_inf else {"k": targ}
    return CheckResult("upper_b", verdict, low, max(pair_inf, tail_inf), floor, witness,
                       {"pair_inf": pair_inf, "pair_argmin": arg, "tail_inf": tail_inf,
                        "tail_argmin": targ, "pairs_kept": int(np.sum(near))})


CRITERIA = ("c1", "c2", "c3", "lower_b", "upper_b")


def regularity_report(I: IndexSet, h: float, horizon: Optional[int] = None,
                      tolerance: float = DEFAULT_TOLERANCE,
                      criteria: Optional[Iterable[str]] = None) -> RegularityReport:
    H = _horizon(I, horizon)
    run = {
        "c1": lambda: check_c1(I, h, horizon=H, tolerance=tolerance),
        "c2": lambda: check_c2_gap(I, H, cap=tolerance),
        "c3": lambda: check_c3_tail(I, h, tolerance=tolerance),
        "lower_b": lambda: check_lower_b(I, h, horizon=H, cap=tolerance),
        "upper_b": lambda: check_upper_b(I, h, horizon=H, floor=1 / tolerance),
    }
    names = list(CRITERIA if criteria is None else criteria)
    bad = [c for c in names if c not in run]
    if bad:
        raise ValueError(f"unknown criteria {bad}; choose from {list(CRITERIA)}")
    return RegularityReport(h, {c: run[c]() for c in names})
