"""Certified enclosures of ``lambda_t(I) = exp(P_I(t))`` and of Bowen roots.

Two independent routes produce brackets for ``lambda_t(I)``:

* level sums ``S_n = sum_{w in I^n} q_n(w)^(-2t)``: ``S_n^(1/n)`` decreases to
  ``lambda`` (submultiplicativity), while ``(4^(-t) S_n)^(1/n)`` and
  ``T_n^(1/n)`` with ``T_n = sum (q_n + q_{n-1})^(-2t)`` stay below it;
* Collatz-Wielandt bounds for the transfer operator: for any positive
  ``f``, ``inf Lf/f <= lambda <= sup Lf/f``.  We take ``f`` piecewise linear
  through the collocated eigenfunction and bound ``Lf/f`` cell by cell with
  interval ranges of the weights and of ``f``.

``lambda_bracket`` intersects both.  Float evaluations carry a relative
envelope of ``FLOAT_ENVELOPE`` (each term is a handful of correctly-rounded
operations; the envelope is many orders of magnitude above the accumulated
rounding).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import gmpy2
import numpy as np
from numpy.polynomial import chebyshev as C
from scipy import special

from .bracket import Bracket, down, to_down, to_up, up
from .contfrac import DomainError
from .indexsets.base import EnumerationBudgetError, IndexSet, UnsupportedSetError
from .transfer import ConvergenceError, Snapshot, transfer_lambda

FLOAT_ENVELOPE = 1e-9
WORD_BUDGET = 1 << 22
DEFAULT_CELLS = 1024
MAX_CELLS = 1 << 17
HURWITZ_REL = 1e-12


# -- level sums ---------------------------------------------------------------


@dataclass
class LevelSumTable:
    """Per-level sums for the truncated alphabet ``I cap [1, N]``.

    ``upper[n]`` / ``lower[n]`` bracket ``S_n`` of the full alphabet: the
    lower end is the truncated sum, the upper end adds the contribution of
    words using at least one digit above ``N`` (``tail`` is the level-1 mass
    of those digits).  ``min_sums[n]`` holds ``T_n`` for the truncation.
    """

    t: float
    digits: tuple
    truncation: Optional[int]
    tail: float
    sums: list = field(default_factory=list)
    min_sums: list = field(default_factory=list)
    upper: list = field(default_factory=list)
    exact: bool = False

    @property
    def n_max(self) -> int:
        return len(self.sums)

    def level(self, n: int) -> Bracket:
        return Bracket(self.sums[n - 1].lo, self.upper[n - 1])


def _word_count_ok(n_digits: int, n: int, budget: int) -> bool:
    return n_digits ** n <= budget


def _level_terms(q, s: float):
    if q.dtype == object:
        return np.array([_powneg_int(int(v), s) for v in q])
    return np.asarray(q, dtype=float) ** (-s)


def _powneg_int(v: int, s: float) -> float:
    if v < 2 ** 1000:
        return float(v) ** (-s)
    return math.exp(-s * math.log(v))


def _expand(qp, qc, digits):
    # children of every word, digit-major; keeps exact integers when int64 could overflow
    big = digits[-1] * (int(qc.max()) if len(qc) else 1) + (int(qp.max()) if len(qp) else 0)
    if qc.dtype != object and big >= 2 ** 62:
        qp, qc = qp.astype(object), qc.astype(object)
    d = np.asarray(digits, dtype=qc.dtype)
    new_c = (d[:, None] * qc[None, :] + qp[None, :]).ravel()
    new_p = np.broadcast_to(qc, (len(d), len(qc))).ravel()
    return new_p, new_c


def _exact_sum(q, s) -> tuple:
    # directed-rounding reference path: sum of q^-s with lower and upper accumulators
    s = gmpy2.mpfr(s)
    lo = hi = gmpy2.mpfr(0)
    for v in q:
        p_up = up(lambda: to_up(int(v)) ** s)
        p_dn = down(lambda: to_down(int(v)) ** s)
        lo = down(lambda: lo + 1 / p_up)
        hi = up(lambda: hi + 1 / p_dn)
    return lo, hi


def _sum_bracket(terms, q, s, exact) -> Bracket:
    if exact:
        lo, hi = _exact_sum(q, s)
        return Bracket(lo, hi)
    v = math.fsum(terms)
    return Bracket.around(v, FLOAT_ENVELOPE)


def level_sums(I: IndexSet, t: float, n_max: int, N: Optional[int] = None, exact: bool = False,
               budget: int = WORD_BUDGET, workers: Optional[int] = None) -> LevelSumTable:
    """Level sums ``S_1..S_{n_max}`` for ``I cap [1, N]`` with tail corrections.

    Raises :class:`EnumerationBudgetError` when ``|I cap [1, N]|^n_max``
    exceeds ``budget``.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    s = 2.0 * t
    if I.is_finite and (N is None or N >= I.max_element()):
        digits = tuple(int(v) for v in I.elements_upto(I.max_element()))
        tail_hi = 0.0
        N = None
    else:
        if N is None:
            raise ValueError("infinite alphabets need a truncation N")
        digits = tuple(int(v) for v in I.elements_upto(N))
        tail_hi = I.tail_bounds(N, t)[1]
    if not digits:
        raise ValueError("empty alphabet")
    if not _word_count_ok(len(digits), n_max, budget):
        raise EnumerationBudgetError(
            f"{len(digits)}^{n_max} words exceed the enumeration budget {budget}")
    workers = workers or int(os.environ.get("CFLIMIT_WORKERS", "1"))
    table = LevelSumTable(t, digits, N, tail_hi, exact=exact)

    def run(first):
        qp = np.array([1], dtype=np.int64)
        qc = np.array([first], dtype=np.int64)
        out = []
        for n in range(1, n_max + 1):
            if n > 1:
                qp, qc = _expand(qp, qc, digits)
            terms = _level_terms(qc, s)
            mins = _level_terms(qc + qp, s)
            out.append((terms, mins, qc, qc + qp))
        return out

    if workers > 1 and len(digits) > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(run, digits))
    else:
        parts = [run(d) for d in digits]
    for n in range(n_max):
        terms = np.concatenate([p[n][0] for p in parts])
        mins = np.concatenate([p[n][1] for p in parts])
        qs = np.concatenate([p[n][2] for p in parts])
        qm = np.concatenate([p[n][3] for p in parts])
        table.sums.append(_sum_bracket(terms, qs, s, exact))
        table.min_sums.append(_sum_bracket(mins, qm, s, exact))
    # words with a first digit above N at position j: S_j(trunc) * tail * S_1(I)^(n-1-j)
    s1_full = table.sums[0].hi_float + tail_hi
    for n in range(1, n_max + 1):
        extra = 0.0
        if tail_hi > 0:
            for j in range(n):
                sj = 1.0 if j == 0 else table.sums[j - 1].hi_float
                extra += sj * tail_hi * s1_full ** (n - 1 - j)
        table.upper.append(up(lambda: table.sums[n - 1].hi + gmpy2.mpfr(extra) * (1 + FLOAT_ENVELOPE)))
    return table


def level_sum(I: IndexSet, t: float, n: int, N: Optional[int] = None, exact: bool = False) -> Bracket:
    """Bracket for ``S_n`` (truncated sum, plus the tail correction for infinite ``I``)."""
    return level_sums(I, t, n, N, exact=exact).level(n)


def _root_down(x, n: int):
    # x^(1/n) rounded down; the exponent's own rounding direction depends on x <> 1
    return down(lambda: min(x ** down(lambda: 1 / gmpy2.mpfr(n)), x ** up(lambda: 1 / gmpy2.mpfr(n))))


def _root_up(x, n: int):
    return up(lambda: max(x ** down(lambda: 1 / gmpy2.mpfr(n)), x ** up(lambda: 1 / gmpy2.mpfr(n))))


def lambda_from_levels(table: LevelSumTable) -> Bracket:
    """``[max_n max((4^-t S_n)^(1/n), T_n^(1/n)), min_n S_n^(1/n)]`` over the table."""
    four_t = up(lambda: gmpy2.mpfr(4) ** gmpy2.mpfr(table.t))
    lo = gmpy2.mpfr(0)
    hi = gmpy2.mpfr("inf")
    for n in range(1, table.n_max + 1):
        scaled = down(lambda: table.sums[n - 1].lo / four_t)
        lo = max(lo, _root_down(scaled, n), _root_down(table.min_sums[n - 1].lo, n))
        hi = min(hi, _root_up(gmpy2.mpfr(table.upper[n - 1]), n))
    return Bracket(min(lo, hi), hi)


# -- Collatz-Wielandt bounds ---------------------------------------------------


@dataclass
class CWResult:
    bracket: Bracket
    cells: int
    eigenvalue_estimate: float


@dataclass
class _TestPoly:
    """Positive Chebyshev polynomial ``p`` on [0, 1] with certified sup bounds."""

    coeffs: np.ndarray
    sup0: float
    sup1: float
    sup2: float
    min_lb: float

    @classmethod
    def from_coeffs(cls, coeffs: np.ndarray) -> "_TestPoly":
        m = np.arange(len(coeffs), dtype=float)
        a = np.abs(coeffs)
        # sup of the k-th derivative of T_m on [-1, 1] is T_m^(k)(1); d/dy = 2 d/du
        sup0 = float(a.sum())
        sup1 = float(2 * np.sum(a * m ** 2))
        sup2 = float(4 * np.sum(a * m ** 2 * (m ** 2 - 1) / 3))
        grid = np.linspace(0, 1, 4097)
        vals = C.chebval(2 * grid - 1, coeffs)
        min_lb = float(vals.min()) - sup1 * (0.5 / 4096) * (1 + 1e-6)
        return cls(coeffs, sup0, sup1, sup2, min_lb)

    @classmethod
    def constant(cls) -> "_TestPoly":
        return cls(np.array([1.0]), 1.0, 0.0, 0.0, 1.0)

    def __call__(self, y):
        return C.chebval(2 * np.asarray(y, dtype=float) - 1, self.coeffs)


def _test_poly(I: IndexSet, t: float, truncation: Optional[int]) -> tuple[_TestPoly, float]:
    try:
        tr = transfer_lambda(I, t, truncation=truncation)
        poly = _TestPoly.from_coeffs(tr.coeffs)
        est = tr.eigenvalue
        if poly.min_lb > 0 and np.all(np.isfinite(tr.coeffs)):
            return poly, est
    except (ConvergenceError, np.linalg.LinAlgError, ValueError):
        est = math.nan
    return _TestPoly.constant(), est


def _far_mass(I: IndexSet, snap: Snapshot, t: float, x: np.ndarray):
    """Bounds on ``sum_{i in I, i > cutoff} (i + x)^(-2t)`` at each ``x``."""
    s = 2.0 * t
    if snap.full_tail and not I.explicit and not I.blocks and s > 1:
        z = special.zeta(s, snap.cutoff + 1 + x)
        return z * (1 - HURWITZ_REL), z * (1 + HURWITZ_REL)
    lo, hi = I.tail_bounds(snap.cutoff, t)
    return lo * (1 + x / (snap.cutoff + 1)) ** (-s), np.full(len(x), hi)


def _second_derivative_bound(I: IndexSet, snap: Snapshot, t: float, poly: _TestPoly) -> float:
    # |(w p(g))''| <= s(s+1) z^(-s-2) P0 + (2s+2) z^(-s-3) P1 + z^(-s-4) P2 with z = i + x >= i
    s = 2.0 * t
    coef = (s * (s + 1) * poly.sup0, (2 * s + 2) * poly.sup1, poly.sup2)
    total = 0.0
    d = snap.digits
    for k, c in enumerate(coef):
        if c == 0:
            continue
        mass = math.fsum(d ** (-(s + 2 + k))) if len(d) else 0.0
        if snap.far:
            mass += I.tail_bounds(snap.cutoff, t + 1 + k / 2)[1]
        total += c * mass
    return total * (1 + 1e-6)


def _lp_at(I: IndexSet, snap: Snapshot, t: float, poly: _TestPoly, x: np.ndarray):
    s = 2.0 * t
    acc = np.zeros(len(x))
    d = snap.digits
    chunk = max(1, 4_000_000 // max(len(x), 1))
    for k in range(0, len(d), chunk):
        z = d[k:k + chunk][None, :] + x[:, None]
        acc += np.sum(z ** (-s) * poly(1.0 / z), axis=1)
    lo = hi = acc
    if snap.far:
        m_lo, m_hi = _far_mass(I, snap, t, x)
        p0 = float(poly(0.0))
        reach = poly.sup1 / (snap.cutoff + 1)
        lo = acc + m_lo * max(p0 - reach, 0.0)
        hi = acc + m_hi * (p0 + reach)
    return lo, hi


def cw_bracket(I: IndexSet, t: float, truncation: Optional[int] = None, cells: int = DEFAULT_CELLS,
               max_cells: int = MAX_CELLS, target_width: float = 1e-6,
               decide: Optional[float] = None) -> CWResult:
    """Collatz-Wielandt enclosure of ``lambda_t(I)``.

    With a positive test polynomial ``p`` and ``F = Lp - mu p``, the values
    of ``F`` at ``cells + 1`` uniform nodes plus the interpolation error
    ``h^2 sup|F''| / 8`` decide the sign of ``F`` on all of [0, 1].  The node
    count doubles until the width is below ``target_width``, the bracket
    excludes ``decide``, or ``max_cells`` is reached.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    snap = Snapshot.of(I, truncation)
    if snap.far and math.isinf(I.tail_bounds(snap.cutoff, t)[1]):
        # divergent weights: only the truncated alphabet gives a (lower) bound
        if not len(snap.digits):
            return CWResult(Bracket(0, math.inf), 0, math.nan)
        res = cw_bracket(I.truncate(snap.cutoff), t, None, cells, max_cells, target_width, decide)
        # one-step bound lambda >= 4^(-t) sum_i i^(-2t) still sees the tail
        one = 4.0 ** (-t) * I.tail_bounds(0, t)[0] * (1 - FLOAT_ENVELOPE)
        return CWResult(Bracket(max(res.bracket.lo_float, one), math.inf), res.cells, res.eigenvalue_estimate)
    poly, est = _test_poly(I, t, truncation if snap.far else None)
    d2 = _second_derivative_bound(I, snap, t, poly)
    m = max(int(cells), 2)
    while True:
        x = np.linspace(0.0, 1.0, m + 1)
        lp_lo, lp_hi = _lp_at(I, snap, t, poly, x)
        px = poly(x)
        r_hi = float(np.max(lp_hi / px))
        r_lo = float(np.min(lp_lo / px))
        h = 1.0 / m
        mu_cap = r_hi + 1.0
        eps = h * h * (d2 + mu_cap * poly.sup2) / (8 * poly.min_lb)
        lo = max(r_lo - eps, 0.0)
        hi = r_hi + eps
        done = hi - lo <= target_width or (decide is not None and (hi < decide or lo > decide))
        if done or 2 * m > max_cells:
            break
        m *= 2
    env = FLOAT_ENVELOPE
    return CWResult(Bracket(lo * (1 - env), hi * (1 + env)), m, est)


# -- public brackets -------------------------------------------------------------


def kz_increment_bounds(i: int, delta: float) -> tuple[float, float]:
    """Window ``((1/(i+1))^(2d), (2/(i+2))^(2d))`` for the increase of ``lambda_d`` when ``i`` joins."""
    if int(i) != i or i < 2:
        raise DomainError("the increment window needs a digit i >= 2")
    if delta <= 0:
        raise DomainError("delta must be positive")
    return (1.0 / (i + 1)) ** (2 * delta), (2.0 / (i + 2)) ** (2 * delta)


def kz_tail_bound(I: IndexSet, N: int, t: float) -> float:
    """Upper bound for ``sum_{i in I, i > N} (2/(i+2))^(2t)``."""
    hi = I.tail_bounds(N, t)[1]
    return 2.0 ** (2 * t) * hi


def default_depth(n_digits: int, budget: int = WORD_BUDGET, cap: int = 16) -> int:
    if n_digits <= 1:
        return cap
    return max(1, min(cap, int(math.log(budget) / math.log(n_digits))))


def lambda_bracket(I: IndexSet, t: float, n_max: Optional[int] = None, N: Optional[int] = None,
                   method: str = "auto", cells: int = DEFAULT_CELLS, max_cells: int = MAX_CELLS,
                   target_width: float = 1e-6, decide: Optional[float] = None) -> Bracket:
    """Certified bracket for ``lambda_t(I)``.

    ``method`` is ``"levels"``, ``"cw"`` or ``"auto"`` (both, intersected;
    level sums only when the word count is affordable).  ``N`` truncates the
    explicit alphabet for both routes.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if method not in ("auto", "levels", "cw"):
        raise ValueError(f"unknown method {method!r}")
    out: Optional[Bracket] = None
    if method in ("auto", "levels"):
        n_lev = N
        if I.is_finite and N is None and not I.blocks:
            n_dig = I.cardinality()
        elif I.blocks and N is None:
            n_dig = WORD_BUDGET + 1
        else:
            n_lev = N or 64
            n_dig = len(I.elements_upto(n_lev))
        depth = n_max or default_depth(n_dig)
        if 0 < n_dig and n_dig ** depth <= WORD_BUDGET:
            tab = level_sums(I, t, depth, n_lev)
            out = lambda_from_levels(tab)
            if tab.truncation is not None:
                trunc = lambda_from_levels(level_sums(I.truncate(n_lev), t, depth))
                kz_hi = up(lambda: trunc.hi + gmpy2.mpfr(kz_tail_bound(I, n_lev, t)) * (1 + FLOAT_ENVELOPE))
                out = Bracket(out.lo, min(out.hi, kz_hi))
        elif method == "levels":
            raise EnumerationBudgetError(f"{n_dig}^{depth} words exceed the enumeration budget")
    if method in ("auto", "cw"):
        cw = cw_bracket(I, t, truncation=N if not (I.is_finite and N is None) else None, cells=cells,
                        max_cells=max_cells, target_width=target_width, decide=decide).bracket
        out = cw if out is None else out.intersect(cw)
    return out


def pressure_bracket(I: IndexSet, t: float, **kw) -> Bracket:
    """Bracket for ``P_I(t) = log lambda_t(I)``."""
    return lambda_bracket(I, t, **kw).log()


@dataclass
class DimensionResult:
    bracket: Bracket
    converged: bool
    evaluations: int
    history: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "lo": self.bracket.lo_float,
            "hi": self.bracket.hi_float,
            "converged": self.converged,
            "evaluations": self.evaluations,
        }


def bowen_dimension(I: IndexSet, tol: float = 1e-3, budget: int = 80, N: Optional[int] = None,
                    max_cells: int = MAX_CELLS, t_hi: float = 1.0) -> DimensionResult:
    """Enclosure of ``inf{t >= 0 : P_I(t) <= 0}`` by certified bisection.

    ``t_lo`` only moves when the lambda-bracket at the midpoint lies above 1,
    ``t_hi`` only when it lies below 1.  A straddling midpoint triggers a
    finer bracket (more cells); if that still straddles, the midpoint is
    nudged toward the side it leans to.  The start ``t_hi = 1`` uses the
    trivial bound on the dimension of a subset of [0, 1].
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi = 0.0, float(t_hi)
    evals = 0
    history = []
    if I.is_finite and I.cardinality() == 1:
        # a single branch: lambda_t = golden-type contraction^t, equal to 1 only at t = 0
        b = lambda_bracket(I, 1e-3 if tol > 1e-3 else tol / 2, N=N)
        evals += 1
        history.append((0.0, 1.0, "single"))
        if b.below(1):
            hi = min(hi, 1e-3 if tol > 1e-3 else tol / 2)
        return DimensionResult(Bracket(0.0, hi), hi - lo <= tol, evals, history)
    width_target = 1e-4
    while hi - lo > tol and evals < budget:
        mid = 0.5 * (lo + hi)
        b = lambda_bracket(I, mid, N=N, decide=1.0, target_width=width_target, max_cells=max_cells)
        evals += 1
        history.append((mid, b.lo_float, b.hi_float))
        if b.above(1):
            lo = mid
        elif b.below(1):
            hi = mid
        else:
            # straddle: probe slightly off the midpoint on both sides
            step = (hi - lo) / 8
            moved = False
            for cand in (mid - step, mid + step):
                bb = lambda_bracket(I, cand, N=N, decide=1.0, target_width=width_target, max_cells=max_cells)
                evals += 1
                history.append((cand, bb.lo_float, bb.hi_float))
                if bb.above(1) and cand > lo:
                    lo, moved = cand, True
                elif bb.below(1) and cand < hi:
                    hi, moved = cand, True
            if not moved:
                break
    return DimensionResult(Bracket(lo, hi), hi - lo <= tol, evals, history)


# -- theta and regularity ----------------------------------------------------------


def theta(I: IndexSet):
    """Exponent of convergence of ``sum_{i in I} i^(-2t)``.

    Exact (a ``Fraction`` or float) for tagged families; otherwise an
    uncertified bracket from the growth of the counting function.
    """
    if I.is_finite:
        return Fraction(0)
    if I._theta is not None:
        return I._theta
    xs, counts = [], []
    x = 64
    while True:
        try:
            c = len(I.elements_upto(x))
        except EnumerationBudgetError:
            break
        if c:
            xs.append(math.log(x))
            counts.append(math.log(c))
        x *= 4
        if x > 2 ** 50:
            break
    if len(xs) < 3:
        raise UnsupportedSetError(f"{I.tag}: no exponent oracle and too few elements to estimate one")
    slope = np.polyfit(xs[-4:], counts[-4:], 1)[0]
    th = max(0.0, min(0.5, slope / 2))
    return Bracket(max(0.0, th - 0.05), min(0.5, th + 0.05), certified=False)


REGULARITY_CLASSES = ("regular", "strongly-regular", "cofinitely-regular", "not-regular", "undetermined")


def classify_regularity(I: IndexSet, budget: int = 40, max_cells: int = MAX_CELLS // 4) -> str:
    """Classify by the behaviour of the pressure at the threshold ``theta``.

    Divergence of ``sum i^(-2 theta)`` means the pressure is infinite at the
    threshold (cofinitely regular).  Otherwise the sign of ``P(theta)``
    decides: positive gives strongly regular, negative rules out any zero
    of the pressure.
    """
    if I.is_finite:
        return "strongly-regular"
    th = theta(I)
    if isinstance(th, Bracket):
        return "undetermined"
    if I._diverges is True:
        return "cofinitely-regular"
    if I._diverges is None:
        return "undetermined"
    b = lambda_bracket(I, float(th), decide=1.0, max_cells=max_cells)
    if b.above(1):
        return "strongly-regular"
    if b.below(1):
        return "not-regular"
    if b.contains(1) and b.width < 1e-12:
        return "regular"
    return "undetermined"
