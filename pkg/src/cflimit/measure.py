"""Conformal-measure cylinder masses, a Gibbs sampler for the invariant
measure ``mu_I`` and Lyapunov / decay diagnostics.

The sampler is the backward chain of the normalized transfer operator: at
state ``x`` it picks ``i in I`` with probability proportional to
``(i + x)^(-2h) * hhat(1 / (i + x))`` and moves to ``1 / (i + x)``, where
``hhat`` is the collocated eigenfunction at ``t = h``.  The state after
``n`` steps has the last ``n`` chosen digits, newest first, as its
continued-fraction expansion, so digit words are stored in that order.

Digits are drawn by rejection from the static proposal ``i^(-2h)``: a
cumulative table for small digits, dyadic shells for far digits of lazy
parts and direct sampling inside long blocks.  Digits of ``2^62`` or more
are kept as Python integers beside the int64 digit array.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from .bracket import Bracket
from .contfrac import DigitWord, DomainError
from .indexsets.base import Block, EnumerationBudgetError, IndexSet
from .pressure import bowen_dimension
from .transfer import TransferResult, transfer_lambda

SAMPLER_EPS = 1e-9
BURN_IN = 1000
TABLE_CAP = 1 << 18
HUGE = 1 << 62
EXPANDED_BLOCK = 1 << 16
ACCEPT_MARGIN = 1.05


class SamplerError(RuntimeError):
    """The sampler cannot represent the measure within its truncation policy."""


# -- proposal -----------------------------------------------------------------


def _randbelow(n: int, rng: np.random.Generator, py: random.Random) -> int:
    if n < 2 ** 63:
        return int(rng.integers(n))
    return py.randrange(n)


class HugeDigit:
    """A digit drawn uniformly from a block beyond ``2^1000``, materialized on demand.

    The offset is ``(k * length) >> 64`` for a stored 64-bit ``k``; its
    logarithm is known to float precision without building the integer.
    """

    __slots__ = ("block", "k", "log")

    def __init__(self, block: Block, k: int, log_start: float, rel_length: float):
        # rel_length = length / start, log_start = log(start), both precomputed per block
        self.block, self.k = block, k
        self.log = log_start + math.log1p(k / 2.0 ** 64 * rel_length)

    def __int__(self) -> int:
        return self.block.start + ((self.k * self.block.length) >> 64)

    def __index__(self) -> int:
        return int(self)

    def __repr__(self) -> str:
        return f"HugeDigit(~e^{self.log:.6g})"


def _is_huge(i) -> bool:
    return isinstance(i, HugeDigit) or i >= HUGE


def _log_int(i) -> float:
    if isinstance(i, HugeDigit):
        return i.log
    return math.log(i) if i >= HUGE else math.log(float(i))


@dataclass
class _Component:
    """Far digits of total proposal mass ``mass``; ``draw`` returns one of them."""

    mass: float
    draw: Callable[[np.random.Generator, random.Random], int]
    label: str


def _shell_component(part, lo: int, hi: int, s: float, mass: float) -> _Component:
    n, pick = part.shell(lo, hi)

    def draw(rng, py):
        # uniform slot, then thin by (lo / v)^s to get weights v^(-s)
        while True:
            v = pick(_randbelow(n, rng, py))
            if v is None:
                continue
            if rng.random() < math.exp(-s * (_log_int(v) - _log_int(lo))):
                return v

    return _Component(mass, draw, f"shell({lo},{hi}]")


def _block_component(b: Block, s: float, mass: float) -> _Component:
    flat = b.length * 10 ** 6 < b.start or b.start > 2 ** 1000
    lazy = b.start > 2 ** 1000
    log_start = _log_int(b.start)
    rel = math.exp(math.log(b.length) - log_start)

    def draw(rng, py):
        while True:
            if flat:
                if lazy:
                    v = HugeDigit(b, int(rng.integers(2 ** 64, dtype=np.uint64)), log_start, rel)
                else:
                    v = b.start + _randbelow(b.length, rng, py)
                if rng.random() < math.exp(-s * (_log_int(v) - log_start)):
                    return v
            else:
                # inverse CDF of x^(-s) on [start, last + 1), floored, thinned to i^(-s)
                a, c = float(b.start), float(b.last + 1)
                u = rng.random()
                if s == 1:
                    x = a * (c / a) ** u
                else:
                    x = (a ** (1 - s) + u * (c ** (1 - s) - a ** (1 - s))) ** (1 / (1 - s))
                v = min(int(x), b.last)
                mass_cell = ((v + 1.0) ** (1 - s) - v ** (1 - s)) / (1 - s) if s != 1 else math.log1p(1 / v)
                ratio = v ** (-s) / (mass_cell * (1 + 1 / b.start) ** s)
                if rng.random() < ratio:
                    return v

    return _Component(mass, draw, repr(b))


def _atom_component(v: int, s: float) -> _Component:
    return _Component(math.exp(-s * _log_int(v)), lambda rng, py: v, "atom")


class _Proposal:
    def __init__(self, I: IndexSet, h: float, eps: float = SAMPLER_EPS):
        s = 2.0 * h
        self.s = s
        table: list[int] = [v for v in I.explicit if v < HUGE]
        comps: list[_Component] = [_atom_component(v, s) for v in I.explicit if v >= HUGE]
        for b in I.blocks:
            if b.length <= EXPANDED_BLOCK and b.last < HUGE:
                table.extend(range(b.start, b.stop))
            elif b.length:
                lo, hi = b.power_sum_bounds(s)
                comps.append(_block_component(b, s, 0.5 * (lo + hi)))
        if I.lazy is not None:
            t0 = self._table_cut(I)
            lz = I.lazy.upto(t0)
            table.extend(int(v) for v in lz if v > I.lazy_min)
            start = max(t0, I.lazy_min)
            total = math.fsum(float(v) ** (-s) for v in table) + sum(c.mass for c in comps)
            comps.extend(self._shells(I, start, s, eps, total))
        if not table and not comps:
            raise SamplerError("empty alphabet")
        self.table = np.array(sorted(set(table)), dtype=np.int64)
        self.table_w = self.table.astype(float) ** (-s)
        self.comps = comps

    @staticmethod
    def _table_cut(I: IndexSet) -> int:
        limit = getattr(I.lazy, "enumeration_limit", None)
        if callable(limit):
            return max(int(limit()), I.lazy_min)
        cut = TABLE_CAP
        while cut < HUGE // 4:
            try:
                e = I.lazy.upto(cut * 4)
            except EnumerationBudgetError:
                break
            if len(e) >= TABLE_CAP:
                break
            cut *= 4
        return max(cut, I.lazy_min)

    @staticmethod
    def _shells(I: IndexSet, start: int, s: float, eps: float, total: float) -> list[_Component]:
        out = []
        lo = start
        rem_lo = I.lazy.remainder(lo, s)
        if math.isinf(rem_lo[1]):
            raise SamplerError(f"tail of {I.tag} diverges at h = {s / 2}; no sampler exists")
        while rem_lo[1] > eps * total:
            if lo.bit_length() > 4096:
                raise SamplerError(f"tail weight above {eps} beyond 2^4096; raise h or truncate the alphabet")
            hi = 2 * lo
            rem_hi = I.lazy.remainder(hi, s)
            mass = 0.5 * (rem_lo[0] + rem_lo[1]) - 0.5 * (rem_hi[0] + rem_hi[1])
            if mass > 0:
                out.append(_shell_component(I.lazy, lo, hi, s, mass))
            lo, rem_lo = hi, rem_hi
        return out


# -- context -------------------------------------------------------------------


@dataclass
class ConformalContext:
    I: IndexSet
    h: float
    h_bracket: Optional[Bracket]
    eigen: TransferResult
    seed: int
    proposal: _Proposal = field(repr=False)
    accept_bound: float = 1.0

    @classmethod
    def build(cls, I: IndexSet, h: Optional[float] = None, seed: int = 0, tol: float = 1e-4,
              eps: float = SAMPLER_EPS, nodes: int = 48, truncation: Optional[int] = None) -> "ConformalContext":
        hb = None
        if h is None:
            hb = bowen_dimension(I, tol=tol).bracket
            h = float(hb.mid)
        if h <= 0:
            raise SamplerError("the sampler needs h > 0")
        eig = transfer_lambda(I, h, n=nodes, truncation=truncation)
        grid = np.linspace(0, 1, 2049)
        if np.min(eig(grid)) <= 0:
            raise SamplerError("interpolated eigenfunction is not positive")
        ctx = cls(I, h, hb, eig, seed, _Proposal(I, h, eps))
        ctx.accept_bound = ctx._accept_bound()
        return ctx

    # proposal weight g(i): hhat at the cylinder middle for table digits, hhat(0) beyond
    def _g_table(self) -> np.ndarray:
        return self.eigen(1.0 / (self.proposal.table + 0.5))

    def _accept_bound(self) -> float:
        p = self.proposal
        x = np.linspace(0, 1, 65)
        m = 0.0
        if len(p.table):
            d = p.table[:256].astype(float)
            g = self.eigen(1.0 / (d + 0.5))
            z = d[:, None] + x[None, :]
            r = (z / d[:, None]) ** (-p.s) * self.eigen(1.0 / z) / g[:, None]
            m = float(r.max())
        if p.comps:
            y = np.linspace(0, 1.0 / max(2, int(p.table[-1]) if len(p.table) else 2), 65)
            m = max(m, float(np.max(self.eigen(y)) / self.eigen(0.0)))
        return max(m, 1.0) * ACCEPT_MARGIN

    def rng(self, stream: int = 0) -> tuple[np.random.Generator, random.Random]:
        ss = np.random.SeedSequence([self.seed & (2 ** 64 - 1), stream])
        g = np.random.Generator(np.random.PCG64(ss))
        return g, random.Random(int(g.integers(2 ** 63)))


# -- cylinder masses -----------------------------------------------------------


def cylinder_mass_bracket(ctx: ConformalContext, w: DigitWord) -> Bracket:
    """Certified enclosure ``[4^(-h) q_n^(-2h), q_n^(-2h)]`` of ``m_I`` of the cylinder."""
    for d in w.digits:
        if d not in ctx.I:
            raise DomainError(f"digit {d} is not in the alphabet")
    lq = _log_int(w.q_cur)
    hi = math.exp(-2 * ctx.h * lq)
    lo = hi * 4.0 ** (-ctx.h)
    return Bracket(lo * (1 - 1e-15), hi * (1 + 1e-15))


def survival_ratio_bound(ctx: ConformalContext, w: DigitWord, k: int) -> float:
    """Upper bound ``1 - 4^(-h) sum_{i in I, i > k} i^(-2h)`` on the survival ratio."""
    lo, hi = ctx.I.tail_bounds(int(k), ctx.h)
    if math.isinf(hi):
        raise DomainError("divergent tail sum")
    return min(1.0, max(0.0, 1.0 - 4.0 ** (-ctx.h) * lo))


# -- the chain -------------------------------------------------------------------


@dataclass
class _Step:
    digits: np.ndarray      # int64, -1 where the digit is huge
    log_digit: np.ndarray   # log of the digit
    big: dict               # replica -> huge digit
    state: np.ndarray       # new state 1/(i + x)
    log_deriv: np.ndarray   # log|G'(new state)| = 2 log(i + x)
    log_prob: np.ndarray    # log of the kernel probability of the step


class _Chain:
    def __init__(self, ctx: ConformalContext, replicas: int, stream: int = 0):
        self.ctx = ctx
        self.p = ctx.proposal
        self.rng, self.py = ctx.rng(stream)
        self.x = np.zeros(replicas)
        self.rejections = 0
        self.bias_events = 0
        p = self.p
        g = ctx._g_table() if len(p.table) else np.zeros(0)
        self.g_table = g
        qt = p.table_w * g
        self.cdf = np.cumsum(qt)
        self.table_mass = float(self.cdf[-1]) if len(qt) else 0.0
        self.g_far = float(ctx.eigen(0.0))
        cm = np.array([c.mass for c in p.comps]) * self.g_far
        self.comp_cdf = np.cumsum(cm)
        self.total = self.table_mass + (float(self.comp_cdf[-1]) if len(cm) else 0.0)
        self.lam = ctx.eigen.eigenvalue

    def step(self) -> _Step:
        R = len(self.x)
        digits = np.zeros(R, dtype=np.int64)
        logd = np.zeros(R)
        big: dict = {}
        pending = np.arange(R)
        s = self.p.s
        while len(pending):
            u = self.rng.random(len(pending)) * self.total
            in_table = u < self.table_mass
            d = np.zeros(len(pending))
            g = np.zeros(len(pending))
            bigs = {}
            if in_table.any():
                k = np.searchsorted(self.cdf, u[in_table], side="right")
                k = np.minimum(k, len(self.cdf) - 1)
                d[in_table] = self.p.table[k]
                g[in_table] = self.g_table[k]
            for j in np.nonzero(~in_table)[0]:
                c = int(np.searchsorted(self.comp_cdf, u[j] - self.table_mass, side="right"))
                c = min(c, len(self.p.comps) - 1)
                v = self.p.comps[c].draw(self.rng, self.py)
                bigs[j] = v
                d[j] = math.inf if isinstance(v, HugeDigit) or v >= 2 ** 1000 else float(v)
                g[j] = self.g_far
            xs = self.x[pending]
            with np.errstate(divide="ignore", over="ignore"):
                y = np.where(np.isinf(d), 0.0, 1.0 / (d + xs))
                ratio = np.where(np.isinf(d), 1.0, (1.0 + xs / d) ** (-s))
            a = ratio * self.ctx.eigen(y) / (g * self.ctx.accept_bound)
            self.bias_events += int(np.sum(a > 1))
            acc = self.rng.random(len(pending)) < a
            self.rejections += int(np.sum(~acc))
            rows = pending[acc]
            dd = d[acc]
            finite_small = dd < HUGE
            digits[rows] = np.where(finite_small, dd, -1).astype(np.int64)
            with np.errstate(divide="ignore"):
                logd[rows] = np.log(np.where(np.isinf(dd), 1.0, dd))
            for j in np.nonzero(acc)[0]:
                if j in bigs:
                    v = bigs[j]
                    if _is_huge(v):
                        big[int(pending[j])] = v
                    else:
                        digits[pending[j]] = v
                    logd[pending[j]] = _log_int(v)
            pending = pending[~acc]
        x = self.x
        df = np.where(digits >= 0, digits.astype(float), np.inf)
        with np.errstate(divide="ignore", over="ignore"):
            new = np.where(np.isinf(df), 0.0, 1.0 / (df + x))
            # huge digits: x / i underflows, so log(i + x) = log i
            logz = np.where(np.isinf(df), logd, np.log(df + x))
        for r, v in big.items():
            if not isinstance(v, HugeDigit) and v < 2 ** 1000:
                new[r] = 1.0 / (float(v) + x[r])
        log_prob = -s * logz + np.log(self.ctx.eigen(new)) - np.log(self.lam * self.ctx.eigen(x))
        self.x = new
        return _Step(digits, logd, big, new, 2.0 * logz, log_prob)


# -- sampled paths ---------------------------------------------------------------


@dataclass
class SamplePath:
    """One sampled point, its digits listed from the first."""

    digits: list
    log_q: np.ndarray
    log_prob: np.ndarray
    eta_partial: np.ndarray
    log_deriv_sum: float
    state: float

    @property
    def word(self) -> DigitWord:
        return DigitWord.from_digits(int(d) for d in self.digits)

    def recompute(self) -> tuple[np.ndarray, np.ndarray]:
        """Partial sums of eta and ``log q_n`` rebuilt from the digits alone."""
        huge = np.array([_is_huge(d) for d in self.digits], dtype=bool)
        small = np.array([0.0 if h else float(d) for d, h in zip(self.digits, huge)])
        # same vectorised log1p as SampleBatch.eta, so the sums agree bit for bit
        eta = np.where(huge, [_log_int(d) if h else 0.0 for d, h in zip(self.digits, huge)], np.log1p(small))
        return np.cumsum(eta), _log_q_from_digits(self.digits)


def _log_q_from_digits(digits: Sequence[int]) -> np.ndarray:
    out = np.empty(len(digits))
    r, lq = 0.0, 0.0
    for n, d in enumerate(digits):
        if _is_huge(d):
            lq += _log_int(d)
            r = 0.0
        else:
            lq += math.log(d + r)
            r = 1.0 / (d + r)
        out[n] = lq
    return out


@dataclass
class SampleBatch:
    """``n_samples`` sampled points with the first ``depth`` digits of each."""

    digits: np.ndarray          # (R, depth) int64, -1 marks a huge digit
    big: dict                   # (replica, index) -> huge digit
    log_digit: np.ndarray       # (R, depth)
    states: np.ndarray          # (R,)
    log_deriv_sum: np.ndarray   # (R,) Birkhoff sum of log|G'| over the depth
    h: float
    seed: int
    burn_in: int
    rejections: int = 0
    bias_events: int = 0
    log_prob: Optional[np.ndarray] = None
    _log_q: Optional[np.ndarray] = None

    @property
    def n_samples(self) -> int:
        return self.digits.shape[0]

    @property
    def depth(self) -> int:
        return self.digits.shape[1]

    def digit(self, r: int, n: int) -> int:
        d = int(self.digits[r, n])
        return d if d >= 0 else self.big[(r, n)]

    def digits_of(self, r: int) -> list:
        return [self.digit(r, n) for n in range(self.depth)]

    def eta(self) -> np.ndarray:
        """``eta(G^n x) = log(1 + omega_{n+1})`` for every sample and index."""
        d = self.digits
        return np.where(d >= 0, np.log1p(np.maximum(d, 0).astype(float)), self.log_digit)

    def log_q(self) -> np.ndarray:
        """``log q_n`` for n = 1..depth (column n-1)."""
        if self._log_q is None:
            R, D = self.digits.shape
            out = np.empty((R, D))
            r = np.zeros(R)
            lq = np.zeros(R)
            for n in range(D):
                d = self.digits[:, n]
                small = d >= 0
                df = d.astype(float)
                inc = np.where(small, np.log(np.where(small, df, 1.0) + r), self.log_digit[:, n])
                lq = lq + inc
                r = np.where(small, 1.0 / (np.where(small, df, 1.0) + r), 0.0)
                out[:, n] = lq
            self._log_q = out
        return self._log_q

    def path(self, r: int) -> SamplePath:
        eta = self.eta()[r]
        lp = self.log_prob[r] if self.log_prob is not None else np.full(self.depth, np.nan)
        return SamplePath(self.digits_of(r), self.log_q()[r], lp, np.cumsum(eta),
                          float(self.log_deriv_sum[r]), float(self.states[r]))

    def to_csv(self, path: str, max_samples: Optional[int] = None, header: str = "") -> None:
        lq = self.log_q()
        eta = np.cumsum(self.eta(), axis=1)
        with open(path, "w", newline="") as fh:
            if header:
                fh.write(header if header.endswith("\n") else header + "\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["replica", "step", "digit", "log_q", "eta_partial_sum"])
            for r in range(min(self.n_samples, max_samples or self.n_samples)):
                for n in range(self.depth):
                    w.writerow([r, n + 1, self.digit(r, n), repr(float(lq[r, n])), repr(float(eta[r, n]))])


def _run(ctx: ConformalContext, replicas: int, steps: int, burn_in: int, stream: int,
         keep: bool, keep_probs: bool = False):
    ch = _Chain(ctx, replicas, stream)
    for _ in range(burn_in):
        ch.step()
    D = steps
    digits = np.zeros((replicas, D), dtype=np.int64) if keep else None
    logd = np.zeros((replicas, D)) if keep else None
    lp = np.zeros((replicas, D)) if keep_probs else None
    big: dict = {}
    lsum = np.zeros(replicas)
    lsq = np.zeros(replicas)
    for n in range(D):
        st = ch.step()
        lsum += st.log_deriv
        lsq += st.log_deriv ** 2
        if keep:
            # newest digit first: generation step n is expansion index D-1-n
            col = D - 1 - n
            digits[:, col] = st.digits
            logd[:, col] = st.log_digit
            for r, v in st.big.items():
                big[(r, col)] = v
            if keep_probs:
                lp[:, col] = st.log_prob
    return ch, digits, logd, lp, big, lsum, lsq


def sample_batch(ctx: ConformalContext, depth: int, n_samples: int, burn_in: int = BURN_IN,
                 stream: int = 0, keep_probs: bool = False) -> SampleBatch:
    if depth < 1:
        raise ValueError("depth must be >= 1")
    ch, digits, logd, lp, big, lsum, _ = _run(ctx, n_samples, depth, burn_in, stream, True, keep_probs)
    return SampleBatch(digits, big, logd, ch.x.copy(), lsum, ctx.h, ctx.seed, burn_in,
                       ch.rejections, ch.bias_events, lp)


def sample_point(ctx: ConformalContext, depth: int, burn_in: int = BURN_IN, stream: int = 0) -> SamplePath:
    return sample_batch(ctx, depth, 1, burn_in, stream, keep_probs=True).path(0)


def state_stream(ctx: ConformalContext, replicas: int, steps: int, burn_in: int = BURN_IN,
                 stream: int = 0) -> Iterator[np.ndarray]:
    """Chain states after burn-in; by ergodicity their empirical law approximates ``mu_I``."""
    ch = _Chain(ctx, replicas, stream)
    for _ in range(burn_in):
        ch.step()
    for _ in range(steps):
        yield ch.step().state


# -- Lyapunov exponent ---------------------------------------------------------


@dataclass
class LyapunovResult:
    birkhoff: float
    stderr: float
    steps: int
    replicas: int
    series: Bracket
    series_truncation: int
    h: float

    def as_dict(self) -> dict:
        return {"birkhoff": self.birkhoff, "stderr": self.stderr, "steps": self.steps,
                "replicas": self.replicas, "series_lo": float(self.series.lo),
                "series_hi": float(self.series.hi), "series_mid": float(self.series.mid),
                "series_truncation": self.series_truncation, "h": self.h}


def series_estimate(I: IndexSet, h: float, T: int) -> Bracket:
    """``sum_{i in I, i <= T} log(1 + i) m_I(S_i)`` with the cylinder-mass brackets.

    The exact masses lie in ``[4^(-h) i^(-2h), i^(-2h)]``.
    """
    s = 2.0 * h
    T = int(T)
    total_hi = 0.0
    small = [v for v in I.explicit if v <= T]
    big = [v for v in small if v >= 2 ** 1000]
    small = [v for v in small if v < 2 ** 1000]
    total_hi += math.fsum(math.log1p(v) * float(v) ** (-s) for v in small)
    total_hi += math.fsum(math.log(v) * math.exp(-s * math.log(v)) for v in big)
    lo_sum = total_hi
    for b in I.blocks:
        if b.start > T or not b.length:
            continue
        sub = Block(b.start, min(b.length, T - b.start + 1))
        bl, bh = sub.log_weighted_bounds(s)
        lo_sum += bl
        total_hi += bh
    if I.lazy is not None and T > I.lazy_min:
        e = I.lazy.upto(T)
        e = e[e > I.lazy_min].astype(float)
        v = math.fsum(np.log1p(e) * e ** (-s))
        lo_sum += v
        total_hi += v
    f = 4.0 ** (-h)
    return Bracket(lo_sum * f * (1 - 1e-12), total_hi * (1 + 1e-12))


def default_series_truncation(ctx: ConformalContext) -> int:
    p = ctx.proposal
    return int(p.table[-1]) if len(p.table) else 1


def lyapunov_estimate(ctx: ConformalContext, n_steps: int, replicas: int = 100, burn_in: int = BURN_IN,
                      stream: int = 0, series_T: Optional[int] = None) -> LyapunovResult:
    """Birkhoff average of ``log|G'| = -2 log x`` along sampled orbits.

    ``n_steps`` counts steps over all replicas together.
    """
    per = max(1, -(-n_steps // replicas))
    _, _, _, _, _, lsum, _ = _run(ctx, replicas, per, burn_in, stream, False)
    means = lsum / per
    est = float(np.mean(means))
    se = float(np.std(means, ddof=1) / math.sqrt(replicas)) if replicas > 1 else math.nan
    T = series_T or default_series_truncation(ctx)
    return LyapunovResult(est, se, per * replicas, replicas, series_estimate(ctx.I, ctx.h, T), T, ctx.h)


# -- absolute decay --------------------------------------------------------------


@dataclass
class DecayRow:
    center: float
    radius: float
    epsilon: float
    inner: int
    outer: int
    ratio: float
    alpha_hat: float
    non_decay: bool
    verdict: str

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def geometric_witness_balls(a: int, ns: Sequence[int]) -> list[tuple[float, float, float]]:
    """Centre ``a^-n`` with outer radius ``a^-n - a^-(n+1)`` and inner ``a^-n - 1/(a^n + 1)``."""
    out = []
    for n in ns:
        c = a ** -n
        r_out = c - a ** -(n + 1)
        r_in = c - 1 / (a ** n + 1)
        out.append((c, r_out, r_in / r_out))
    return out


def decay_probe(ctx: ConformalContext, centers: Sequence[float], radii: Sequence[float],
                epsilons: Sequence[float], n_samples: int = 1_000_000, replicas: int = 1000,
                min_count: int = 30, burn_in: int = BURN_IN, stream: int = 0) -> list[DecayRow]:
    """Empirical ``mu(B(x, eps r)) / mu(B(x, r))`` from chain states.

    The three sequences are matched row by row.
    """
    c = np.asarray(centers, dtype=float)
    r = np.asarray(radii, dtype=float)
    e = np.asarray(epsilons, dtype=float)
    if not (len(c) == len(r) == len(e)):
        raise ValueError("centers, radii and epsilons must have equal lengths")
    inner = np.zeros(len(c), dtype=np.int64)
    outer = np.zeros(len(c), dtype=np.int64)
    steps = max(1, -(-n_samples // replicas))
    for x in state_stream(ctx, replicas, steps, burn_in, stream):
        dist = np.abs(x[:, None] - c[None, :])
        outer += np.sum(dist <= r[None, :], axis=0)
        inner += np.sum(dist <= (e * r)[None, :], axis=0)
    rows = []
    for k in range(len(c)):
        if outer[k] < min_count:
            rows.append(DecayRow(float(c[k]), float(r[k]), float(e[k]), int(inner[k]), int(outer[k]),
                                 math.nan, math.nan, False, "inconclusive"))
            continue
        ratio = inner[k] / outer[k]
        alpha = math.log(ratio) / math.log(e[k]) + 0.0 if ratio > 0 and e[k] < 1 else math.inf
        nd = ratio >= 0.9 and e[k] <= 0.5
        rows.append(DecayRow(float(c[k]), float(r[k]), float(e[k]), int(inner[k]), int(outer[k]),
                             float(ratio), float(alpha), bool(nd), "non-decay" if nd else "ok"))
    return rows
