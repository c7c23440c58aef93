"""Greedy alphabets whose pressure is steered to a prescribed threshold.

Every comparison ``lambda_delta(...) < 1`` is decided on a certified
bracket: the strict side must be proven, and a bracket that straddles the
threshold is treated as "not proven" (the candidate is rejected and the
event flagged).  Cheap decisions come from the increment window

    lambda(I) + (1/(i+1))^(2d) <= lambda(I + {i}) <= lambda(I) + (2/(i+2))^(2d),

and only candidates inside that window trigger a fresh bracket.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import gmpy2

from ..bracket import Bracket
from ..pressure import kz_increment_bounds, kz_tail_bound, lambda_bracket
from .base import AffinePart, Block, I0Part, IndexSet, finite, full


class ConstructionError(RuntimeError):
    """A construction could not complete within its budget."""


def describe_int(n: int):
    """JSON-friendly form of a possibly astronomically large integer."""
    if n < 10 ** 15:
        return int(n)
    return f"~10^{_log10(n):.6f}"


def _log10(n: int) -> float:
    return math.log10(n) if n < 2 ** 1000 else math.log(n) / math.log(10)


@dataclass
class AuditLog:
    records: list = field(default_factory=list)

    def add(self, stage, candidate, bracket: Optional[Bracket], decision: str, depth: int = 0, **extra):
        rec = {
            "stage": stage,
            "candidate": describe_int(candidate) if isinstance(candidate, int) else candidate,
            "bracket_lo": None if bracket is None else bracket.lo_float,
            "bracket_hi": None if bracket is None else bracket.hi_float,
            "decision": decision,
            "depth": depth,
        }
        rec.update(extra)
        self.records.append(rec)
        return rec

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records)

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_jsonl())

    def decisions(self, name: str) -> list:
        return [r for r in self.records if r["decision"] == name]


# -- shared greedy step ----------------------------------------------------------


@dataclass
class _Greedy:
    """Tracks a certified bracket for lambda_delta of a growing set."""

    delta: float
    current: IndexSet
    lam: Bracket
    log: AuditLog
    stage: str
    max_cells: int = 1 << 14
    refresh_width: float = 1e-5

    def _fresh(self, I: IndexSet) -> Bracket:
        return lambda_bracket(I, self.delta, method="cw", decide=1.0, target_width=1e-9,
                              max_cells=self.max_cells)

    def refresh(self):
        b = self._fresh(self.current)
        try:
            self.lam = self.lam.intersect(b)
        except ArithmeticError:
            self.lam = b

    def offer(self, n: int, force_reject: Optional[Bracket] = None, _refreshed: bool = False) -> bool:
        """Admit ``n`` iff the certified upper end of lambda(current + {n}) is < 1."""
        inc_lo, inc_hi = kz_increment_bounds(n, self.delta)
        if force_reject is not None:
            self.log.add(self.stage, n, force_reject, "reject", certified=True, route="monotone")
            return False
        window = Bracket(self.lam.lo + inc_lo, self.lam.hi + inc_hi)
        if window.below(1):
            self.current = self.current.union([n])
            self.lam = window
            self.log.add(self.stage, n, window, "admit", certified=True, route="increment")
            return True
        if self.lam.lo + inc_lo >= 1:
            self.log.add(self.stage, n, window, "reject", certified=True, route="increment")
            return False
        if self.lam.width > self.refresh_width and not _refreshed:
            self.refresh()
            return self.offer(n, _refreshed=True)
        trial = self.current.union([n])
        b = self._fresh(trial)
        if b.below(1):
            self.current = trial
            self.lam = b
            self.log.add(self.stage, n, b, "admit", certified=True, route="bracket")
            return True
        if b.above(1) or b.lo >= 1:
            self.log.add(self.stage, n, b, "reject", certified=True, route="bracket")
            return False
        self.log.add(self.stage, n, b, "reject", certified=False, route="bracket", straddle=True)
        return False


# -- R ------------------------------------------------------------------------------


@dataclass
class RResult:
    set: IndexSet
    log: AuditLog
    lam: Bracket
    n_max: int


def build_R(delta: float, n_max: int, max_cells: int = 1 << 14, _log: Optional[AuditLog] = None) -> RResult:
    """Greedy ``R``: start from ``{1}`` and admit ``N = 2, 3, ...`` while lambda_delta stays below 1."""
    if not 0 < delta < 1:
        raise ValueError("build_R needs 0 < delta < 1")
    log = _log or AuditLog()
    start = finite([1], "R", delta=delta)
    lam0 = lambda_bracket(start, delta, decide=1.0, target_width=1e-10)
    log.add("R", 1, lam0, "admit", certified=bool(lam0.below(1)), route="seed")
    g = _Greedy(delta, start, lam0, log, "R", max_cells=max_cells)
    for n in range(2, n_max + 1):
        g.offer(n)
    g.refresh()
    return RResult(g.current.with_tag("R", delta=delta, n_max=n_max), log, g.lam, n_max)


# -- I_delta ---------------------------------------------------------------------------


@dataclass
class IDeltaResult:
    set: IndexSet
    log: AuditLog
    delta: float
    n1: int
    n2: int
    n_max: int
    r_set: IndexSet
    lam: Bracket
    admitted_plus: list
    rejected: list

    def exceptional_sets(self, upto: Optional[int] = None) -> dict:
        """Finite sets witnessing ``I_- within I within I_+ u I_-`` up to finitely many exceptions."""
        upto = upto or self.n_max
        minus = AffinePart(I0Part(self.delta), 2, -1)
        plus = AffinePart(I0Part(self.delta), 2, 0)
        elems = set(int(v) for v in self.set.elements_upto(upto))
        m = set(int(v) for v in minus.upto(upto))
        p = set(int(v) for v in plus.upto(upto))
        return {
            "minus_not_in_I": sorted(m - elems),
            "I_not_in_plus_or_minus": sorted(elems - m - p),
        }


def _plus_tail_lower(i0: I0Part, x: int, delta: float, cut: int) -> float:
    # sum_{i in 2 I_0, i > x} (1 + i)^(-2 delta) >= enumerated part of (x, cut]
    e = i0.upto(cut // 2) * 2
    e = e[e > x]
    if len(e) == 0:
        return 0.0
    return math.fsum((1.0 + e.astype(float)) ** (-2 * delta)) * (1 - 1e-12)


def choose_n1_scale(delta: float, j_min: int = 3, j_check: Optional[int] = None) -> tuple[int, dict]:
    """Smallest power of two ``2^j`` past which ``(2/(2+M))^(2d) <= sum_{i in I_+, i > M} (1+i)^(-2d)``.

    Checked dyadically: for ``M`` in ``[2^k, 2^(k+1))`` the left side is at most
    its value at ``2^k`` and the right side at least the tail beyond ``2^(k+1)``.
    Scales ``k`` up to ``j_check`` are verified; beyond that the inequality is
    the asymptotic comparison ``M^(-2d)`` versus ``M^(-d)``.
    """
    i0 = I0Part(delta)
    cut = i0.enumeration_limit()
    j_check = j_check or max(j_min + 1, int(math.log2(cut)) - 6)
    ok_from = None
    for j in range(j_check, j_min - 1, -1):
        lhs = (2.0 / (2 + 2 ** j)) ** (2 * delta)
        rhs = _plus_tail_lower(i0, 2 ** (j + 1), delta, cut)
        if lhs <= rhs:
            ok_from = j
        else:
            break
    if ok_from is None:
        raise ConstructionError("no dyadic scale satisfies the N_1 comparison within the checked range")
    return 2 ** ok_from, {"verified_up_to": 2 ** (j_check + 1), "scale_exponent": ok_from}


def build_I_delta(delta: float, n_max: int = 1 << 14, max_cells: int = 1 << 14,
                  n2_budget: int = 1 << 40) -> IDeltaResult:
    """Combine ``R`` with ``I_+ = 2 I_0`` and ``I_- = 2 I_0 - 1``.

    Seeds ``R_{N1-1} u (I_- minus [1, N2])`` and then offers every
    ``N in I_+ u {N1}`` up to ``n_max`` in increasing order.
    """
    if delta == 1:
        I = full()
        return IDeltaResult(I, AuditLog(), 1.0, 0, 0, n_max, I, Bracket(1, 1), [], [])
    if not 0 < delta < 1:
        raise ValueError("build_I_delta needs 0 < delta <= 1")
    log = AuditLog()
    scale, info = choose_n1_scale(delta)
    log.add("N1", scale, None, "scale", **info)

    # R up to the first certified rejection at or beyond the scale
    start = finite([1], "R", delta=delta)
    lam0 = lambda_bracket(start, delta, decide=1.0, target_width=1e-10)
    log.add("R", 1, lam0, "admit", certified=True, route="seed")
    g = _Greedy(delta, start, lam0, log, "R", max_cells=max_cells)
    n = 2
    n1 = None
    n1_bracket = None
    while n1 is None:
        admitted = g.offer(n)
        rec = log.records[-1]
        if n >= scale and not admitted and rec.get("certified"):
            n1 = n
            n1_bracket = Bracket(rec["bracket_lo"], math.inf) if rec["bracket_lo"] is not None else None
        n += 1
        if n > 64 * scale + 1024:
            raise ConstructionError("no certified rejection found for N_1")
    r_set = g.current.with_tag("R", delta=delta, n_max=n1 - 1)
    g.current = r_set
    g.refresh()
    lam_r = g.lam
    log.add("N1", n1, lam_r, "chosen", certified=True)

    # N2: tail of I_- under the increment bound must fit in the gap 1 - lambda(R)
    gap = 1.0 - lam_r.hi_float
    if gap <= 0:
        raise ConstructionError("lambda(R) is not certified below 1")
    minus_full = IndexSet("minus", {"delta": delta}, lazy=AffinePart(I0Part(delta), 2, -1))
    n2 = 2
    while kz_tail_bound(minus_full, n2, delta) >= gap:
        n2 *= 2
        if n2 > n2_budget:
            raise ConstructionError("could not locate N_2 within budget")
    lo_n2, hi_n2 = n2 // 2, n2
    while hi_n2 - lo_n2 > max(1, hi_n2 // 64):
        mid = (lo_n2 + hi_n2) // 2
        if kz_tail_bound(minus_full, mid, delta) < gap:
            hi_n2 = mid
        else:
            lo_n2 = mid
    n2 = hi_n2
    tail = kz_tail_bound(minus_full, n2, delta)
    log.add("N2", n2, None, "chosen", tail_bound=tail, gap=gap)

    seed = IndexSet("combined", {"delta": delta}, explicit=r_set.explicit,
                    lazy=AffinePart(I0Part(delta), 2, -1), lazy_min=n2,
                    theta=delta / 2, diverges_at_theta=True)
    base_hi = lam_r.hi_float + tail * (1 + 1e-9)
    lam_seed = Bracket(lam_r.lo, base_hi)
    g = _Greedy(delta, seed, lam_seed, log, "I", max_cells=max_cells)
    g.refresh()
    log.add("I", "seed", g.lam, "seed", certified=bool(g.lam.below(1)))
    if not g.lam.below(1):
        raise ConstructionError("seed set is not certified below 1")

    plus = AffinePart(I0Part(delta), 2, 0)
    cands = sorted(set(int(v) for v in plus.upto(n_max) if v >= n1) | {n1})
    admitted, rejected = [], []
    for c in cands:
        if c in g.current:
            continue
        force = n1_bracket if c == n1 else None
        if g.offer(c, force_reject=force):
            admitted.append(c)
        else:
            rejected.append(c)
    g.refresh()
    final = g.current.with_tag("combined", delta=delta, n1=n1, n2=n2, n_max=n_max)
    return IDeltaResult(final, log, delta, n1, n2, n_max, r_set, g.lam, admitted, rejected)


# -- Liouville alphabet ---------------------------------------------------------------


@dataclass
class LiouvilleStage:
    n: int
    m: int
    length: int
    lam: Bracket
    window: tuple

    @property
    def last(self) -> int:
        return self.m + self.length - 1


@dataclass
class LiouvilleResult:
    set: IndexSet
    log: AuditLog
    delta: float
    stages: list

    def maxima(self) -> list:
        return [s.last for s in self.stages]


def _pow_int(base: int, exp: int) -> int:
    return int(gmpy2.mpz(base) ** exp)


def _jump_threshold(n: int, delta: float, margin: int) -> int:
    # smallest m with (2/(m+2))^(2 delta) <= 2^-(n + margin)
    need = 2.0 ** (1 + (n + margin) / (2 * delta))
    m = max(int(math.ceil(need)) - 2, 1)
    while (2.0 / (m + 2)) ** (2 * delta) > 2.0 ** -(n + margin):
        m += 1
    return m


def stage_start(n: int, prev_max: int, delta: float, margin: int = 2) -> int:
    """Least ``m > prev_max`` with ``1 + m >= (1 + prev_max)^(n 4^n)`` and the jump bound."""
    growth = _pow_int(1 + prev_max, n * 4 ** n) - 1
    return max(prev_max + 1, growth, _jump_threshold(n, delta, margin))


def _length_from_log(log_len: float) -> int:
    if log_len < 50:
        return max(1, int(round(math.exp(log_len))))
    k = int(log_len / math.log(2)) - 52
    mant = math.exp(log_len - k * math.log(2))
    return int(mant) << k


def build_liouville_set(delta: float, stages: int, max_cells: int = 1 << 14, margin: int = 2,
                        max_steps: int = 200) -> LiouvilleResult:
    """Stage-wise alphabet ``I_N = I_{N-1} u {m_N, ..., K_N}``.

    Each block length is chosen so that the certified bracket of
    ``lambda_delta(I_N)`` lies in ``[1 - 2^-(N-1), 1 - 2^-N)``; ``m_N``
    satisfies the growth condition exactly (integer comparison) and the
    jump bound with ``margin`` extra halvings.
    """
    if not 0 < delta <= 0.5:
        raise ValueError("build_liouville_set needs 0 < delta <= 1/2: the stage windows are only "
                         "reachable when sum (1/(i+1))^(2 delta) diverges")
    log = AuditLog()
    blocks: list[Block] = []
    done: list[LiouvilleStage] = []
    prev_max = 0
    for n in range(1, stages + 1):
        m = stage_start(n, prev_max, delta, margin)
        w_lo, w_hi = 1 - 2.0 ** -(n - 1), 1 - 2.0 ** -n
        log.add(n, m, None, "stage-start", growth_exponent=n * 4 ** n,
                prev_max=describe_int(prev_max))

        def lam_for(length: int, cells: int) -> Bracket:
            I = IndexSet("liouville", {"delta": delta, "stage": n}, blocks=blocks + [Block(m, length)])
            return lambda_bracket(I, delta, method="cw", target_width=2.0 ** -(n + 8),
                                  max_cells=cells)

        # bisect the block length in log space toward the window centre
        centre = 0.5 * (w_lo + w_hi)
        band = (w_lo + 0.25 * (w_hi - w_lo), w_hi - 0.25 * (w_hi - w_lo))
        lo_log, hi_log = 0.0, 2 * delta * math.log(2 * m) + 1.0
        chosen = fallback = None
        cells = max_cells
        for step in range(max_steps):
            mid = 0.5 * (lo_log + hi_log) if step else 0.0
            length = _length_from_log(mid)
            b = lam_for(length, cells)
            log.add(n, length, b, "probe", depth=cells, log_length=mid)
            if b.lo >= w_lo and b.hi < w_hi:
                fallback = (length, b)
                if b.lo >= band[0] and b.hi < band[1]:
                    chosen = fallback
                    break
            if b.hi < centre:
                lo_log = mid
            elif b.lo > centre:
                hi_log = mid
            elif fallback is not None:
                chosen = fallback
                break
            else:
                cells *= 2
            if hi_log - lo_log < 1e-12 * max(1.0, hi_log):
                break
        chosen = chosen or fallback
        if chosen is None:
            log.add(n, m, None, "stage-failed", certified=False)
            raise ConstructionError(f"stage {n}: no block length certified inside the window")
        length, b = chosen
        blocks.append(Block(m, length))
        stage = LiouvilleStage(n, m, length, b, (w_lo, w_hi))
        done.append(stage)
        log.add(n, stage.last, b, "stage-done", window_lo=w_lo, window_hi=w_hi,
                m=describe_int(m), length=describe_int(length))
        prev_max = stage.last
    I = IndexSet("liouville", {"delta": delta, "stage": stages}, blocks=blocks)
    return LiouvilleResult(I, log, delta, done)


def check_stage_inequalities(res: LiouvilleResult) -> list[dict]:
    """Re-verify both stage-start inequalities and the windows from the stored stages."""
    out = []
    prev = 0
    for st in res.stages:
        growth_ok = 1 + st.m >= _pow_int(1 + prev, st.n * 4 ** st.n)
        jump = 2 * res.delta * (math.log(2) - math.log(st.m + 2))
        jump_ok = jump <= -st.n * math.log(2)
        lo, hi = st.window
        window_ok = st.lam.lo >= lo and st.lam.hi < hi
        out.append({"stage": st.n, "growth": growth_ok, "jump": jump_ok, "window": window_ok,
                    "increasing": st.last > prev})
        prev = st.last
    return out
