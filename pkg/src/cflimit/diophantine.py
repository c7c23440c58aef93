"""psi-approximability tests on digit paths, the (weiss) / (KLW) series
classifiers and the Monte-Carlo harnesses for the Khinchine-type and
extremality statements.

Indexing follows ``x = [0; omega_0, omega_1, ...]`` with ``q_0 = 1`` and
``q_{n+1} = omega_n q_n + q_{n-1}``, so the digit ``omega_n`` is compared
with the denominator ``q_n`` built from the digits before it.  Every
"infinitely many n" statement is reported as a count at a declared horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .contfrac import _check_digit
from .measure import BURN_IN, ConformalContext, SampleBatch, _is_huge, _log_int, sample_batch

FAMILIES = ("power", "scaled", "log", "custom")
SERIES_HORIZON = 10 ** 7
_CHUNK = 1 << 20


class HypothesisError(ValueError):
    """An approximation function violates the hypothesis of the operation."""


# -- approximation functions ------------------------------------------------------


@dataclass(frozen=True)
class ApproxFn:
    """``psi(q)`` from a named family; ``phi(q) = 1 / (q^2 psi(q))``.

    * ``power(c)``: ``psi = q^-(2+c)``, ``phi = q^c``
    * ``scaled(eps)``: ``psi = eps q^-2``, ``phi = 1/eps``
    * ``log(alpha)``: ``psi = 1 / (q^2 log^(1/alpha) q)``; ``log q`` is read as
      ``max(1, log q)`` so that ``phi >= 1`` also for ``q < e``
    * ``custom``: ``psi(q)`` tabulated for ``q = 1..len(table)``
    """

    family: str
    param: float = 0.0
    table: tuple = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == "custom":
            if not self.table or any(not (v > 0) for v in self.table):
                raise ValueError("custom table needs positive values")
        elif self.family == "power" and self.param < 0:
            raise ValueError("power(c) needs c >= 0")
        elif self.family in ("scaled", "log") and not self.param > 0:
            raise ValueError(f"{self.family} needs a positive parameter")

    @classmethod
    def power(cls, c: float) -> "ApproxFn":
        return cls("power", float(c))

    @classmethod
    def scaled(cls, eps: float) -> "ApproxFn":
        return cls("scaled", float(eps))

    @classmethod
    def log(cls, alpha: float) -> "ApproxFn":
        return cls("log", float(alpha))

    @classmethod
    def custom(cls, values: Sequence[float]) -> "ApproxFn":
        return cls("custom", 0.0, tuple(float(v) for v in values))

    @classmethod
    def parse(cls, text: str) -> "ApproxFn":
        """``power:0.5``, ``scaled:0.1``, ``log:0.7`` or ``power(0.5)``."""
        t = text.strip().replace("(", ":").rstrip(")")
        name, _, arg = t.partition(":")
        if name not in ("power", "scaled", "log"):
            raise ValueError(f"cannot parse approximation function {text!r}")
        return cls(name, float(arg))

    @property
    def tag(self) -> str:
        if self.family == "custom":
            return f"custom[{len(self.table)}]"
        return f"{self.family}({self.param:g})"

    def as_dict(self) -> dict:
        d = {"family": self.family, "param": self.param}
        if self.family == "custom":
            d["table_size"] = len(self.table)
        return d

    # -- values ----------------------------------------------------------------
    def log_phi(self, log_q):
        """``log phi`` as a function of ``log q`` (vectorized; custom needs ``q`` itself)."""
        L = np.asarray(log_q, dtype=float)
        if self.family == "power":
            return self.param * L
        if self.family == "scaled":
            return np.full_like(L, -math.log(self.param))
        if self.family == "log":
            return np.log(np.maximum(1.0, L)) / self.param
        raise HypothesisError("custom tables are defined on integers; use log_phi_int")

    def log_phi_int(self, q: int) -> float:
        q = int(q)
        if self.family == "custom":
            if q > len(self.table):
                raise HypothesisError(f"custom table ends at q = {len(self.table)}")
            return -2.0 * math.log(q) - math.log(self.table[q - 1])
        return float(self.log_phi(_log_int(q)))

    def phi_exact(self, q: int):
        """``phi(q)`` as an exact rational when the family allows it, else ``None``."""
        if self.family == "power" and float(self.param).is_integer():
            return Fraction(int(q) ** int(self.param))
        if self.family == "scaled":
            return 1 / Fraction(self.param)
        return None

    def psi(self, q: int) -> float:
        return math.exp(-2.0 * _log_int(int(q)) - self.log_phi_int(q))

    # -- hypotheses ------------------------------------------------------------
    def capped(self) -> bool:
        """``psi(q) <= q^-2`` everywhere, i.e. ``phi >= 1``."""
        if self.family == "scaled":
            return self.param <= 1
        if self.family == "custom":
            return all(v * q * q <= 1 for q, v in enumerate(self.table, 1))
        return True

    def q2psi_nonincreasing(self) -> bool:
        if self.family == "custom":
            w = [v * q * q for q, v in enumerate(self.table, 1)]
            return all(b <= a for a, b in zip(w, w[1:]))
        return True


def _require_cap(psi: ApproxFn) -> None:
    if not psi.capped():
        raise HypothesisError(f"{psi.tag} exceeds q^-2 somewhere (phi < 1)")


def _require_monotone(psi: ApproxFn) -> None:
    if not psi.q2psi_nonincreasing():
        raise HypothesisError(f"q^2 psi(q) is not nonincreasing for {psi.tag}")


def _log_digit(d) -> float:
    return _log_int(d) if _is_huge(d) else math.log(d)


def _eta(d) -> float:
    return _log_int(d) if _is_huge(d) else math.log1p(d)


# -- witnesses on one path ---------------------------------------------------------


@dataclass(frozen=True)
class WitnessRecord:
    """``omega_n`` against a threshold; ``margin = omega_n - threshold >= 0``.

    For huge values ``margin`` is a float (possibly ``inf``); ``log_margin``
    is ``log omega_n - log threshold`` (psi form) or ``eta_n - c S_n`` (eta form).
    """

    n: int
    digit: int
    threshold: float
    margin: float
    log_margin: float

    def as_dict(self) -> dict:
        d = int(self.digit)
        return {"n": self.n, "digit": d if d < 2 ** 53 else str(self.digit), "threshold": self.threshold,
                "margin": self.margin, "log_margin": self.log_margin}


def _float_or_inf(x) -> float:
    try:
        return float(x)
    except OverflowError:
        return math.inf if x > 0 else -math.inf


def psi_witnesses(digits: Sequence[int], psi: ApproxFn, K: float, depth: Optional[int] = None) -> list[WitnessRecord]:
    """All ``n < depth`` with ``omega_n >= K phi(q_n)``, using exact ``q_n``."""
    _require_cap(psi)
    if not K > 0:
        raise ValueError("K must be positive")
    digits = list(digits)
    depth = len(digits) if depth is None else min(depth, len(digits))
    Kf = Fraction(K)
    logK = math.log(K)
    out = []
    q_prev, q = 0, 1
    for n in range(depth):
        d = digits[n]
        w = int(d) if not _is_huge(d) else d
        if not _is_huge(w):
            _check_digit(w)
        ph = psi.phi_exact(q)
        if ph is not None and not _is_huge(w):
            thr = Kf * ph
            ok = w >= thr
            margin = _float_or_inf(w - thr)
            log_margin = _log_digit(w) - (logK + psi.log_phi_int(q))
            thr_f = _float_or_inf(thr)
        else:
            lt = logK + psi.log_phi_int(q)
            log_margin = _log_digit(w) - lt
            ok = log_margin >= 0
            thr_f = math.exp(lt) if lt < 709 else math.inf
            margin = _float_or_inf(int(w)) - thr_f if not _is_huge(w) else math.inf
        if ok:
            out.append(WitnessRecord(n, w, thr_f, margin, log_margin))
        q_prev, q = q, int(w) * q + q_prev
    return out


@dataclass
class VWAResult:
    """Indices ``n < depth`` with ``eta_n >= c sum_{j<n} eta_j``, per ``c``."""

    depth: int
    c_grid: list
    witnesses: dict          # c -> list of n

    @property
    def counts(self) -> dict:
        return {c: len(v) for c, v in self.witnesses.items()}

    def as_dict(self) -> dict:
        return {"horizon": self.depth, "c_grid": self.c_grid,
                "counts": {repr(c): len(v) for c, v in self.witnesses.items()},
                "witnesses": {repr(c): v for c, v in self.witnesses.items()}}


def _eta_array(digits: Sequence[int], depth: Optional[int]) -> np.ndarray:
    digits = list(digits)
    if depth is not None:
        digits = digits[:depth]
    return np.array([_eta(d) for d in digits], dtype=float)


def _prefix_sums(eta: np.ndarray) -> np.ndarray:
    """``S_n = sum_{j<n} eta_j`` along the last axis."""
    s = np.cumsum(eta, axis=-1)
    return np.concatenate([np.zeros(eta.shape[:-1] + (1,)), s[..., :-1]], axis=-1)


def vwa_test(digits: Sequence[int], c_grid: Sequence[float], depth: Optional[int] = None) -> VWAResult:
    eta = _eta_array(digits, depth)
    if len(eta) < 2:
        raise ValueError("depth must be >= 2")
    S = _prefix_sums(eta)
    wit = {float(c): [int(n) for n in np.nonzero(eta >= c * S)[0]] for c in c_grid}
    return VWAResult(len(eta), [float(c) for c in c_grid], wit)


@dataclass
class LiouvilleResult:
    """Ratios ``eta_n / sum_{j<n} eta_j`` for ``n >= 1``.

    ``running_max[n-1]`` is the largest ratio up to ``n`` (the largest ``c``
    with a witness in that prefix); ``tail_sup[n-1]`` is the largest ratio at
    indices ``>= n`` within the horizon.
    """

    depth: int
    c_max: float
    ratios: np.ndarray
    running_max: np.ndarray
    tail_sup: np.ndarray

    @property
    def max_ratio(self) -> float:
        return float(self.running_max[-1]) if len(self.running_max) else 0.0

    @property
    def liouville_at_horizon(self) -> bool:
        return self.max_ratio > self.c_max

    def first_exceeding(self, c: float) -> Optional[int]:
        hit = np.nonzero(self.ratios > c)[0]
        return int(hit[0]) + 1 if len(hit) else None

    def as_dict(self) -> dict:
        return {"horizon": self.depth, "c_max": self.c_max, "max_ratio": self.max_ratio,
                "liouville_at_horizon": self.liouville_at_horizon,
                "running_max": self.running_max.tolist(), "tail_sup": self.tail_sup.tolist()}


def _ratios(eta: np.ndarray) -> np.ndarray:
    S = _prefix_sums(eta)[..., 1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(S > 0, eta[..., 1:] / np.where(S > 0, S, 1.0), np.inf)


def liouville_test(digits: Sequence[int], c_max: float, depth: Optional[int] = None) -> LiouvilleResult:
    eta = _eta_array(digits, depth)
    if len(eta) < 2:
        raise ValueError("depth must be >= 2")
    r = _ratios(eta)
    run = np.maximum.accumulate(r)
    tail = np.maximum.accumulate(r[::-1])[::-1]
    return LiouvilleResult(len(eta), float(c_max), r, run, tail)


def vwa_psi_slack(digits: Sequence[int], n: int, c: float) -> dict:
    """Explicit slack for "vwa witness at (n, c) => psi witness at n for power(c), K = 1/2".

    ``omega_n >= e^(eta_n) / 2`` and ``log q_n <= sum_{j<n} eta_j`` give
    ``log omega_n - log(1/2) - c log q_n >= (eta_n - c S_n) + s1 + c s2``
    with ``s1 = log(2 omega_n) - eta_n >= 0`` and ``s2 = S_n - log q_n >= 0``.
    """
    digits = list(digits)[: n + 1]
    eta = _eta_array(digits, None)
    S = float(np.sum(eta[:n]))
    q_prev, q = 0, 1
    for d in digits[:n]:
        q_prev, q = q, int(d) * q + q_prev
    w = digits[n]
    log_w = _log_digit(w)
    s1 = math.log(2) + log_w - eta[n]
    s2 = S - _log_int(q)
    psi_margin = log_w + math.log(2) - c * _log_int(q)
    return {"vwa_margin": float(eta[n] - c * S), "s1": s1, "s2": s2,
            "psi_log_margin": psi_margin, "implied_lower": float(eta[n] - c * S) + s1 + c * s2}


# -- series classifiers ------------------------------------------------------------


@dataclass
class SeriesResult:
    verdict: str             # diverges | converges | undetermined
    reason: str
    trace: list = field(default_factory=list)   # (N, partial sum)

    def as_dict(self) -> dict:
        return {"verdict": self.verdict, "reason": self.reason,
                "trace": [[n, s] for n, s in self.trace]}


def _trace_points(horizon: int) -> list[int]:
    pts, p = [], 10
    while p < horizon:
        pts.append(p)
        p *= 10
    return pts + [horizon]


def _partial_sums(log_term, horizon: int) -> list:
    # sum_{q=1}^{N} exp(log_term(q)) recorded at N = 10, 100, ..., horizon
    pts = _trace_points(horizon)
    out, total, start = [], 0.0, 1
    for N in pts:
        while start <= N:
            stop = min(N, start + _CHUNK - 1)
            q = np.arange(start, stop + 1, dtype=float)
            total += math.fsum(np.exp(log_term(q)))
            start = stop + 1
        out.append((N, total))
    return out


def _weiss_log_term(psi: ApproxFn, alpha: float):
    if psi.family == "custom":
        tab = np.array(psi.table)
        return lambda q: (2 * alpha - 1) * np.log(q) + alpha * np.log(tab[q.astype(int) - 1])
    return lambda q: (2 * alpha - 1) * np.log(q) + alpha * (-2 * np.log(q) - psi.log_phi(np.log(q)))


def classify_weiss_series(psi: ApproxFn, alpha: float, horizon: int = SERIES_HORIZON) -> SeriesResult:
    """``sum_q q^(2 alpha - 1) psi(q)^alpha``; the terms are ``1 / (q phi(q)^alpha)``."""
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    f = psi.family
    if f == "power":
        e = psi.param * alpha
        verdict = "converges" if e > 0 else "diverges"
        reason = f"p-series with exponent 1 + {e:g}"
    elif f == "scaled":
        verdict, reason = "diverges", f"harmonic series times {psi.param ** alpha:g}"
    elif f == "log":
        e = alpha / psi.param
        verdict = "diverges" if e <= 1 else "converges"
        reason = f"Bertrand series 1/(q log^{e:g} q)"
    else:
        horizon = min(horizon, len(psi.table))
        verdict, reason = "undetermined", "custom table; no information beyond the table"
    return SeriesResult(verdict, reason, _partial_sums(_weiss_log_term(psi, alpha), horizon))


def classify_klw_series(psi: ApproxFn, horizon: int = SERIES_HORIZON) -> SeriesResult:
    """``sum_q q psi(q)``, which is the weiss series at ``alpha = 1``."""
    return classify_weiss_series(psi, 1.0, horizon)


def condensed_series(psi: ApproxFn, h: float, gamma: float, n_max: int) -> SeriesResult:
    """Partial sums of ``sum_{n=0}^{n_max} phi(gamma^n)^(-h)``."""
    if not gamma > 1 or not h > 0:
        raise ValueError("need gamma > 1 and h > 0")
    n = np.arange(n_max + 1, dtype=float)
    L = n * math.log(gamma)
    if psi.family == "custom":
        q = np.round(np.exp(L)).astype(float)
        ok = q <= len(psi.table)
        lp = np.array([psi.log_phi_int(int(v)) for v in q[ok]])
        terms = np.exp(-h * lp)
        verdict, reason = "undetermined", "custom table; no information beyond the table"
    else:
        terms = np.exp(-h * psi.log_phi(L))
        if psi.family == "power":
            verdict = "converges" if psi.param > 0 else "diverges"
            reason = f"geometric with ratio gamma^-{psi.param * h:g}"
        elif psi.family == "scaled":
            verdict, reason = "diverges", "constant terms"
        else:
            e = h / psi.param
            verdict = "diverges" if e <= 1 else "converges"
            reason = f"p-series 1/(n log gamma)^{e:g}"
    cs = np.cumsum(terms)
    pts = sorted(set([int(p) for p in np.unique(np.geomspace(1, len(cs), 24).astype(int))] + [len(cs)]))
    return SeriesResult(verdict, reason, [(p - 1, float(cs[p - 1])) for p in pts])


# -- experiments ------------------------------------------------------------------


def _log_omega(batch: SampleBatch) -> np.ndarray:
    # log_digit holds log(omega) for every entry, huge or not
    return batch.log_digit


def _first_true(mask: np.ndarray) -> np.ndarray:
    """Index of the first True per row, or the row length if none."""
    any_ = mask.any(axis=1)
    return np.where(any_, mask.argmax(axis=1), mask.shape[1])


def _survival(first: np.ndarray, depth: int) -> np.ndarray:
    # fraction of rows with first >= n for n = 0..depth
    counts = np.bincount(np.minimum(first, depth), minlength=depth + 1)
    alive = len(first) - np.concatenate([[0], np.cumsum(counts)[:-1]])
    return alive / len(first)


def resolve_prefix(depth: int, prefix: Optional[int]) -> int:
    """Stabilization prefix: the first tenth of the path unless given."""
    return depth // 10 if prefix is None else int(prefix)


@dataclass
class GammaCurve:
    gamma: int
    survival: np.ndarray     # fraction in S^+_{psi,n,K}, n = 0..depth
    bound: np.ndarray        # prod_{m<n} (1 - K2 phi(gamma^m)^-h)
    K2: float
    tail_constant: float

    def as_dict(self) -> dict:
        return {"gamma": self.gamma, "K2": self.K2, "tail_constant": self.tail_constant,
                "survival": self.survival.tolist(), "bound": self.bound.tolist()}


@dataclass
class KhinchineResult:
    psi: ApproxFn
    K: float
    depth: int
    n_samples: int
    h: float
    E: float
    E_stderr: float
    prefix: int
    curves: dict             # "gamma", "gamma-1", "gamma+1" -> GammaCurve
    lemma_survival: np.ndarray   # no omega_j >= K phi(q_j) for j < n
    witness_after_prefix: float  # fraction with some omega_n >= K phi(q_n), n >= prefix
    seed: int
    stream: int
    burn_in: int
    rejections: int
    bias_events: int

    @property
    def main(self) -> GammaCurve:
        return self.curves["gamma"]

    @property
    def survival(self) -> np.ndarray:
        return self.main.survival

    @property
    def bound(self) -> np.ndarray:
        return self.main.bound

    def as_dict(self, full: bool = True) -> dict:
        d = {
            "config": {"experiment": "khinchine", "psi": self.psi.as_dict(), "K": self.K,
                       "depth": self.depth, "n_samples": self.n_samples, "h": self.h,
                       "prefix": self.prefix, "seed": self.seed, "stream": self.stream,
                       "burn_in": self.burn_in},
            "E": self.E, "E_stderr": self.E_stderr, "gamma": self.main.gamma,
            "final_survival": float(self.survival[-1]), "final_bound": float(self.bound[-1]),
            "witness_after_prefix": self.witness_after_prefix,
            "rejections": self.rejections, "bias_events": self.bias_events,
        }
        if full:
            d["curves"] = {k: c.as_dict() for k, c in self.curves.items()}
            d["lemma_survival"] = self.lemma_survival.tolist()
        return d


def birkhoff_eta(batch: SampleBatch) -> tuple[float, float]:
    """``E = int eta d mu`` as the Birkhoff mean of ``eta`` over the sampled paths."""
    per = np.mean(batch.eta(), axis=1)
    se = float(np.std(per, ddof=1) / math.sqrt(len(per))) if len(per) > 1 else math.nan
    return float(np.mean(per)), se


def gamma_from_E(E: float) -> int:
    if E > 700:
        raise HypothesisError(f"E = {E:g} is too large for gamma = 1 + ceil(e^E)")
    return 1 + math.ceil(math.exp(E))


def fit_K2(ctx: ConformalContext, psi: ApproxFn, K: float, gamma: int, depth: int,
           points: int = 48) -> tuple[float, float]:
    """``K2 = 4^-h K^-h c`` with ``c = min_n k_n^h sum_{i > k_n} i^(-2h)`` over sampled ``n``.

    ``k_n = K phi(gamma^n)``; the minimum runs over log-spaced ``n < depth``.
    """
    h = ctx.h
    ns = np.unique(np.concatenate([[0], np.geomspace(1, max(1, depth - 1), points).astype(int)]))
    lphi = psi.log_phi(ns * math.log(gamma))
    c = math.inf
    for lp in lphi:
        lk = math.log(K) + float(lp)
        k = int(math.exp(lk)) if lk < 700 else 1 << int(lk / math.log(2))
        lo, _ = ctx.I.tail_bounds(k, h)
        if lo <= 0:
            c = 0.0
            break
        c = min(c, math.exp(math.log(lo) + h * lk))
    return 4.0 ** (-h) * K ** (-h) * c, c


def _gamma_curve(ctx: ConformalContext, psi: ApproxFn, K: float, gamma: int, log_w: np.ndarray) -> GammaCurve:
    R, D = log_w.shape
    thr = math.log(K) + psi.log_phi(np.arange(D) * math.log(gamma))
    first = _first_true(log_w > thr[None, :])
    surv = _survival(first, D)
    K2, c = fit_K2(ctx, psi, K, gamma, D)
    f = 1.0 - K2 * np.exp(-ctx.h * psi.log_phi(np.arange(D) * math.log(gamma)))
    bound = np.concatenate([[1.0], np.cumprod(np.clip(f, 0.0, 1.0))])
    return GammaCurve(gamma, surv, bound, K2, c)


def khinchine_experiment(ctx: ConformalContext, psi: ApproxFn, K: float, depth: int, n_samples: int,
                         stream: int = 0, burn_in: int = BURN_IN, prefix: Optional[int] = None,
                         batch: Optional[SampleBatch] = None) -> KhinchineResult:
    """Survival in ``S^+_{psi,n,K} = {omega_j <= K phi(gamma^j) for j < n}`` against the product bound."""
    _require_monotone(psi)
    _require_cap(psi)
    if psi.family == "custom":
        raise HypothesisError("experiments need a named family")
    if batch is None:
        batch = sample_batch(ctx, depth, n_samples, burn_in=burn_in, stream=stream)
    depth = batch.depth
    E, se = birkhoff_eta(batch)
    gamma = gamma_from_E(E)
    log_w = _log_omega(batch)
    curves = {"gamma": _gamma_curve(ctx, psi, K, gamma, log_w),
              "gamma+1": _gamma_curve(ctx, psi, K, gamma + 1, log_w)}
    if gamma - 1 > 1:
        curves["gamma-1"] = _gamma_curve(ctx, psi, K, gamma - 1, log_w)
    lq = np.concatenate([np.zeros((batch.n_samples, 1)), batch.log_q()[:, :-1]], axis=1)
    wit = log_w >= math.log(K) + psi.log_phi(lq)
    lemma = _survival(_first_true(wit), depth)
    p = resolve_prefix(depth, prefix)
    after = float(np.mean(wit[:, p:].any(axis=1))) if p < depth else 0.0
    return KhinchineResult(psi, float(K), depth, batch.n_samples, ctx.h, E, se, p, curves, lemma, after,
                           ctx.seed, stream, batch.burn_in, batch.rejections, batch.bias_events)


def trend_majorized(survival: np.ndarray, bound: np.ndarray, n_samples: int, start: int = 1,
                    points: int = 32, z: float = 3.0) -> tuple[bool, list]:
    """Whether the empirical decay after ``start`` is no slower than the bound's.

    Compares ``S(n) / S(start)`` with ``B(n) / B(start)`` on log-spaced ``n``,
    allowing ``z`` binomial standard errors of ``S(n)``.
    """
    D = len(survival) - 1
    if survival[start] <= 0:
        return True, []
    ns = np.unique(np.geomspace(start, D, points).astype(int))
    rows, ok = [], True
    for n in ns:
        s = survival[n] / survival[start]
        b = bound[n] / bound[start] if bound[start] > 0 else 0.0
        sd = math.sqrt(max(survival[n] * (1 - survival[n]), 1.0 / n_samples) / n_samples) / survival[start]
        good = s <= b + z * sd
        ok &= bool(good)
        rows.append({"n": int(n), "empirical": float(s), "bound": float(b), "slack": z * sd, "ok": bool(good)})
    return ok, rows


@dataclass
class ExtremalityResult:
    c_grid: list
    fractions: dict          # c -> fraction of samples with a vwa witness at n >= prefix
    depth: int
    n_samples: int
    prefix: int
    h: float
    seed: int
    stream: int
    burn_in: int

    def as_dict(self) -> dict:
        return {"config": {"experiment": "extremality", "c_grid": self.c_grid, "depth": self.depth,
                           "n_samples": self.n_samples, "prefix": self.prefix, "h": self.h,
                           "seed": self.seed, "stream": self.stream, "burn_in": self.burn_in},
                "fractions": {repr(c): f for c, f in self.fractions.items()}}


def extremality_experiment(ctx: ConformalContext, c_grid: Sequence[float], depth: int, n_samples: int,
                           stream: int = 0, burn_in: int = BURN_IN, prefix: Optional[int] = None,
                           batch: Optional[SampleBatch] = None) -> ExtremalityResult:
    if batch is None:
        batch = sample_batch(ctx, depth, n_samples, burn_in=burn_in, stream=stream)
    eta = batch.eta()
    S = _prefix_sums(eta)
    p = resolve_prefix(batch.depth, prefix)
    fr = {}
    for c in c_grid:
        hit = (eta[:, p:] >= c * S[:, p:]).any(axis=1)
        fr[float(c)] = float(np.mean(hit))
    return ExtremalityResult([float(c) for c in c_grid], fr, batch.depth, batch.n_samples, p, ctx.h,
                             ctx.seed, stream, batch.burn_in)


def liouville_fraction(batch: SampleBatch, c: float) -> tuple[float, np.ndarray]:
    """Fraction of samples whose ratio running max exceeds ``c`` within the batch depth."""
    r = _ratios(batch.eta())
    m = r.max(axis=1)
    return float(np.mean(m > c)), m
