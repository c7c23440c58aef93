"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

The lines are printed as the tests run and repeated in the pytest terminal
summary.  Every random choice uses the package default seed 0.
"""

import json
import math
import time

import gmpy2
import numpy as np
import pytest
from scipy import integrate

from cflimit.cli import main as cli_main
from cflimit.contfrac import DigitWord, distortion_ratio, evaluate, log_q_bounds_check, log_q_bounds_exact
from cflimit.diophantine import (
    ApproxFn,
    classify_klw_series,
    classify_weiss_series,
    condensed_series,
    extremality_experiment,
    khinchine_experiment,
    liouville_fraction,
    trend_majorized,
)
from cflimit.indexsets import (
    build_I_delta,
    build_liouville_set,
    check_c1,
    check_stage_inequalities,
    finite,
    full,
    make_geometric,
)
from cflimit.measure import (
    ConformalContext,
    decay_probe,
    geometric_witness_balls,
    lyapunov_estimate,
    sample_batch,
    series_estimate,
)
from cflimit.pressure import bowen_dimension, kz_increment_bounds, lambda_bracket
from cflimit.transfer import transfer_lambda

SEED = 0


@pytest.fixture(scope="module")
def liouville4():
    return build_liouville_set(0.4, 4)


@pytest.fixture(scope="module")
def idelta():
    return build_I_delta(0.7)


@pytest.fixture(scope="module")
def geometric_ctx():
    return ConformalContext.build(make_geometric(2), seed=SEED)


def random_words(rng, count, max_digit, max_len):
    lengths = rng.integers(1, max_len + 1, size=count)
    return [[int(d) for d in rng.integers(1, max_digit + 1, size=n)] for n in lengths]


def cli_json(capsys, *argv):
    code = cli_main(list(argv) + ["--no-timestamp"])
    return code, json.loads(capsys.readouterr().out)


def test_criterion_01_exact_identities(record):
    rng = np.random.default_rng(SEED)
    words = random_words(rng, 10_000, 100, 30)
    t0 = time.perf_counter()
    bad = {"unimodular": 0, "distortion": 0, "qn_bounds": 0}
    for ds in words:
        w = DigitWord.from_digits(ds)
        if abs(w.determinant) != 1:
            bad["unimodular"] += 1
        if distortion_ratio(w) > 4:
            bad["distortion"] += 1
        lo, hi = log_q_bounds_check(w)
        if lo < 0 or hi < 0 or not log_q_bounds_exact(w):
            bad["qn_bounds"] += 1
    dt = time.perf_counter() - t0
    ok = sum(bad.values()) == 0 and dt <= 10
    assert record(1, "exact identities on 10^4 words", ok, f"violations {bad}, {dt:.2f} s (limit 10 s)")


def test_criterion_02_convergent_bounds(record):
    rng = np.random.default_rng(SEED)
    heads = random_words(rng, 1000, 100, 30)
    tails = random_words(rng, 1000, 100, 10)
    violations = 0
    for ds, tl in zip(heads, tails):
        with gmpy2.context(precision=256):
            irr = (gmpy2.sqrt(gmpy2.mpfr(5)) - 1) / 2
            # x = [0; ds, tl, golden tail], so the next digit after ds is tl[0]
            y = evaluate(tl, tail=irr, precision=256)
        w = DigitWord.from_digits(ds)
        q_next = tl[0] * w.q_cur + w.q_prev
        # |x - p/q| is about q^-2, so the subtraction needs 2 log2 q bits beyond the tail's 256
        prec = 256 + 2 * q_next.bit_length() + 64
        with gmpy2.context(precision=prec):
            x = evaluate(ds, tail=y, precision=prec)
            err = abs(x - gmpy2.mpfr(w.p_cur) / w.q_cur)
            if not 1 / gmpy2.mpfr(w.q_cur * (w.q_cur + q_next)) < err < 1 / gmpy2.mpfr(w.q_cur * q_next):
                violations += 1
    assert record(2, "convergent bounds at 256 bits on 10^3 points", violations == 0,
                  f"{violations} violations")


def test_criterion_03_pressure_sanity(record, capsys):
    t0 = time.perf_counter()
    code, doc = cli_json(capsys, "dim", "--set", "full", "--tol", "0.05")
    t_full = time.perf_counter() - t0
    r = doc["result"]
    full_ok = code == 0 and r["lo"] <= 1.0 <= r["hi"] and r["hi"] - r["lo"] <= 0.05 and t_full <= 120
    t0 = time.perf_counter()
    code1, doc1 = cli_json(capsys, "dim", "--set", "1")
    t_one = time.perf_counter() - t0
    r1 = doc1["result"]
    one_ok = code1 == 0 and r1["lo"] <= 0.0 <= r1["hi"] and t_one <= 120
    detail = (f"full [{r['lo']:.4f}, {r['hi']:.4f}] in {t_full:.1f} s; "
              f"{{1}} [{r1['lo']:.3g}, {r1['hi']:.3g}] in {t_one:.1f} s")
    assert record(3, "dim brackets for full and {1}", full_ok and one_ok, detail)


def test_criterion_04_dimension_of_1_2(record):
    t0 = time.perf_counter()
    I = finite([1, 2])
    res = bowen_dimension(I, tol=0.02)
    mid = float(res.bracket.mid)
    lam = lambda_bracket(I, mid)
    eig = transfer_lambda(I, mid).eigenvalue
    dt = time.perf_counter() - t0
    ok = res.bracket.lo_float > 0.5 and lam.lo_float <= eig <= lam.hi_float and dt <= 300
    detail = (f"HD bracket [{res.bracket.lo_float:.4f}, {res.bracket.hi_float:.4f}]; at t={mid:.5f} "
              f"transfer {eig:.9f} in certified [{lam.lo_float:.9f}, {lam.hi_float:.9f}]; {dt:.1f} s")
    assert record(4, "HD(J_{1,2}) > 1/2 with transfer cross-check", ok, detail)


def test_criterion_05_kz_property(record):
    rng = np.random.default_rng(SEED)
    contradictions, worst = [], math.inf
    for _ in range(100):
        i = int(rng.integers(2, 51))
        pool = [v for v in range(1, 61) if v != i]
        size = int(rng.integers(1, 6))
        I = sorted(int(v) for v in rng.choice(pool, size=size, replace=False))
        d = float(rng.uniform(0.3, 1.0))
        base = lambda_bracket(finite(I), d)
        new = lambda_bracket(finite(I + [i]), d)
        lo, hi = kz_increment_bounds(i, d)
        tol = (base.hi_float - base.lo_float) + (new.hi_float - new.lo_float)
        # slack of the two inequalities as far as the brackets allow
        left = new.hi_float - (base.lo_float + lo) + tol
        right = base.hi_float + hi - new.lo_float + tol
        worst = min(worst, left, right)
        if left < 0 or right < 0:
            contradictions.append((I, i, d))
    assert record(5, "KZ increment window on 100 random cases", not contradictions,
                  f"{len(contradictions)} contradictions, smallest slack {worst:.3g}")


def test_criterion_06_transfer_exactness(record):
    r = transfer_lambda(full(), 1.0)
    gauss = 1.0 / ((1.0 + r.nodes) * math.log(2))
    e_err = abs(r.eigenvalue - 1)
    f_err = float(np.max(np.abs(r.values - gauss)))
    ok = e_err <= 1e-6 and f_err <= 1e-6
    assert record(6, "transfer operator for the Gauss map", ok,
                  f"|lambda - 1| = {e_err:.2e}, sup |h - 1/((1+x) log 2)| = {f_err:.2e} on {len(r.nodes)} nodes")


def test_criterion_07_lyapunov(record, liouville4):
    oracle, _ = integrate.quad(lambda x: -2 * math.log(x) / ((1 + x) * math.log(2)), 0, 1, limit=200)
    ctx = ConformalContext.build(full(), h=1.0, seed=SEED)
    r = lyapunov_estimate(ctx, 10 ** 6, replicas=1000)
    rel = abs(r.birkhoff - oracle) / oracle
    gauss_ok = rel <= 0.01
    # series estimate on the Liouville alphabet as T doubles from 2 past the stage-3 maximum
    I = liouville4.set
    top = liouville4.maxima()[2].bit_length() + 2
    vals = np.array([series_estimate(I, 0.4, 1 << k).lo_float for k in range(1, top + 1)])
    monotone = bool(np.all(np.diff(vals) >= 0))
    stage = [series_estimate(I, 0.4, M).lo_float for M in liouville4.maxima()]
    inc = np.diff([0.0] + stage)
    # no stabilization: every stage adds more than the one before
    growing = bool(np.all(np.diff(inc) > 0))
    ok = gauss_ok and monotone and growing
    detail = (f"Birkhoff {r.birkhoff:.5f} +- {r.stderr:.5f} vs quadrature {oracle:.6f} (rel {rel:.2e}); "
              f"Liouville series nondecreasing over {len(vals)} doublings: {monotone}, "
              f"stage sums {', '.join(f'{s:.4g}' for s in stage)}")
    assert record(7, "Lyapunov exponent and the infinite-exponent signature", ok, detail)


def test_criterion_08_construction_conformance(record, liouville4, idelta, capsys):
    # Liouville audit: re-verified stage inequalities and the logged windows
    checks = check_stage_inequalities(liouville4)
    stage_ok = all(c["growth"] and c["jump"] and c["window"] and c["increasing"] for c in checks)
    done = liouville4.log.decisions("stage-done")
    logged_ok = len(done) == 4 and all(d["window_lo"] <= d["bracket_lo"] and d["bracket_hi"] < d["window_hi"]
                                       for d in done)
    # I_delta(0.7): exceptions to I_- within I within I_+ u I_- stay below the construction constants
    ex = idelta.exceptional_sets()
    star_ok = (all(v <= idelta.n2 for v in ex["minus_not_in_I"])
               and all(v < idelta.n1 for v in ex["I_not_in_plus_or_minus"]))
    c1 = check_c1(idelta.set, 0.7)
    c1_ok = c1.verdict == "pass" and c1.spread <= 64
    trunc = idelta.set.take(1000)
    dim = bowen_dimension(trunc, tol=0.01).bracket
    dim_ok = 0.63 <= dim.lo_float and dim.hi_float <= 0.77
    ok = stage_ok and logged_ok and star_ok and c1_ok and dim_ok
    detail = (f"liouville stages {stage_ok}/{logged_ok}; impliesstar exceptions "
              f"{len(ex['minus_not_in_I'])} (<= N2={idelta.n2}) and {len(ex['I_not_in_plus_or_minus'])} "
              f"(< N1={idelta.n1}): {star_ok}; c1 at h=0.7 {c1.verdict} with max/min {c1.spread:.1f} "
              f"(limit 64, witness {c1.witness}); dim of 10^3-element truncation "
              f"[{dim.lo_float:.4f}, {dim.hi_float:.4f}]")
    assert record(8, "construction conformance", ok, detail)


def test_criterion_09_khinchine(record, idelta):
    t0 = time.perf_counter()
    ctx = ConformalContext.build(idelta.set, seed=SEED, tol=1e-4)
    batch = sample_batch(ctx, 10 ** 4, 1000)
    div = khinchine_experiment(ctx, ApproxFn.log(ctx.h), 1.0, 0, 0, batch=batch)
    trend, _ = trend_majorized(div.survival, div.bound, div.n_samples)
    conv = khinchine_experiment(ctx, ApproxFn.power(0.5), 1.0, 0, 0, batch=batch)
    dt = time.perf_counter() - t0
    s_end = float(div.survival[-1])
    ok = s_end < 0.05 and trend and conv.witness_after_prefix <= 0.10 and dt <= 600
    detail = (f"h={ctx.h:.6f}, gamma={div.main.gamma}; (i) survival at 10^4 = {s_end:.3f} (need < 0.05), "
              f"bound {float(div.bound[-1]):.3f}, trend-majorized {trend}; "
              f"(ii) power(0.5) witnesses after prefix {conv.witness_after_prefix:.3f} (need <= 0.10); {dt:.0f} s")
    assert record(9, "Khinchine dichotomy on I_delta(0.7)", ok, detail)


def test_criterion_10_extremality_contrast(record, geometric_ctx, liouville4):
    ext = extremality_experiment(geometric_ctx, [1.0], 10 ** 4, 1000)
    geo = ext.fractions[1.0]
    ctx = ConformalContext.build(liouville4.set, h=0.4, seed=SEED)
    batch = sample_batch(ctx, 4 ** 3, 1000)
    frac, _ = liouville_fraction(batch, 2.0)
    ok = geo <= 0.05 and frac >= 0.90
    detail = (f"geometric(2) VWA fraction at c=1 {geo:.3f} (need <= 0.05); "
              f"Liouville alphabet running max > 2 in {frac:.3f} of samples at depth 64 (need >= 0.90)")
    assert record(10, "extremality contrast", ok, detail)


def test_criterion_11_series_table(record):
    H = 10 ** 5
    expected = []
    for c in (0.5, 1.0, 2.0):
        p = ApproxFn.power(c)
        expected += [(classify_weiss_series(p, 0.5, H).verdict, "converges"),
                     (classify_klw_series(p, H).verdict, "converges"),
                     (condensed_series(p, 0.5, 3.0, 200).verdict, "converges")]
    for eps in (0.1, 1.0):
        s = ApproxFn.scaled(eps)
        expected += [(classify_weiss_series(s, 1.0, H).verdict, "diverges"),
                     (classify_klw_series(s, H).verdict, "diverges"),
                     (condensed_series(s, 0.5, 3.0, 200).verdict, "diverges")]
    pair = []
    for a in (0.3, 0.5, 0.9):
        L = ApproxFn.log(a)
        klw = classify_klw_series(L, H).verdict
        weiss = classify_weiss_series(L, a, H).verdict
        pair.append((klw, weiss))
        expected += [(klw, "converges"), (weiss, "diverges"),
                     (condensed_series(L, a, 3.0, 10 ** 4).verdict, "diverges"),
                     (classify_weiss_series(L, min(1.0, 1.5 * a), H).verdict, "converges")]
    mismatches = sum(got != want for got, want in expected)
    ok = mismatches == 0 and all(p == ("converges", "diverges") for p in pair)
    assert record(11, "series classifiers against the analytic table", ok,
                  f"{len(expected) - mismatches}/{len(expected)} verdicts match; "
                  f"log(alpha) pairs (KLW, weiss) {pair}")


def test_criterion_12_non_decay(record, geometric_ctx):
    ns = list(range(3, 9))
    balls = geometric_witness_balls(2, ns)
    rows = decay_probe(geometric_ctx, [b[0] for b in balls], [b[1] for b in balls], [b[2] for b in balls],
                       n_samples=2_000_000, replicas=1000)
    ok = True
    parts = []
    for n, b, row in zip(ns, balls, rows):
        good = row.verdict != "inconclusive" and row.ratio >= 0.9 and b[2] <= 2.0 ** (-n + 1)
        ok &= good
        parts.append(f"n={n} ratio {row.ratio:.3f} eps {b[2]:.2e}")
    assert record(12, "non-decay witness on geometric(2)", ok, "; ".join(parts))
