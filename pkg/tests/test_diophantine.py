import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from cflimit.contfrac import DigitWord
from cflimit.diophantine import (
    ApproxFn,
    HypothesisError,
    classify_klw_series,
    classify_weiss_series,
    condensed_series,
    extremality_experiment,
    gamma_from_E,
    khinchine_experiment,
    liouville_fraction,
    liouville_test,
    psi_witnesses,
    resolve_prefix,
    trend_majorized,
    vwa_psi_slack,
    vwa_test,
)
from cflimit.indexsets import finite, make_geometric
from cflimit.measure import ConformalContext, sample_batch

digit_lists = st.lists(st.integers(1, 10 ** 6), min_size=2, max_size=40)
families = st.one_of(
    st.floats(0.05, 3).map(ApproxFn.power),
    st.floats(0.01, 1).map(ApproxFn.scaled),
    st.floats(0.2, 2).map(ApproxFn.log),
)


@pytest.fixture(scope="module")
def geo_ctx():
    return ConformalContext.build(make_geometric(2), h=0.472, seed=3)


@pytest.fixture(scope="module")
def geo_batch(geo_ctx):
    return sample_batch(geo_ctx, 300, 200)


# -- approximation functions --------------------------------------------------------


def test_approxfn_parse_and_phi():
    assert ApproxFn.parse("power:0.5") == ApproxFn.power(0.5)
    assert ApproxFn.parse("log(0.7)") == ApproxFn.log(0.7)
    with pytest.raises(ValueError):
        ApproxFn.parse("exp:1")
    with pytest.raises(ValueError):
        ApproxFn.power(-1)
    assert ApproxFn.power(1).phi_exact(7) == 7
    assert ApproxFn.power(2).psi(3) == pytest.approx(3.0 ** -4)
    assert ApproxFn.scaled(0.25).phi_exact(10) == 4
    # log phi uses max(1, log q), so phi >= 1 for every q
    assert float(ApproxFn.log(0.5).log_phi(0.3)) == 0.0
    assert float(ApproxFn.log(0.5).log_phi(math.e ** 2)) == pytest.approx(2 * 2)


def test_custom_table_hypotheses():
    ok = ApproxFn.custom([1.0, 0.2, 0.05])
    assert ok.capped() and ok.q2psi_nonincreasing()
    bad = ApproxFn.custom([1.0, 0.5])      # 4 * 0.5 > 1
    assert not bad.capped()
    with pytest.raises(HypothesisError):
        psi_witnesses([1, 1], bad, 1.0)
    with pytest.raises(HypothesisError):
        psi_witnesses([1] * 5, ok, 1.0)   # q_4 = 5 is past the table
    with pytest.raises(HypothesisError):
        psi_witnesses([1, 2], ApproxFn.scaled(2.0), 1.0)


# -- witnesses -------------------------------------------------------------------


def test_psi_witness_examples():
    ones = [1] * 20
    assert psi_witnesses(ones, ApproxFn.scaled(1.0), K=2) == []
    assert [w.n for w in psi_witnesses(ones, ApproxFn.scaled(1.0), K=1)] == list(range(20))
    # omega_5 = q_5 = 8 after five ones
    digits = [1, 1, 1, 1, 1, 8, 1]
    assert DigitWord.from_digits(digits[:5]).q_cur == 8
    wit = {w.n: w for w in psi_witnesses(digits, ApproxFn.power(1), K=1)}
    assert 5 in wit and wit[5].margin == 0 and wit[5].threshold == 8
    assert 6 not in wit


def test_vwa_examples():
    r = vwa_test([1] * 30, [1.0])
    assert r.witnesses[1.0] == [0, 1]
    doubly = [2 ** (2 ** n) for n in range(12)]
    assert vwa_test(doubly, [0.5]).witnesses[0.5] == list(range(12))
    with pytest.raises(ValueError):
        vwa_test([3], [1.0])


def test_liouville_examples():
    r = liouville_test([1] * 200, c_max=1.0)
    assert r.tail_sup[-1] == pytest.approx(1 / 199)
    assert np.all(np.diff(r.tail_sup) <= 0)
    rng = np.random.default_rng(0)
    bounded = rng.integers(1, 9, size=2000)
    rb = liouville_test(bounded, c_max=1.0)
    # bounded digits: ratios decay like 1/n
    assert rb.tail_sup[999] < log_ratio_cap(8, 1000)
    assert not rb.liouville_at_horizon
    big = [1, 1, 1, 10 ** 30, 1]
    rl = liouville_test(big, c_max=2.0)
    assert rl.liouville_at_horizon and rl.first_exceeding(2.0) == 3


def log_ratio_cap(B, n):
    # eta_n / S_n <= log(1 + B) / (n log 2)
    return math.log1p(B) / (n * math.log(2))


@settings(max_examples=60, deadline=None)
@given(digit_lists, families, st.floats(0.1, 10))
def test_witnesses_recompute_stable(digits, psi, K):
    a = psi_witnesses(digits, psi, K)
    b = psi_witnesses(list(digits), psi, K)
    assert a == b
    # prefixes see exactly the witnesses below their depth
    d = len(digits) // 2
    assert psi_witnesses(digits, psi, K, depth=d) == [w for w in a if w.n < d]
    for w in a:
        assert w.log_margin >= -1e-12


@settings(max_examples=100, deadline=None)
@given(digit_lists, st.floats(0.05, 4))
def test_vwa_implies_psi_witness_with_slack(digits, c):
    r = vwa_test(digits, [c])
    psi_n = {w.n for w in psi_witnesses(digits, ApproxFn.power(c), K=0.5)}
    for n in r.witnesses[c]:
        if n == 0:
            continue
        s = vwa_psi_slack(digits, n, c)
        assert s["vwa_margin"] >= 0 and s["s1"] >= -1e-12 and s["s2"] >= -1e-9
        assert s["implied_lower"] == pytest.approx(s["psi_log_margin"], abs=1e-9)
        if s["implied_lower"] > 1e-9:
            assert n in psi_n


# -- series ----------------------------------------------------------------------


def test_weiss_examples():
    r = classify_weiss_series(ApproxFn.log(0.5), 0.5, horizon=10 ** 5)
    assert r.verdict == "diverges"
    assert classify_weiss_series(ApproxFn.power(0.3), 0.7, horizon=1000).verdict == "converges"
    assert classify_weiss_series(ApproxFn.scaled(0.1), 1.0, horizon=1000).verdict == "diverges"
    # for log(a0) the weiss series diverges exactly when alpha <= a0
    assert classify_weiss_series(ApproxFn.log(0.5), 0.4, horizon=1000).verdict == "diverges"
    assert classify_weiss_series(ApproxFn.log(0.5), 0.6, horizon=1000).verdict == "converges"
    with pytest.raises(ValueError):
        classify_weiss_series(ApproxFn.power(1), 1.5)


def test_weiss_trace_matches_direct_sum():
    psi = ApproxFn.power(1.0)
    r = classify_weiss_series(psi, 0.5, horizon=10 ** 4)
    direct = math.fsum(q ** 0.0 * psi.psi(q) ** 0.5 for q in range(1, 10 ** 4 + 1))
    assert r.trace[-1] == (10 ** 4, pytest.approx(direct, rel=1e-10))
    sums = [s for _, s in r.trace]
    assert sums == sorted(sums)


def test_klw_examples():
    assert classify_klw_series(ApproxFn.log(0.5), horizon=1000).verdict == "converges"
    assert classify_klw_series(ApproxFn.scaled(0.5), horizon=1000).verdict == "diverges"
    assert classify_klw_series(ApproxFn.power(0.1), horizon=1000).verdict == "converges"
    assert classify_klw_series(ApproxFn.custom([0.5, 0.1]), horizon=1000).verdict == "undetermined"


def test_condensed_examples():
    g = 4.0
    assert condensed_series(ApproxFn.power(0.5), 0.7, g, 100).verdict == "converges"
    r = condensed_series(ApproxFn.log(0.7), 0.7, g, 10 ** 5)
    assert r.verdict == "diverges"
    # terms are 1/(n log gamma) for n >= 1: the partial sums grow like log n / log gamma
    n, s = r.trace[-1]
    assert s == pytest.approx(1 + (math.log(n) + 0.5772) / math.log(g), rel=0.02)
    assert condensed_series(ApproxFn.scaled(0.5), 0.7, g, 10).trace[-1][1] == pytest.approx(11 * 0.5 ** 0.7)
    with pytest.raises(ValueError):
        condensed_series(ApproxFn.power(1), 0.5, 1.0, 10)


@settings(max_examples=80, deadline=None)
@given(families, st.floats(0.05, 1.0), st.floats(1.5, 20))
def test_condensation_coherence(psi, h, gamma):
    assume(not (psi.family == "log" and abs(h / psi.param - 1) < 1e-9))
    a = classify_weiss_series(psi, h, horizon=100).verdict
    b = condensed_series(psi, h, gamma, 50).verdict
    assert a == b


# -- experiments -----------------------------------------------------------------


def test_khinchine_hypothesis_checks(geo_ctx):
    with pytest.raises(HypothesisError):
        khinchine_experiment(geo_ctx, ApproxFn.custom([1.0, 0.1, 0.2]), 1.0, 10, 5)
    with pytest.raises(HypothesisError):
        khinchine_experiment(geo_ctx, ApproxFn.scaled(3.0), 1.0, 10, 5)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.1, 5), st.floats(1.0, 8.0))
def test_survival_monotone_in_n_and_K(geo_ctx, geo_batch, K, factor):
    psi = ApproxFn.log(0.472)
    a = khinchine_experiment(geo_ctx, psi, K, 0, 0, batch=geo_batch)
    b = khinchine_experiment(geo_ctx, psi, K * factor, 0, 0, batch=geo_batch)
    for r in (a, b):
        assert np.all(np.diff(r.survival) <= 0) and r.survival[0] == 1
        assert np.all(np.diff(r.lemma_survival) <= 0)
        assert np.all(np.diff(r.bound) <= 0)
    assert np.all(b.survival >= a.survival)
    assert np.all(b.lemma_survival >= a.lemma_survival)


def test_khinchine_single_digit_step():
    ctx = ConformalContext.build(finite([1]), h=0.5)
    psi = ApproxFn.log(0.5)
    stay = khinchine_experiment(ctx, psi, 1.0, 50, 4)
    assert np.all(stay.survival == 1)
    drop = khinchine_experiment(ctx, psi, 0.5, 50, 4)
    assert drop.survival[0] == 1 and np.all(drop.survival[1:] == 0)


def test_khinchine_result_fields(geo_ctx, geo_batch):
    r = khinchine_experiment(geo_ctx, ApproxFn.power(0.5), 1.0, 0, 0, batch=geo_batch)
    assert r.main.gamma == gamma_from_E(r.E)
    assert set(r.curves) >= {"gamma", "gamma+1"}
    assert r.prefix == resolve_prefix(300, None) == 30
    d = r.as_dict()
    assert d["config"]["seed"] == 3 and d["gamma"] == r.main.gamma
    assert 0 < r.main.K2 < 1


def test_trend_majorized():
    n = np.arange(101)
    bound = 0.99 ** n
    ok, rows = trend_majorized(0.9 ** n, bound, 1000)
    assert ok and rows
    ok, _ = trend_majorized(np.ones(101), 0.5 ** n, 10 ** 6)
    assert not ok


def test_extremality_bounded_digits():
    ctx = ConformalContext.build(finite([1, 2]), h=0.53)
    r = extremality_experiment(ctx, [1.0], 200, 50, prefix=3)
    assert r.fractions[1.0] == 0.0
    assert r.as_dict()["config"]["prefix"] == 3


def test_liouville_fraction_bounded(geo_batch):
    frac, maxima = liouville_fraction(geo_batch, 2.0)
    assert len(maxima) == geo_batch.n_samples
    assert 0 <= frac <= 1
    ctx = ConformalContext.build(finite([1, 2]), h=0.53)
    b = sample_batch(ctx, 100, 20)
    assert liouville_fraction(b, 2.0)[0] == 0.0
