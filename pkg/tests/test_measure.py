import math

import numpy as np
import pytest

from cflimit.contfrac import DigitWord, DomainError, append_digit
from cflimit.indexsets import finite, full, make_geometric
from cflimit.measure import (
    ConformalContext,
    SamplerError,
    cylinder_mass_bracket,
    decay_probe,
    lyapunov_estimate,
    sample_batch,
    sample_point,
    series_estimate,
    survival_ratio_bound,
)

GAUSS_LYAPUNOV = math.pi ** 2 / (6 * math.log(2))


@pytest.fixture(scope="module")
def gauss():
    return ConformalContext.build(full(), h=1.0, seed=0)


@pytest.fixture(scope="module")
def gauss_batch(gauss):
    return sample_batch(gauss, 1000, 1000)


def test_cylinder_mass_examples(gauss):
    b = cylinder_mass_bracket(gauss, DigitWord.from_digits([1]))
    assert b.contains(0.5)
    assert b.lo_float == pytest.approx(0.25) and b.hi_float == pytest.approx(1.0)
    for i in (2, 7, 40):
        b = cylinder_mass_bracket(gauss, DigitWord.from_digits([i]))
        assert b.lo_float <= 0.25 * i ** -2.0 * (1 + 1e-12)
        assert b.hi_float >= i ** -2.0 * (1 - 1e-12)
        # Lebesgue length of the cylinder [1/(i+1), 1/i]
        assert b.contains(1 / i - 1 / (i + 1))


def test_cylinder_mass_nested(gauss):
    w = DigitWord.from_digits([3, 1, 4])
    for i in (1, 5, 9):
        assert cylinder_mass_bracket(gauss, append_digit(w, i)).hi <= cylinder_mass_bracket(gauss, w).hi


def test_cylinder_mass_rejects_foreign_digit():
    ctx = ConformalContext.build(finite([1, 2]), h=0.53)
    with pytest.raises(DomainError):
        cylinder_mass_bracket(ctx, DigitWord.from_digits([3]))


def test_survival_ratio_bound(gauss):
    w = DigitWord.from_digits([])
    assert survival_ratio_bound(gauss, w, 1) == pytest.approx(1 - (math.pi ** 2 / 6 - 1) / 4, abs=1e-9)
    assert survival_ratio_bound(gauss, w, 10 ** 9) > 1 - 1e-9
    ctx = ConformalContext.build(finite([1, 2]), h=0.53)
    assert survival_ratio_bound(ctx, w, 2) == 1.0


def test_single_digit_alphabet():
    ctx = ConformalContext.build(finite([1]), h=0.5)
    p = sample_point(ctx, 50)
    assert p.digits == [1] * 50
    r = lyapunov_estimate(ctx, 2000, replicas=2)
    assert r.birkhoff == pytest.approx(2 * math.log((1 + math.sqrt(5)) / 2), abs=1e-9)


def test_rejects_nonpositive_h():
    with pytest.raises(SamplerError):
        ConformalContext.build(finite([1, 2]), h=0.0)


def test_gauss_kuzmin_digit_one(gauss_batch):
    freq = np.mean(gauss_batch.digits == 1)
    assert freq == pytest.approx(math.log2(4 / 3), rel=0.01)


def test_marginals_within_conformal_bounds(gauss_batch):
    h = 1.0
    Z = math.pi ** 2 / 6
    for i in range(1, 6):
        f = np.mean(gauss_batch.digits == i)
        assert 4 ** -h * i ** (-2 * h) / Z <= f <= 4 ** h * i ** (-2 * h) / Z


def test_stationarity_halves(gauss_batch):
    d = gauss_batch.digits
    half = d.shape[1] // 2
    # per-replica frequencies give an honest standard error
    for i in (1, 2, 3):
        a = np.mean(d[:, :half] == i, axis=1)
        b = np.mean(d[:, half:] == i, axis=1)
        diff = a - b
        se = np.std(diff, ddof=1) / math.sqrt(len(diff))
        assert abs(np.mean(diff)) <= 3 * se


def test_recomputable_sums(gauss_batch):
    for r in (0, 17, 999):
        p = gauss_batch.path(r)
        eta, lq = p.recompute()
        assert np.array_equal(eta, p.eta_partial)
        assert np.allclose(lq, p.log_q, rtol=1e-12)
        exact = math.log(p.word.q_cur)
        assert lq[-1] == pytest.approx(exact, rel=1e-10)


def test_seed_determinism():
    ctx = ConformalContext.build(make_geometric(2), h=0.47, seed=5)
    a = sample_batch(ctx, 30, 20)
    b = sample_batch(ctx, 30, 20)
    c = sample_batch(ctx, 30, 20, stream=1)
    assert np.array_equal(a.digits, b.digits)
    assert not np.array_equal(a.digits, c.digits)
    assert set(np.unique(a.digits)) <= {2 ** k for k in range(1, 63)}


def test_gauss_lyapunov(gauss):
    r = lyapunov_estimate(gauss, 200_000, replicas=100)
    assert r.birkhoff == pytest.approx(GAUSS_LYAPUNOV, rel=0.01)
    assert r.stderr < 0.01
    assert r.series.lo_float <= GAUSS_LYAPUNOV


def test_series_estimate_monotone_in_truncation():
    vals = [series_estimate(full(), 1.0, T).lo_float for T in (10, 100, 1000)]
    assert vals == sorted(vals)


def test_decay_lebesgue_half(gauss):
    rows = decay_probe(gauss, [0.3, 0.6], [0.05, 0.1], [0.5, 0.5], n_samples=200_000, replicas=200)
    for row in rows:
        # mu is boundedly equivalent to Lebesgue with density ratio 2 across [0, 1]
        assert row.verdict == "ok"
        assert row.ratio == pytest.approx(0.5, abs=0.05)
        assert row.alpha_hat == pytest.approx(1.0, abs=0.15)


def test_decay_probe_length_mismatch(gauss):
    with pytest.raises(ValueError):
        decay_probe(gauss, [0.5], [0.1, 0.2], [0.5], n_samples=10)
