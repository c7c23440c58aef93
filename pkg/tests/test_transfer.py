import math

import numpy as np
import pytest

from cflimit.indexsets import finite, full, make_geometric
from cflimit.pressure import bowen_dimension, lambda_bracket
from cflimit.transfer import chebyshev_nodes, operator_matrix, transfer_lambda


def gauss_density(x):
    return 1.0 / ((1.0 + x) * math.log(2))


def test_full_alphabet_t1_is_gauss():
    r = transfer_lambda(full(), 1.0)
    assert abs(r.eigenvalue - 1) < 1e-6
    assert np.max(np.abs(r.values - gauss_density(r.nodes))) < 1e-6
    # the interpolant agrees off the nodes as well
    y = np.linspace(0, 1, 101)
    assert np.max(np.abs(r(y) - gauss_density(y))) < 1e-6


def test_single_digit_t0():
    r = transfer_lambda(finite([1]), 0.0)
    assert r.eigenvalue == pytest.approx(1.0, abs=1e-12)


def test_eigenfunction_positive_and_normalized():
    r = transfer_lambda(make_geometric(2), 0.6)
    y = np.linspace(0, 1, 513)
    assert np.all(r(y) > 0)
    # integral 1 by Simpson on a fine grid
    from scipy.integrate import simpson
    assert simpson(r(y), x=y) == pytest.approx(1.0, abs=1e-8)
    assert r.residual < 1e-8


def test_weights_positive():
    A, x = operator_matrix(finite([1, 2, 3]), 0.7, n=16)
    assert np.all((x > 0) & (x < 1))
    # applying A to the constant function gives sum (i + x)^(-2t) > 0
    ones = A @ np.ones(len(x))
    direct = sum((i + x) ** -1.4 for i in (1, 2, 3))
    assert np.allclose(ones, direct, rtol=1e-10)


def test_agrees_with_certified_bracket_at_root():
    I = finite([1, 2])
    h = bowen_dimension(I, tol=1e-4).bracket.mid
    lam = lambda_bracket(I, h)
    r = transfer_lambda(I, h)
    assert lam.lo_float - 1e-6 <= r.eigenvalue <= lam.hi_float + 1e-6
    assert r.eigenvalue == pytest.approx(1.0, abs=1e-3)


def test_negative_t_rejected():
    with pytest.raises(ValueError):
        transfer_lambda(finite([1, 2]), -1.0)


def test_nodes_in_unit_interval():
    x = chebyshev_nodes(12)
    assert len(x) == 12 and np.all(np.diff(x) != 0) and x.min() > 0 and x.max() < 1
