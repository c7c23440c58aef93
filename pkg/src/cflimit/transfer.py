"""Chebyshev collocation for the transfer operator

    (L_t f)(x) = sum_{i in I} (i + x)^(-2t) f(1 / (i + x)),   x in [0, 1].

This is a fast floating-point estimate of the leading eigenpair; it is not
certified.  Its eigenfunction doubles as the test function for the
certified Collatz-Wielandt bounds in :mod:`cflimit.pressure`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy import special

from .indexsets.base import FullPart, IndexSet

DEFAULT_NODES = 48
DEFAULT_TRUNCATION = 2000


class ConvergenceError(RuntimeError):
    """Power iteration did not settle within its iteration cap."""


def chebyshev_nodes(n: int) -> np.ndarray:
    k = np.arange(n)
    return np.sort((1 - np.cos(np.pi * (2 * k + 1) / (2 * n))) / 2)


def _vander(y: np.ndarray, n: int) -> np.ndarray:
    return C.chebvander(2 * np.asarray(y, dtype=float) - 1, n - 1)


@dataclass
class Snapshot:
    """Explicit digits up to ``cutoff`` plus everything above it lumped together."""

    digits: np.ndarray
    cutoff: int
    far: bool
    full_tail: bool

    @classmethod
    def of(cls, I: IndexSet, truncation: Optional[int] = None) -> "Snapshot":
        if I.is_finite and not I.blocks and (truncation is None or truncation >= I.max_element()):
            d = np.asarray(I.explicit, dtype=float)
            return cls(d, int(I.max_element()), False, False)
        cut = truncation or DEFAULT_TRUNCATION
        d = np.asarray(I.elements_upto(cut), dtype=float)
        if I.is_finite:
            far = I.max_element() > cut
        else:
            far = True
        full_tail = isinstance(I.lazy, FullPart) and I.lazy_min <= cut
        return cls(d, cut, far, full_tail)


def far_moments(I: IndexSet, snap: Snapshot, s: float, x: np.ndarray) -> np.ndarray:
    """Approximate ``sum_{i > cutoff} (i + x)^(-s-j)`` for j = 0, 1, 2 (rows)."""
    out = np.zeros((3, len(x)))
    if not snap.far:
        return out
    if snap.full_tail and not I.explicit and not I.blocks:
        for j in range(3):
            out[j] = special.zeta(s + j, snap.cutoff + 1 + x)
        return out
    lo, hi = I.tail_bounds(snap.cutoff, s / 2)
    if math.isinf(hi):
        raise ValueError("weight series diverges; truncate the alphabet or raise t")
    mass = 0.5 * (lo + hi) if lo > 0 else hi
    out[0] = mass
    return out


@dataclass
class TransferResult:
    eigenvalue: float
    nodes: np.ndarray
    values: np.ndarray
    residual: float
    iterations: int
    coeffs: np.ndarray

    def __call__(self, y) -> np.ndarray:
        return C.chebval(2 * np.asarray(y, dtype=float) - 1, self.coeffs)


def operator_matrix(I: IndexSet, t: float, n: int = DEFAULT_NODES,
                    truncation: Optional[int] = None) -> tuple[np.ndarray, np.ndarray]:
    """Collocation matrix ``A`` with ``(A f)_k = (L_t f)(x_k)`` for interpolants ``f``."""
    s = 2.0 * t
    x = chebyshev_nodes(n)
    snap = Snapshot.of(I, truncation)
    Vinv = np.linalg.inv(_vander(x, n))
    B = np.zeros((n, n))
    chunk = max(1, 200_000 // n)
    for lo in range(0, len(snap.digits), chunk):
        d = snap.digits[lo:lo + chunk]
        z = d[None, :] + x[:, None]  # node x digit
        w = z ** (-s)
        V = _vander((1.0 / z).ravel(), n).reshape(n, len(d), n)
        B += np.einsum("kd,kdm->km", w, V)
    if snap.far:
        m = np.arange(n)
        sign = (-1.0) ** m
        v0 = sign
        v1 = -2.0 * sign * m ** 2
        v2 = 4.0 * sign * m ** 2 * (m ** 2 - 1) / 3
        mom = far_moments(I, snap, s, x)
        # f(y) ~ f(0) + f'(0) y + f''(0) y^2 / 2 with y = 1/(i + x)
        B += np.outer(mom[0], v0) + np.outer(mom[1], v1) + np.outer(mom[2], v2 / 2)
    return B @ Vinv, x


def transfer_lambda(I: IndexSet, t: float, n: int = DEFAULT_NODES, truncation: Optional[int] = None,
                    tol: float = 1e-14, max_iter: int = 10_000) -> TransferResult:
    """Leading eigenvalue and eigenfunction of the collocated transfer operator.

    The eigenfunction is normalized to integral 1 over [0, 1].
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    A, x = operator_matrix(I, t, n, truncation)
    # seed with the dense solver's Perron vector, then polish by power iteration
    vals, vecs = np.linalg.eig(A)
    k = int(np.argmax(vals.real))
    v = np.abs(vecs[:, k].real)
    if not np.all(np.isfinite(v)) or v.max() == 0:
        v = np.ones(n)
    v /= v.max()
    lam = 0.0
    for it in range(1, max_iter + 1):
        Av = A @ v
        new = float(np.max(np.abs(Av)))
        if new == 0 or not math.isfinite(new):
            raise ConvergenceError("transfer operator annihilated the iterate")
        v = Av / new
        if abs(new - lam) <= tol * new and it > 2:
            lam = new
            break
        lam = new
    else:
        raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")
    coeffs = C.chebfit(2 * x - 1, v, n - 1)
    integ = C.chebint(coeffs, lbnd=-1)
    total = C.chebval(1.0, integ) / 2
    v = v / total
    coeffs = coeffs / total
    residual = float(np.max(np.abs(A @ v - lam * v)))
    return TransferResult(lam, x, v, residual, it, coeffs)
