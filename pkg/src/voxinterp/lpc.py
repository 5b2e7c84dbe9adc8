"""Autocorrelation-method linear prediction."""

import numpy as np
from scipy import linalg


def lpc(frame, order):
    """Prediction polynomial ``[1, a1, ..., ap]`` for ``frame``.

    Returns the trivial polynomial ``[1, 0, ..., 0]`` for silent or
    numerically singular frames.
    """
    x = np.asarray(frame, dtype=float)
    n = x.size
    r = np.correlate(x, x, mode="full")[n - 1:n + order]
    a = np.zeros(order + 1)
    a[0] = 1.0
    if r[0] <= 0 or r.size < order + 1:
        return a
    # Tiny white-noise floor keeps the Toeplitz system well conditioned.
    r = r.copy()
    r[0] *= 1.0 + 1e-9
    try:
        coef = linalg.solve_toeplitz(r[:order], -r[1:order + 1])
    except (linalg.LinAlgError, ValueError):
        return a
    if not np.all(np.isfinite(coef)):
        return a
    a[1:] = coef
    return a


def inverse_filter(x, a, start, stop):
    """Prediction residual of ``x[start:stop]`` under polynomial ``a``.

    Samples before ``start`` are used as filter history when available.
    """
    p = a.size - 1
    lo = max(0, start - p)
    seg = x[lo:stop]
    e = np.convolve(seg, a)[:seg.size]
    return e[start - lo:]
