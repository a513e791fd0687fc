"""Sturm-sequence counting kernels.

The pivot recurrence d_j = (a_j - x) - b_{j-1}^2 / d_{j-1} of the shifted
tridiagonal matrix is evaluated for a batch of shifts; the number of
negative pivots equals the number of eigenvalues strictly below the shift.
Pivots are clamped away from zero at 1e-300 (treated as negative, so an
eigenvalue landing exactly on a shift counts as below it).

A numba-compiled kernel handles the float64 hot path; the plain numpy
kernel is kept both as a fallback and for extended-precision refinement
(np.longdouble), which numba does not support.
"""

from __future__ import annotations

import numpy as np

_TINY = 1e-300


def _sturm_counts_py(diag, off_sq, shifts):
    """Reference scalar implementation; numba-compiled when available."""
    n = diag.shape[0]
    m = shifts.shape[0]
    out = np.empty(m, dtype=np.int64)
    for k in range(m):
        x = shifts[k]
        count = 0
        d = diag[0] - x
        if d < 0.0:
            count += 1
        for j in range(1, n):
            if -_TINY < d < _TINY:
                d = -_TINY
            d = (diag[j] - x) - off_sq[j - 1] / d
            if d < 0.0:
                count += 1
        out[k] = count
    return out


def sturm_counts_vec(diag, off_sq, shifts):
    """Vectorized-over-shifts kernel, dtype-generic (used for longdouble)."""
    shifts = np.asarray(shifts)
    d = diag[0] - shifts
    counts = (d < 0).astype(np.int64)
    tiny = diag.dtype.type(_TINY)
    for j in range(1, diag.shape[0]):
        d = np.where(np.abs(d) < tiny, -tiny, d)
        d = (diag[j] - shifts) - off_sq[j - 1] / d
        counts += d < 0
    return counts


try:  # pragma: no cover - exercised implicitly by every eigenvalue test
    from numba import njit

    sturm_counts = njit(cache=True)(_sturm_counts_py)
except ImportError:  # pragma: no cover
    sturm_counts = sturm_counts_vec
