"""Symmetric tridiagonal spectral engine.

Counts eigenvalues below a threshold through Sturm sequences, locates each
one by bisection on the count function, and recovers eigenvectors by
inverse iteration.  Only the (few) states below the occupation threshold
are ever needed, so bisection beats any full-spectrum method here: one
count costs O(n).

Bisection in float64 stalls at an absolute resolution of a few
eps*||T||; for the stiff operators of this problem (||T|| ~ h^2/dx^2) that
is too coarse for tight relative checks on small eigenvalues, so converged
brackets are re-bisected once more in extended precision (np.longdouble,
80-bit on x86) unless the caller opts out.

All functions are pure; searches for distinct eigenvalues are independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from ._sturm import sturm_counts, sturm_counts_vec
from .errors import NoConvergence
from .model import Grid, GridFunction, TridiagOperator

__all__ = ["EigenSet", "sturm_count", "eigenvalues_below", "eigenvector", "spectrum_below"]

# Eigenvalues closer than this (times ||T||) are treated as a degenerate
# cluster and their eigenvectors re-orthogonalized.
CLUSTER_RTOL = 1e-8

# Per-pair residual contract ||T psi - lam psi|| <= RESIDUAL_RTOL * ||T||.
RESIDUAL_RTOL = 1e-8

_INVIT_SEED = 20210405  # fixed seed: restarts must be reproducible
_MAX_SWEEPS = 220


def _counts(T: TridiagOperator, shifts: np.ndarray) -> np.ndarray:
    off_sq = T.off * T.off
    return sturm_counts(T.diag, off_sq, np.asarray(shifts, dtype=float))


def sturm_count(T: TridiagOperator, eps: float) -> int:
    """Number of eigenvalues of T strictly below eps.

    Counts sign changes of the Sturm pivot recurrence at the shift eps,
    with pivots clamped at 1e-300 against underflow.
    """
    if T.n == 0:
        return 0
    return int(_counts(T, np.array([float(eps)]))[0])


def _bisect_f64(T: TridiagOperator, eps: float, m: int, width_tol: float):
    """Per-index bisection; returns converged brackets (lo, hi) arrays."""
    glo, ghi = T.gershgorin_interval()
    lo0 = glo - 1e-8 * (1.0 + abs(glo))
    # every eigenvalue also lies below the upper Gershgorin bound, which
    # keeps the bracket finite for thresholds at or beyond the spectrum
    hi0 = min(float(eps), ghi + 1e-8 * (1.0 + abs(ghi)))
    lo = np.full(m, lo0)
    hi = np.full(m, hi0)
    idx = np.arange(1, m + 1)
    for _ in range(_MAX_SWEEPS):
        mid = 0.5 * (lo + hi)
        stuck = (mid <= lo) | (mid >= hi)
        if np.all(stuck | (hi - lo <= width_tol)):
            break
        c = _counts(T, mid)
        above = c >= idx
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    return lo, hi


def _refine_longdouble(T: TridiagOperator, eps: float, lo, hi):
    """Re-bisect each converged float64 bracket in extended precision.

    The float64 count function is only trustworthy to ~eps64*||T||, so the
    bracket is first widened past that fuzz; the longdouble recurrence
    (including the off-diagonal squares) then resolves the eigenvalue to
    near its own ulp.  No-op on platforms where longdouble is float64.
    """
    ld = np.longdouble
    if np.finfo(ld).eps >= np.finfo(np.float64).eps:
        return 0.5 * (lo + hi)
    m = lo.shape[0]
    diag_ld = T.diag.astype(ld)
    off_ld = T.off.astype(ld)
    off_sq_ld = off_ld * off_ld
    norm = T.norm_bound()
    widen = np.maximum(8.0 * (hi - lo), 256.0 * np.finfo(np.float64).eps * max(norm, 1.0))
    llo = lo.astype(ld) - widen
    lhi = hi.astype(ld) + widen
    idx = np.arange(1, m + 1)
    # Widened brackets must still straddle their eigenvalue in the
    # longdouble count; expand defensively if the fuzz was larger.
    ok_lo = ok_hi = None
    for _ in range(4):
        ok_lo = sturm_counts_vec(diag_ld, off_sq_ld, llo) < idx
        ok_hi = sturm_counts_vec(diag_ld, off_sq_ld, lhi) >= idx
        if np.all(ok_lo) and np.all(ok_hi):
            break
        widen = 8.0 * widen
        llo = np.where(ok_lo, llo, llo - widen)
        lhi = np.where(ok_hi, lhi, lhi + widen)
    unverified = ~(ok_lo & ok_hi)
    for _ in range(120):
        mid = 0.5 * (llo + lhi)
        if np.all((lhi - llo) <= 8.0 * np.finfo(ld).eps * np.maximum(np.abs(mid), 1e-30)):
            break
        c = sturm_counts_vec(diag_ld, off_sq_ld, mid)
        above = c >= idx
        lhi = np.where(above, mid, lhi)
        llo = np.where(above, llo, mid)
    refined = (0.5 * (llo + lhi)).astype(np.float64)
    return np.where(unverified, 0.5 * (lo + hi), refined)


def eigenvalues_below(
    T: TridiagOperator, eps: float, tol: float = 1e-12, refine: bool = True
) -> np.ndarray:
    """All eigenvalues of T strictly below eps, sorted ascending.

    Each eigenvalue is bracketed by bisection on the Sturm count to a
    width <= tol*(1+|eps|); with refine=True the bracket is then polished
    in extended precision.  Returns an array of length sturm_count(T, eps).
    """
    m = sturm_count(T, eps)
    if m == 0:
        return np.empty(0)
    width_tol = tol * (1.0 + abs(eps))
    lo, hi = _bisect_f64(T, eps, m, width_tol)
    if refine:
        vals = _refine_longdouble(T, eps, lo, hi)
    else:
        vals = 0.5 * (lo + hi)
    return np.sort(vals)


def _solve_shifted(T: TridiagOperator, lam: float, b: np.ndarray) -> np.ndarray:
    ab = np.zeros((3, T.n))
    ab[0, 1:] = T.off
    ab[1, :] = T.diag - lam
    ab[2, :-1] = T.off
    return solve_banded((1, 1), ab, b, overwrite_ab=True, check_finite=False)


def _eigenvector_raw(
    T: TridiagOperator,
    lam: float,
    orthogonal_to: list[np.ndarray],
    max_iter: int = 50,
    restarts: int = 3,
) -> np.ndarray:
    """Inverse iteration for the l2-normalized eigenvector of lam.

    Deterministic: the start vector and all restarts come from a fixed-seed
    generator.  The sign is normalized so the largest-magnitude component
    is positive.
    """
    n = T.n
    norm = max(T.norm_bound(), 1.0)
    accept = RESIDUAL_RTOL * norm
    target = max(1e-13 * norm, 1e-30)  # aim well below the contract
    rng = np.random.default_rng(_INVIT_SEED)
    best_v, best_res = None, np.inf
    for _ in range(restarts + 1):
        v = rng.standard_normal(n)
        for u in orthogonal_to:
            v -= (u @ v) * u
        nv = np.linalg.norm(v)
        if nv == 0.0:
            continue
        v /= nv
        shift = lam
        for _ in range(max_iter):
            try:
                w = _solve_shifted(T, shift, v)
            except np.linalg.LinAlgError:
                w = None
            if w is None or not np.all(np.isfinite(w)):
                # exactly singular shift: nudge by a few ulps of ||T||
                shift = shift + 32.0 * np.finfo(float).eps * norm
                continue
            for u in orthogonal_to:
                w -= (u @ w) * u
            nw = np.linalg.norm(w)
            if nw == 0.0:
                break
            v = w / nw
            res = np.linalg.norm(T.matvec(v) - lam * v)
            if res < best_res:
                best_res, best_v = res, v.copy()
            if res <= target:
                break
        if best_res <= accept:
            break
    if best_v is None or best_res > accept:
        raise NoConvergence(
            f"inverse iteration failed at lambda={lam!r}: residual {best_res:.3e} "
            f"> {accept:.3e}"
        )
    k = int(np.argmax(np.abs(best_v)))
    if best_v[k] < 0:
        best_v = -best_v
    return best_v


def eigenvector(
    T: TridiagOperator, lam: float, orthogonal_to: list[GridFunction] = ()
) -> GridFunction:
    """Normalized real eigenvector of T for the (converged) eigenvalue lam.

    Inverse iteration with at most 50 steps and 3 seeded random restarts;
    raises NoConvergence past that budget.  The result satisfies
    ||T psi - lam psi|| <= 1e-8 ||T|| and has unit grid-quadrature norm.
    Vectors in ``orthogonal_to`` are projected out each step, which is how
    near-degenerate clusters stay mutually orthogonal.
    """
    if T.grid is None:
        raise ValueError("operator carries no grid; eigenvectors need one")
    dx = T.grid.dx
    raw_others = [u.values * np.sqrt(dx) for u in orthogonal_to]
    v = _eigenvector_raw(T, float(lam), raw_others)
    return GridFunction(v / np.sqrt(dx), T.grid)


@dataclass(frozen=True)
class EigenSet:
    """Sorted eigenvalues below a threshold with their eigenvectors.

    ``boundary_count`` reports how many of the accepted values lie within
    the bisection tolerance of the threshold itself (counting there is
    resolution-limited, so such values are flagged rather than trusted).
    """

    threshold: float
    values: np.ndarray
    vectors: tuple[GridFunction, ...]
    grid: Grid
    boundary_count: int = 0

    @property
    def count(self) -> int:
        return int(self.values.shape[0])


def spectrum_below(
    T: TridiagOperator,
    eps: float,
    tol: float = 1e-12,
    refine: bool = True,
    with_vectors: bool = True,
) -> EigenSet:
    """Resolve every eigenpair of T strictly below eps.

    Combines sturm_count, eigenvalues_below and eigenvector; eigenvalues
    closer than 1e-8*||T|| are treated as one cluster and orthogonalized.
    """
    if T.grid is None:
        raise ValueError("operator carries no grid")
    vals = eigenvalues_below(T, eps, tol=tol, refine=refine)
    vecs: list[GridFunction] = []
    if with_vectors and vals.size:
        cluster_gap = CLUSTER_RTOL * max(T.norm_bound(), 1.0)
        cluster_start = 0
        for i, lam in enumerate(vals):
            if i > 0 and lam - vals[i - 1] >= cluster_gap:
                cluster_start = i
            vecs.append(eigenvector(T, lam, vecs[cluster_start:i]))
    width_tol = tol * (1.0 + abs(eps))
    boundary = int(np.sum(eps - vals <= width_tol)) if vals.size else 0
    return EigenSet(
        threshold=float(eps),
        values=vals,
        vectors=tuple(vecs),
        grid=T.grid,
        boundary_count=boundary,
    )
