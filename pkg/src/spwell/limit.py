"""The explicit h -> 0 limit of the self-consistent system.

As the well squeezes, the potential tends to a piecewise-linear tent with
kink at x0 and the density to a single point mass there.  Three
ingredients are computed: the bound states e_1 < ... < e_N < 0 of the
unsqueezed reference operator -d^2/dx^2 + U on the whole line, the scalar
theta solving

    theta = x0 (1 - x0/L) sum_i f(e_i + theta),

and from it the tent potential (peak value theta at x0) and the limiting
measure of weight sum_i f(e_i + theta).

The reference operator is truncated to [-R, R] with Dirichlet ends; the
eigenfunctions decay exponentially, so R is doubled until every eigenvalue
is insensitive to it, while the grid is refined with Richardson control
and the reported values are the Richardson extrapolants.  Values closer
to zero than 10x the tolerance are discarded as continuum-edge artifacts
(zero is an accumulation point of nothing here, but the truncated box
modes crowd it from above).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigen import eigenvalues_below
from .errors import BracketError, ConditionViolated, NoConvergence
from .model import (
    Grid,
    GridFunction,
    PartitionFunction,
    SystemParams,
    TridiagOperator,
    WellPotential,
    partition_eval,
    well_eval,
)
from .poisson import Measure

__all__ = [
    "ReferenceSpectrum",
    "LimitPotential",
    "LimitSolution",
    "reference_spectrum",
    "occupied_sum",
    "solve_theta",
    "theta_residual",
    "limit_potential",
    "limit_measure",
    "compute_limit",
]

REF_TOL = 1e-6
_R_INIT = 15.0
_R_MAX = 1000.0
_DX_INIT = 1.0 / 64.0
_DX_MIN = 1.0 / 65536.0


@dataclass(frozen=True)
class ReferenceSpectrum:
    """Bound states of -d^2/dx^2 + U on the line: e_1 < ... < e_N < 0.

    ``radius`` and ``dx`` record the truncation and the finest grid used.
    The index convention e_i = 0 for i >= N+1 is exposed through ``e``.
    """

    values: np.ndarray
    radius: float
    dx: float

    @property
    def N(self) -> int:
        return int(self.values.shape[0])

    def e(self, i: int) -> float:
        """i-th level, 1-based; zero for i > N by convention."""
        if i < 1:
            raise IndexError("levels are numbered from 1")
        return float(self.values[i - 1]) if i <= self.N else 0.0


def _eigs_at(U: WellPotential, R: float, dx_nom: float, cut: float) -> np.ndarray:
    n_plus_1 = max(int(round(2.0 * R / dx_nom)), 8)
    dx = 2.0 * R / n_plus_1
    x = -R + dx * np.arange(1, n_plus_1)
    diag = 2.0 / (dx * dx) + well_eval(U, x)
    off = np.full(n_plus_1 - 2, -1.0 / (dx * dx))
    T = TridiagOperator(diag=diag, off=off, scale=1.0)
    # Bisection well below the discretization error; no longdouble needed.
    return eigenvalues_below(T, cut, tol=1e-11, refine=False)


def _converged_at_radius(U: WellPotential, R: float, tol: float, cut: float):
    """Refine dx with Richardson control; return extrapolated eigenvalues."""
    dx = _DX_INIT
    prev = _eigs_at(U, R, dx, cut)
    while dx >= _DX_MIN:
        dx *= 0.5
        cur = _eigs_at(U, R, dx, cut)
        if cur.shape == prev.shape:
            est = np.max(np.abs(cur - prev)) / 3.0 if cur.size else 0.0
            if est < tol:
                return (4.0 * cur - prev) / 3.0, dx
        prev = cur
    raise NoConvergence(
        f"reference spectrum grid refinement stalled at dx={dx:g} (R={R:g})"
    )


def reference_spectrum(
    U: WellPotential, tol: float = REF_TOL, eps_S: float | None = None
) -> ReferenceSpectrum:
    """Bound states of the reference operator, to tolerance tol.

    Doubles the truncation radius from 15 until no eigenvalue moves by
    more than tol, halves the grid spacing until the Richardson error
    estimate drops below tol, and reports the extrapolated values; only
    values below -10*tol count as bound states.

    When ``eps_S`` is given, the occupation condition e_1 < eps_S is
    enforced (ConditionViolated otherwise, including the empty-spectrum
    case U = 0).
    """
    cut = -5.0 * tol
    R = _R_INIT
    vals, dx = _converged_at_radius(U, R, tol, cut)
    while R <= _R_MAX:
        vals2, dx2 = _converged_at_radius(U, 2.0 * R, tol, cut)
        if vals2.shape == vals.shape and (
            vals.size == 0 or np.max(np.abs(vals2 - vals)) < tol
        ):
            vals, dx, R = vals2, dx2, 2.0 * R
            break
        vals, dx, R = vals2, dx2, 2.0 * R
    else:
        raise NoConvergence(f"truncation radius exceeded {_R_MAX} without settling")
    bound = vals[vals < -10.0 * tol]
    rs = ReferenceSpectrum(values=np.sort(bound), radius=R, dx=dx)
    if eps_S is not None:
        if rs.N == 0 or rs.e(1) >= eps_S:
            e1 = rs.e(1) if rs.N else 0.0
            raise ConditionViolated(
                f"occupation condition fails: e1 = {e1:.6g} >= eps_S = {eps_S:.6g}",
                e1=e1,
                eps_S=eps_S,
            )
    return rs


def _f_eval(f, x):
    """Occupation statistics as data: a PartitionFunction or any callable
    vanishing at and above eps_S."""
    if isinstance(f, PartitionFunction):
        return partition_eval(f, x)
    return f(x)


def occupied_sum(rs: ReferenceSpectrum, f, theta: float) -> float:
    """sum_{i>=1} f(e_i + theta); indices beyond N contribute f(theta) = 0.

    The infinite sum collapses to i <= N because theta >= 0 > eps_S makes
    every conventional zero level unoccupied.
    """
    if theta < 0:
        raise ValueError(f"theta must be >= 0, got {theta}")
    if rs.N == 0:
        return 0.0
    return float(np.sum(_f_eval(f, rs.values + theta)))


def theta_residual(rs: ReferenceSpectrum, f, p: SystemParams, theta: float) -> float:
    """G(theta) = theta - x0 (1 - x0/L) sum_i f(e_i + theta)."""
    return theta - p.x0 * (1.0 - p.x0 / p.L) * occupied_sum(rs, f, theta)


def solve_theta(rs: ReferenceSpectrum, f, p: SystemParams) -> float:
    """Unique nonnegative root of G by bisection on [0, eps_S - e_1].

    G is continuous and strictly increasing (f is nonincreasing), G at the
    right endpoint equals eps_S - e_1 > 0, and G(0) < 0 whenever the
    occupation condition holds, so the bracket is guaranteed.  Iterates
    until |G| <= 0.1 * tol_root (or the bracket degenerates, which leaves
    |G| at roundoff scale since G' >= 1).
    """
    if theta_residual(rs, f, p, 0.0) >= 0.0:
        raise BracketError(
            "G(0) >= 0: no positive occupied sum at theta = 0; "
            "the occupation condition e1 < eps_S is broken"
        )
    a, b = 0.0, p.eps_S - rs.e(1)
    mid = 0.5 * (a + b)
    for _ in range(400):
        g_mid = theta_residual(rs, f, p, mid)
        if abs(g_mid) <= 0.1 * p.tol_root:
            return mid
        if g_mid > 0.0:
            b = mid
        else:
            a = mid
        nxt = 0.5 * (a + b)
        if nxt == a or nxt == b:
            # bracket exhausted at floating resolution
            return nxt
        mid = nxt
    return mid


@dataclass(frozen=True)
class LimitPotential:
    """Exact two-slope tent: peak theta at x0, zero at both endpoints.

    Parameterized by the peak so that evaluation at x0 returns theta
    bitwise; the slopes theta/x0 and -theta/(L - x0) agree with the
    occupied-sum form to the residual of the theta equation.
    """

    theta: float
    x0: float
    L: float
    weight: float

    @property
    def left_slope(self) -> float:
        return self.theta / self.x0

    @property
    def right_slope(self) -> float:
        return -self.theta / (self.L - self.x0)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(
            x <= self.x0,
            self.theta * (x / self.x0),
            self.theta * ((self.L - x) / (self.L - self.x0)),
        )
        if out.ndim == 0:
            return float(out)
        return out

    def sample(self, grid: Grid) -> GridFunction:
        return GridFunction(self(grid.interior_x()), grid)


@dataclass(frozen=True)
class LimitSolution:
    """The full limit block: theta, tent potential, measure, level counts.

    N1 counts the occupied limit levels (e_i + theta < eps_S); it is at
    least 1 whenever the occupation condition holds.
    """

    theta: float
    V0: LimitPotential
    mu: Measure
    N1: int
    reference: ReferenceSpectrum


def limit_potential(theta: float, rs: ReferenceSpectrum, f, p: SystemParams) -> LimitPotential:
    """Tent potential of the limit problem for a solved theta."""
    return LimitPotential(
        theta=float(theta), x0=p.x0, L=p.L, weight=occupied_sum(rs, f, theta)
    )


def limit_measure(theta: float, rs: ReferenceSpectrum, f, p: SystemParams) -> Measure:
    """Limiting density: one atom at x0 of weight sum_i f(e_i + theta)."""
    return Measure(atoms=((p.x0, occupied_sum(rs, f, theta)),))


def compute_limit(p: SystemParams, tol: float = REF_TOL) -> LimitSolution:
    """Run the whole limit pipeline for a configuration."""
    f = p.partition()
    rs = reference_spectrum(p.well(), tol=tol, eps_S=p.eps_S)
    theta = solve_theta(rs, f, p)
    v0 = limit_potential(theta, rs, f, p)
    mu = limit_measure(theta, rs, f, p)
    n1 = int(np.sum(rs.values + theta < p.eps_S))
    return LimitSolution(theta=theta, V0=v0, mu=mu, N1=n1, reference=rs)
