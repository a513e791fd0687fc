"""Dirichlet Poisson solves on (0, L): -V'' = source, V(0) = V(L) = 0.

Two deliberately separate routes are kept.  Grid densities go through the
3-point stencil (the same discretization as the Hamiltonian, so the
self-consistent loop is internally consistent); measures go through the
explicit Green function, which handles point masses exactly and gives the
piecewise-linear limit potential without smearing.  Their agreement on
smooth sources is itself a cross-check exercised by the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solveh_banded

from .errors import AtomOutOfDomain, DimensionMismatch, NegativeSource
from .model import Grid, GridFunction

__all__ = ["Measure", "green_kernel", "poisson_solve_density", "poisson_solve_measure"]


@dataclass(frozen=True)
class Measure:
    """Finite nonnegative measure on (0, L): point masses plus a density.

    ``atoms`` is a tuple of (location, weight) pairs with weight >= 0;
    ``density`` is an optional grid function for the absolutely continuous
    part.
    """

    atoms: tuple[tuple[float, float], ...] = ()
    density: GridFunction | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "atoms", tuple((float(a), float(w)) for a, w in self.atoms)
        )
        for a, w in self.atoms:
            if w < 0:
                raise ValueError(f"atom weight must be >= 0, got {w} at {a}")

    def mass(self) -> float:
        total = sum(w for _, w in self.atoms)
        if self.density is not None:
            total += self.density.mass()
        return float(total)


def green_kernel(x, y, L: float):
    """Green function of -d^2/dx^2 with Dirichlet ends on (0, L).

    G(x, y) = x (L - y) / L for x <= y and symmetrically otherwise;
    nonnegative, vanishing on the boundary, sup G = L/4.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lo = np.minimum(x, y)
    hi = np.maximum(x, y)
    out = lo * (L - hi) / L
    if out.ndim == 0:
        return float(out)
    return out


def poisson_solve_density(g: Grid, n: GridFunction) -> GridFunction:
    """Solve the second-difference system -D2 V = n with Dirichlet ends.

    The matrix is symmetric positive definite, so a banded Cholesky solve
    applies.  By the discrete maximum principle the solution of a
    nonnegative source is nonnegative; sources with min below
    -1e-12*||n||_inf are rejected.
    """
    if n.grid.n != g.n or n.grid.dx != g.dx:
        raise DimensionMismatch("density is not defined on the grid")
    vals = n.values
    if vals.size and float(np.min(vals)) < -1e-12 * float(np.max(np.abs(vals))):
        raise NegativeSource(
            f"source has negative part {float(np.min(vals)):.3e}"
        )
    ab = np.zeros((2, g.n))
    ab[0, 1:] = -1.0 / (g.dx * g.dx)
    ab[1, :] = 2.0 / (g.dx * g.dx)
    v = solveh_banded(ab, vals, overwrite_ab=True, check_finite=False)
    return GridFunction(v, g)


def poisson_solve_measure(g: Grid, mu: Measure) -> GridFunction:
    """Superpose Green-kernel responses of the atoms and the density.

    V(x_j) = sum_atoms w G(x_j, a) + dx * sum_k G(x_j, x_k) density_k.
    Atoms are evaluated through the kernel at their exact off-grid
    locations, never snapped, so a single point mass reproduces the tent
    function exactly at the nodes.
    """
    x = g.interior_x()
    v = np.zeros(g.n)
    for a, w in mu.atoms:
        if not 0.0 < a < g.L:
            raise AtomOutOfDomain(f"atom at {a} outside (0, {g.L})")
        v += w * green_kernel(x, a, g.L)
    if mu.density is not None:
        d = mu.density.values
        # O(n) prefix form of dx * sum_k G(x_j, x_k) d_k:
        # split the kernel at k = j and accumulate both halves.
        pre = np.cumsum(x * d)
        suf = np.cumsum(((g.L - x) * d)[::-1])[::-1]
        suf_excl = np.empty_like(suf)
        suf_excl[:-1] = suf[1:]
        suf_excl[-1] = 0.0
        v += g.dx * ((g.L - x) / g.L * pre + x / g.L * suf_excl)
    return GridFunction(v, g)
