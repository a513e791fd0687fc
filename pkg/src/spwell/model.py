"""Problem definition: domain, quantum well, occupation statistics, Hamiltonian.

The physical system lives on the interval (0, L) with homogeneous Dirichlet
conditions.  A nonpositive smooth bump well of depth scale U0 is centered at
x0 with support radius h (the semiclassical parameter), so the well squeezes
to a point as h -> 0.  Kinetic energy carries the factor h^2.  States are
occupied through a smooth partition function f that vanishes identically
above a negative threshold eps_S, so only well-confined states contribute.

Everything here is immutable after construction and all operations are pure,
so values can be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import quad

from .errors import ConfigError, DimensionMismatch

__all__ = [
    "SystemParams",
    "WellPotential",
    "PartitionFunction",
    "Grid",
    "GridFunction",
    "TridiagOperator",
    "well_eval",
    "well_rescaled",
    "partition_eval",
    "partition_antiderivative",
    "build_grid",
    "assemble_operator",
    "load_params",
]


@dataclass(frozen=True)
class SystemParams:
    """Full configuration of one solver run.

    Attributes
    ----------
    L : float
        Domain length; the domain is (0, L).
    x0 : float
        Well center, strictly inside (0, L).
    h : float
        Semiclassical parameter.  Admissible whenever the well support
        [x0 - h, x0 + h] stays inside (0, L); there is no other a-priori
        upper bound, asymptotic checks simply report failure outside the
        small-h regime.
    U0 : float
        Well depth scale (>= 0; zero gives the degenerate free problem,
        accepted here and rejected downstream by the occupation check).
    eps_S : float
        Occupation threshold, < 0.  States at or above eps_S are empty.
    A : float
        Partition function amplitude.
    points_per_well : int
        Grid resolution factor: at least this many grid cells per well
        radius h (>= 10).
    n_max : int
        Hard cap on the number of interior grid points.
    tol_eig, tol_scf, tol_root : float
        Tolerances for eigenvalue bisection, the self-consistent loop and
        scalar root finding.
    delta_agmon : float
        Weight parameter in (0, 1) of the exponential decay estimates.
    """

    L: float = 1.0
    x0: float = 0.4
    h: float = 0.05
    U0: float = 10.0
    eps_S: float = -0.5
    A: float = 1.0
    points_per_well: int = 20
    n_max: int = 400001
    tol_eig: float = 1e-12
    tol_scf: float = 1e-10
    tol_root: float = 1e-12
    delta_agmon: float = 0.1

    def __post_init__(self):
        if not self.L > 0:
            raise ConfigError(f"L must be positive, got {self.L}")
        if not 0 < self.x0 < self.L:
            raise ConfigError(f"x0 must lie in (0, L), got {self.x0}")
        if not self.h > 0:
            raise ConfigError(f"h must be positive, got {self.h}")
        if self.x0 - self.h <= 0 or self.x0 + self.h >= self.L:
            raise ConfigError(
                f"well support [{self.x0 - self.h}, {self.x0 + self.h}] must "
                f"stay inside (0, {self.L})"
            )
        if self.U0 < 0:
            raise ConfigError(f"U0 must be nonnegative, got {self.U0}")
        if not self.eps_S < 0:
            raise ConfigError(f"eps_S must be negative, got {self.eps_S}")
        if not self.A > 0:
            raise ConfigError(f"A must be positive, got {self.A}")
        if int(self.points_per_well) < 10:
            raise ConfigError(
                f"points_per_well must be >= 10, got {self.points_per_well}"
            )
        if int(self.n_max) < 1:
            raise ConfigError(f"n_max must be >= 1, got {self.n_max}")
        for name in ("tol_eig", "tol_scf", "tol_root"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if not 0 < self.delta_agmon < 1:
            raise ConfigError(
                f"delta_agmon must lie in (0, 1), got {self.delta_agmon}"
            )

    def well(self) -> "WellPotential":
        return WellPotential(U0=self.U0)

    def partition(self) -> "PartitionFunction":
        return PartitionFunction(eps_S=self.eps_S, A=self.A)


@dataclass(frozen=True)
class WellPotential:
    """The fixed well profile U(y) = -U0 exp(-1/(1 - y^2)) on |y| < 1.

    U is smooth, nonpositive, and supported in the closed unit ball; the
    sup norm is attained at the center.
    """

    U0: float

    @property
    def Lambda(self) -> float:
        """Sup norm of U; equals U0/e for the bump profile."""
        return self.U0 * np.exp(-1.0)


@dataclass(frozen=True)
class PartitionFunction:
    """Occupation statistics f(x) = A exp(-1/(eps_S - x)) for x < eps_S.

    Positive below the threshold, identically zero at and above it, smooth
    everywhere and nonincreasing.
    """

    eps_S: float
    A: float = 1.0


def well_eval(U: WellPotential, y):
    """Evaluate the well profile at y (scalar or array).

    Returns -U0 exp(-1/(1 - y^2)) for |y| < 1 and exactly 0 outside; the
    range is [-U0/e, 0].
    """
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    inside = np.abs(y) < 1.0
    yi = y[inside]
    out[inside] = -U.U0 * np.exp(-1.0 / (1.0 - yi * yi))
    if out.ndim == 0:
        return float(out)
    return out


def well_rescaled(U: WellPotential, p: SystemParams, x):
    """Evaluate the squeezed well U((x - x0)/h); zero outside [x0-h, x0+h]."""
    x = np.asarray(x, dtype=float)
    return well_eval(U, (x - p.x0) / p.h)


def partition_eval(f: PartitionFunction, x):
    """Evaluate f at x (scalar or array); exactly 0 for x >= eps_S."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    below = x < f.eps_S
    out[below] = f.A * np.exp(-1.0 / (f.eps_S - x[below]))
    if out.ndim == 0:
        return float(out)
    return out


def partition_antiderivative(f: PartitionFunction, x: float) -> float:
    """F(x) = integral of f from x to +infinity, by adaptive quadrature.

    Since f vanishes at and above eps_S the integral runs over [x, eps_S]
    only; F is nonnegative and nonincreasing, F(x) = 0 for x >= eps_S.
    """
    x = float(x)
    if x >= f.eps_S:
        return 0.0
    val, _ = quad(
        lambda s: f.A * np.exp(-1.0 / (f.eps_S - s)),
        x,
        f.eps_S,
        epsabs=1e-14,
        epsrel=1e-12,
        limit=200,
    )
    return val


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [0, L]: nodes x_j = j*dx for j = 0..n+1, x_{n+1} = L.

    Only interior nodes carry unknowns; the endpoints are Dirichlet.
    ``capped`` records that n was clamped by n_max.
    """

    n: int
    dx: float
    L: float
    capped: bool = False

    def interior_x(self) -> np.ndarray:
        """Interior nodes x_1..x_n."""
        return self.dx * np.arange(1, self.n + 1)

    def full_x(self) -> np.ndarray:
        """All nodes x_0..x_{n+1} including the Dirichlet endpoints."""
        return self.dx * np.arange(0, self.n + 2)


@dataclass(frozen=True)
class GridFunction:
    """Real values at the interior nodes of a grid; endpoints are 0.

    The L2 quadrature used throughout is dx * sum(values^2), i.e. the
    trapezoid rule with the implied zero boundary values.
    """

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.shape != (self.grid.n,):
            raise DimensionMismatch(
                f"expected {self.grid.n} interior values, got {v.shape}"
            )

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(np.zeros(grid.n), grid)

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> "GridFunction":
        return cls(np.asarray(fn(grid.interior_x()), dtype=float), grid)

    @property
    def dx(self) -> float:
        return self.grid.dx

    @property
    def x(self) -> np.ndarray:
        return self.grid.interior_x()

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def mass(self) -> float:
        """Grid quadrature of the function itself: dx * sum(values)."""
        return float(self.dx * np.sum(self.values))

    def l2_norm(self) -> float:
        return float(np.sqrt(self.dx * np.sum(self.values**2)))

    def h1_seminorm_sq(self) -> float:
        """Discrete int |V'|^2 including the two boundary gaps."""
        d = np.diff(self.values, prepend=0.0, append=0.0)
        return float(np.sum(d * d) / self.dx)


@dataclass(frozen=True)
class TridiagOperator:
    """Symmetric tridiagonal operator: main diagonal plus one off diagonal.

    ``scale`` keeps the kinetic prefactor h^2 for error analysis.  The grid
    is carried so eigenvectors can be returned as grid functions; it is
    None for operators assembled outside [0, L] (reference problems).
    """

    diag: np.ndarray
    off: np.ndarray
    scale: float
    grid: Grid | None = None

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float)
        e = np.asarray(self.off, dtype=float)
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "off", e)
        if e.shape != (max(d.shape[0] - 1, 0),):
            raise DimensionMismatch(
                f"off diagonal must have length n-1, got {e.shape[0]} for n={d.shape[0]}"
            )

    @property
    def n(self) -> int:
        return self.diag.shape[0]

    def norm_bound(self) -> float:
        """Gershgorin bound on the spectral radius (row-sum norm)."""
        if self.n == 0:
            return 0.0
        r = np.zeros(self.n)
        r[:-1] += np.abs(self.off)
        r[1:] += np.abs(self.off)
        return float(np.max(np.abs(self.diag) + r))

    def gershgorin_interval(self) -> tuple[float, float]:
        """Interval certainly containing the whole spectrum."""
        if self.n == 0:
            return (0.0, 0.0)
        r = np.zeros(self.n)
        r[:-1] += np.abs(self.off)
        r[1:] += np.abs(self.off)
        return (float(np.min(self.diag - r)), float(np.max(self.diag + r)))

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diag * v
        if self.n > 1:
            out[:-1] += self.off * v[1:]
            out[1:] += self.off * v[:-1]
        return out


def build_grid(p: SystemParams) -> Grid:
    """Choose the uniform grid for the configuration.

    dx = min(h / points_per_well, L / 1000), rounded so that (n+1) dx = L
    exactly.  If the interior point count exceeds n_max it is clamped and
    the grid is flagged; a clamped grid that can no longer resolve the well
    (dx >= h/4) is rejected.
    """
    dx0 = min(p.h / int(p.points_per_well), p.L / 1000.0)
    n_plus_1 = max(int(round(p.L / dx0)), 2)
    capped = False
    if n_plus_1 - 1 > int(p.n_max):
        n_plus_1 = int(p.n_max) + 1
        capped = True
    dx = p.L / n_plus_1
    if dx >= p.h / 4.0:
        raise ConfigError(
            f"grid spacing {dx:.3e} cannot resolve the well of radius {p.h:.3e}"
            + (" (n_max cap active)" if capped else "")
        )
    return Grid(n=n_plus_1 - 1, dx=dx, L=p.L, capped=capped)


def assemble_operator(
    g: Grid, p: SystemParams, V: GridFunction | None = None
) -> TridiagOperator:
    """Discretize -h^2 d^2/dx^2 + U^h + V with the 3-point stencil.

    diag_j = 2 h^2/dx^2 + U^h(x_j) + V_j, off_j = -h^2/dx^2; the Dirichlet
    condition is encoded by truncation to the interior nodes.  V = None
    means V = 0 (the linear reference Hamiltonian).
    """
    if V is not None:
        if V.grid.n != g.n or V.grid.dx != g.dx:
            raise DimensionMismatch("potential V is not defined on the grid")
        v = V.values
    else:
        v = 0.0
    k = (p.h * p.h) / (g.dx * g.dx)
    x = g.interior_x()
    diag = 2.0 * k + well_rescaled(p.well(), p, x) + v
    off = np.full(g.n - 1, -k)
    return TridiagOperator(diag=diag, off=off, scale=p.h * p.h, grid=g)


_INT_FIELDS = {"points_per_well", "n_max"}
_FIELDS = {f for f in SystemParams.__dataclass_fields__}


def load_params(path) -> SystemParams:
    """Read SystemParams from a plain key-value file.

    One ``key = value`` per line, ``#`` starts a comment, keys named exactly
    as the SystemParams fields.  Missing keys keep their defaults; unknown
    keys are rejected.
    """
    overrides = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _FIELDS:
            raise ConfigError(f"{path}:{lineno}: unknown parameter {key!r}")
        try:
            overrides[key] = int(value) if key in _INT_FIELDS else float(value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return SystemParams(**overrides)
