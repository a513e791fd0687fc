"""Experiment orchestration: single solves, h-sweeps, metrics, file output.

A sweep solves the self-consistent problem for a decreasing list of h
values, computes the explicit limit once, and measures how each solution
approaches it: sup and Holder norms of V^h - V0, weak* pairings of the
density against a fixed set of test functions, and the occupied-level
gaps |eps_i^h - (e_i + theta)|.  Rows that fail to converge are flagged
rather than aborting the sweep.

Sweep rows are independent of each other and could run concurrently; they
are executed sequentially here so that output stays deterministic without
any coordination.  Output files (three CSV tables and three SVG plots)
are byte-reproducible by default: the runtime_ms column is written as 0
unless timing is explicitly requested, since wall-clock is the one
quantity two identical runs cannot agree on.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, replace

import numpy as np

from .agmon import DecayReport, verify_decay
from .eigen import eigenvalues_below
from .errors import NoConvergence
from .limit import LimitPotential, LimitSolution, compute_limit
from .model import GridFunction, SystemParams, assemble_operator, build_grid
from .poisson import Measure
from .scf import SCFSolution, scf_solve

__all__ = [
    "DEFAULT_SWEEP",
    "SingleRunResult",
    "SweepRow",
    "ConvergenceReport",
    "metric_sup",
    "metric_holder",
    "weakstar_pairing",
    "run_single",
    "run_sweep",
    "emit",
]

DEFAULT_SWEEP = (0.1, 0.05, 0.025, 0.0125)
HOLDER_ALPHA = 0.5
_HOLDER_MAX_NODES = 2000

TEST_FUNCTIONS = ("const", "x", "sin")

SWEEP_HEADER = [
    "h", "n_grid", "Nh", "iters", "sup_err", "holder_err",
    "pair_const", "pair_x", "pair_sin", "mass", "runtime_ms",
]
SPECTRUM_HEADER = ["h", "i", "eps_i", "e_i_plus_theta", "gap"]
DECAY_HEADER = ["h", "i", "fitted_rate_times_h", "target", "weighted_norm"]


def metric_sup(Vh: GridFunction, V0: LimitPotential) -> float:
    """sup_j |V^h(x_j) - V0(x_j)| with the tent evaluated exactly at nodes."""
    return float(np.max(np.abs(Vh.values - V0(Vh.x))))


def _holder_norm(xs: np.ndarray, d: np.ndarray, alpha: float) -> float:
    """Sup norm plus discrete Holder seminorm of samples d at nodes xs.

    The seminorm maximizes |d_i - d_j| / |x_i - x_j|^alpha over all pairs
    of a <= 2000-node uniform subsample (endpoints always included) and
    over all adjacent full-resolution pairs.
    """
    m = xs.shape[0]
    if m > _HOLDER_MAX_NODES:
        idx = np.unique(np.round(np.linspace(0, m - 1, _HOLDER_MAX_NODES)).astype(int))
    else:
        idx = np.arange(m)
    ds, sub_x = d[idx], xs[idx]
    dd = np.abs(ds[:, None] - ds[None, :])
    xx = np.abs(sub_x[:, None] - sub_x[None, :])
    off_diag = xx > 0
    semi = float(np.max(dd[off_diag] / xx[off_diag] ** alpha)) if off_diag.any() else 0.0
    gaps = np.abs(np.diff(d)) / np.abs(np.diff(xs)) ** alpha
    if gaps.size:
        semi = max(semi, float(np.max(gaps)))
    return float(np.max(np.abs(d))) + semi


def metric_holder(Vh: GridFunction, V0: LimitPotential, alpha: float = HOLDER_ALPHA) -> float:
    """Discrete C^{0,alpha} norm of V^h - V0 (sup plus Holder seminorm)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    g = Vh.grid
    xs = g.full_x()
    d = np.zeros(g.n + 2)
    d[1:-1] = Vh.values - V0(Vh.x)
    return _holder_norm(xs, d, alpha)


def _test_function(phi_id: str, L: float):
    if phi_id == "const":
        return lambda x: np.ones_like(np.asarray(x, dtype=float))
    if phi_id == "x":
        return lambda x: np.asarray(x, dtype=float)
    if phi_id == "sin":
        return lambda x: np.sin(np.pi * np.asarray(x, dtype=float) / L)
    raise ValueError(f"unknown test function {phi_id!r}; choose from {TEST_FUNCTIONS}")


def weakstar_pairing(d: GridFunction, mu: Measure, phi_id: str) -> float:
    """|<d - mu, phi>| for a built-in test function ("const", "x", "sin").

    The density pairing is the grid quadrature dx * sum d_j phi(x_j); the
    measure side sums weight * phi(atom) over atoms (plus the quadrature
    of a density part, if the measure carries one).
    """
    phi = _test_function(phi_id, d.grid.L)
    lhs = float(d.dx * np.sum(d.values * phi(d.x)))
    rhs = float(sum(w * phi(a) for a, w in mu.atoms))
    if mu.density is not None:
        rhs += float(mu.density.dx * np.sum(mu.density.values * phi(mu.density.x)))
    return abs(lhs - rhs)


@dataclass(frozen=True)
class SingleRunResult:
    """One full pipeline run at a fixed h."""

    params: SystemParams
    solution: SCFSolution
    decay: tuple[DecayReport, ...]
    linear_values: np.ndarray  # spectrum of the V=0 Hamiltonian below eps_S
    runtime_ms: float


def run_single(p: SystemParams, trace_path=None) -> SingleRunResult:
    """Solve one configuration end to end: SCF plus decay verification.

    Decay is verified for every occupied state at the energy level eps_S.
    Errors (ConditionViolated for degenerate configs, NoConvergence) are
    propagated to the caller.
    """
    t0 = time.perf_counter()
    sol = scf_solve(p, trace_path=trace_path)
    reports = tuple(
        verify_decay(psi, float(lam), p.eps_S, p)
        for lam, psi in zip(sol.spectrum.values, sol.spectrum.vectors)
    )
    g = sol.V.grid
    lin = eigenvalues_below(
        assemble_operator(g, p, None), p.eps_S, tol=p.tol_eig, refine=False
    )
    runtime_ms = (time.perf_counter() - t0) * 1e3
    return SingleRunResult(
        params=p, solution=sol, decay=reports, linear_values=lin, runtime_ms=runtime_ms
    )


@dataclass(frozen=True)
class SweepRow:
    """Per-h measurements against the limit."""

    h: float
    n_grid: int
    count_occupied: int
    count_linear: int
    values: np.ndarray
    linear_values: np.ndarray
    iterations: int
    sup_err: float
    holder_err: float
    pair_const: float
    pair_x: float
    pair_sin: float
    mass: float
    runtime_ms: float
    decay: tuple[DecayReport, ...]
    potential: GridFunction | None
    flag: str | None = None


@dataclass(frozen=True)
class ConvergenceReport:
    """Sweep rows (decreasing h) plus the limit block they converge to."""

    rows: tuple[SweepRow, ...]
    limit: LimitSolution
    alpha: float
    eps_lin: float
    decay_target: float


def run_sweep(
    p: SystemParams,
    h_list=DEFAULT_SWEEP,
    alpha: float = HOLDER_ALPHA,
    keep_potentials: bool = True,
) -> ConvergenceReport:
    """Run the limit once and one full solve per h, assembling the report.

    ``h_list`` must be strictly decreasing and every h admissible.  The
    linear eigenvalue count N^h is taken below eps_lin = e_N / 2, a level
    strictly between the shallowest bound state and zero, which is where
    count stabilization at N is expected for small h.  Failed rows are
    flagged ('no_convergence') and carry NaN metrics.
    """
    h_list = tuple(float(h) for h in h_list)
    if any(b >= a for a, b in zip(h_list, h_list[1:])):
        raise ValueError(f"h list must be strictly decreasing, got {h_list}")
    limit = compute_limit(p)
    eps_lin = limit.reference.values[-1] / 2.0
    decay_target = (1.0 - p.delta_agmon) * np.sqrt(-p.eps_S)
    rows = []
    for h in h_list:
        ph = replace(p, h=h)
        try:
            single = run_single(ph)
        except NoConvergence:
            g = build_grid(ph)
            rows.append(
                SweepRow(
                    h=h, n_grid=g.n, count_occupied=0, count_linear=0,
                    values=np.empty(0), linear_values=np.empty(0), iterations=0,
                    sup_err=np.nan, holder_err=np.nan, pair_const=np.nan,
                    pair_x=np.nan, pair_sin=np.nan, mass=np.nan, runtime_ms=np.nan,
                    decay=(), potential=None, flag="no_convergence",
                )
            )
            continue
        sol = single.solution
        grid = sol.V.grid
        n_lin = eigenvalues_below(
            assemble_operator(grid, ph, None), eps_lin, tol=ph.tol_eig, refine=False
        )
        rows.append(
            SweepRow(
                h=h,
                n_grid=grid.n,
                count_occupied=sol.spectrum.count,
                count_linear=int(n_lin.shape[0]),
                values=sol.spectrum.values,
                linear_values=single.linear_values,
                iterations=sol.iterations,
                sup_err=metric_sup(sol.V, limit.V0),
                holder_err=metric_holder(sol.V, limit.V0, alpha),
                pair_const=weakstar_pairing(sol.density, limit.mu, "const"),
                pair_x=weakstar_pairing(sol.density, limit.mu, "x"),
                pair_sin=weakstar_pairing(sol.density, limit.mu, "sin"),
                mass=sol.density.mass(),
                runtime_ms=single.runtime_ms,
                decay=single.decay,
                potential=sol.V if keep_potentials else None,
            )
        )
    return ConvergenceReport(
        rows=tuple(rows),
        limit=limit,
        alpha=alpha,
        eps_lin=float(eps_lin),
        decay_target=float(decay_target),
    )


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def emit(report: ConvergenceReport, out_dir, formats=("csv", "svg"), include_timing=False):
    """Write the report as CSV tables and SVG plots; returns the paths.

    sweep.csv, spectrum.csv and decay.csv carry fixed headers.  With the
    default include_timing=False the runtime_ms column is written as 0 so
    that identical runs produce byte-identical files; pass True to record
    measured wall-clock (and give up reproducibility of sweep.csv).
    """
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    theta = report.limit.theta
    if "csv" in formats:
        sweep_rows = []
        spec_rows = []
        decay_rows = []
        for r in report.rows:
            if r.flag is None:
                sweep_rows.append([
                    r.h, r.n_grid, r.count_occupied, r.iterations, r.sup_err,
                    r.holder_err, r.pair_const, r.pair_x, r.pair_sin, r.mass,
                    r.runtime_ms if include_timing else 0.0,
                ])
            else:
                sweep_rows.append([
                    r.h, r.n_grid, 0, 0, np.nan, np.nan, np.nan, np.nan,
                    np.nan, np.nan, 0.0,
                ])
            for i, lam in enumerate(r.values, start=1):
                target = report.limit.reference.e(i) + theta
                spec_rows.append([r.h, i, lam, target, abs(lam - target)])
            for i, rep in enumerate(r.decay, start=1):
                if rep.applicable:
                    decay_rows.append([
                        r.h, i, rep.fitted_rate * r.h, report.decay_target,
                        rep.weighted_norm,
                    ])
        for name, header, rows in (
            ("sweep.csv", SWEEP_HEADER, sweep_rows),
            ("spectrum.csv", SPECTRUM_HEADER, spec_rows),
            ("decay.csv", DECAY_HEADER, decay_rows),
        ):
            path = out / name
            _write_csv(path, header, rows)
            paths.append(path)
    if "svg" in formats:
        from . import plots

        paths.extend(plots.emit_svg(report, out))
    return paths
