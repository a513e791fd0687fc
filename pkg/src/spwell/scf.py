"""Self-consistent coupling of the Schrodinger and Poisson problems.

The nonlinear problem V = Poisson(n[V]), with n[V] built from the occupied
eigenstates of -h^2 d^2/dx^2 + U^h + V, is solved by damped Picard
iteration.  The convex energy functional

    J(V) = 1/2 int |V'|^2 + sum_{eps_i < eps_S} F(eps_i(V)),   F(x) = int_x^inf f,

whose unique minimizer is the solution, monitors global progress: the
damping factor is halved whenever a step would increase J, and slowly
restored after a run of decreasing steps.  One spectral solve per iterate.

J comparisons are made at the resolution the eigenvalue bisection supports:
the occupied trace term inherits a quantization of order f_max * tol_eig,
so "nonincreasing" is enforced (and asserted by tests) up to j_slack(J).

A single solve is inherently sequential (each iterate needs the previous
one); distinct solves share no state and may run concurrently.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .eigen import EigenSet, eigenvalues_below, spectrum_below
from .errors import ConditionViolated, NoConvergence
from .model import (
    Grid,
    GridFunction,
    PartitionFunction,
    SystemParams,
    assemble_operator,
    build_grid,
    partition_antiderivative,
    partition_eval,
)
from .poisson import poisson_solve_density

__all__ = ["SCFSolution", "assemble_density", "energy_functional", "scf_solve", "j_slack"]

MAX_ITER = 500
TAU_INIT = 0.5
TAU_CAP = 0.9
TAU_GROW = 1.2
TAU_MIN = 1e-8


def j_slack(j_value: float) -> float:
    """Roundoff/quantization allowance for comparing energy values."""
    return 1e-12 * (1.0 + abs(j_value))


@dataclass(frozen=True)
class SCFSolution:
    """Converged self-consistent state.

    V is the nonnegative Poisson potential, ``spectrum`` its occupied
    eigenpairs below eps_S, ``density`` the charge density n[V];
    ``residual`` is ||V - Poisson(n[V])||_inf at the final iterate and
    ``j_history`` the energy values of the accepted iterates.
    """

    V: GridFunction
    spectrum: EigenSet
    density: GridFunction
    j_history: tuple[float, ...]
    iterations: int
    residual: float
    converged: bool
    tau_final: float


def assemble_density(S: EigenSet, f: PartitionFunction) -> GridFunction:
    """Charge density n = sum_i f(eps_i) |psi_i|^2 of the occupied states.

    Nonnegative by construction; since each psi_i has unit grid-quadrature
    norm, the quadrature mass equals sum_i f(eps_i) to roundoff.
    """
    out = np.zeros(S.grid.n)
    for lam, psi in zip(S.values, S.vectors):
        out += partition_eval(f, float(lam)) * psi.values**2
    return GridFunction(out, S.grid)


def _trace_term(values: np.ndarray, f: PartitionFunction) -> float:
    return float(sum(partition_antiderivative(f, float(v)) for v in values))


def _energy(V: GridFunction, occupied: np.ndarray, f: PartitionFunction) -> float:
    return 0.5 * V.h1_seminorm_sq() + _trace_term(occupied, f)


def energy_functional(V: GridFunction, p: SystemParams) -> float:
    """Evaluate J(V) = 1/2 int |V'|^2 + sum_{eps_i < eps_S} F(eps_i).

    The gradient term uses the discrete difference quotients including the
    boundary gaps; the trace term sums F over the eigenvalues of the
    Hamiltonian assembled with this V.  Both terms are nonnegative.
    """
    T = assemble_operator(V.grid, p, V)
    vals = eigenvalues_below(T, p.eps_S, tol=p.tol_eig, refine=False)
    return _energy(V, vals, p.partition())


class _TraceWriter:
    def __init__(self, path):
        self._fh = open(path, "w", newline="")
        self._w = csv.writer(self._fh)
        self._w.writerow(["iteration", "tau", "residual", "J"])

    def row(self, it, tau, res, j):
        self._w.writerow([it, repr(float(tau)), repr(float(res)), repr(float(j))])

    def close(self):
        self._fh.close()


def scf_solve(
    p: SystemParams,
    V_init: GridFunction | None = None,
    max_iter: int = MAX_ITER,
    trace_path=None,
) -> SCFSolution:
    """Find the self-consistent potential by damped Picard iteration.

    Starting from V_init (default 0), iterates

        V <- (1 - tau) V + tau Poisson(n[V]),

    with tau starting at 0.5, halved whenever J would increase beyond the
    quantization slack, and restored by a factor 1.2 (capped at 0.9) after
    three consecutive decreasing steps.  Stops when both the sup-norm
    update and the fixed-point residual are <= tol_scf.

    Raises
    ------
    ConditionViolated
        If the linear Hamiltonian has no eigenvalue below eps_S (e1 >=
        eps_S): n[0] = 0 and V = 0 is the exact, trivial solution, carried
        on the exception as ``trivial_solution``.
    NoConvergence
        After ``max_iter`` spectral solves without meeting tol_scf.

    A per-iteration trace (iteration, tau, residual, J) is written as CSV
    to ``trace_path`` when given.
    """
    g = build_grid(p)
    f = p.partition()
    tol = p.tol_scf

    # Occupation check at V = 0 (the linear operator).  An empty spectrum
    # makes the density vanish identically and the zero potential exact.
    lin = spectrum_below(assemble_operator(g, p, None), p.eps_S, tol=p.tol_eig, refine=False)
    if lin.count == 0:
        zero = GridFunction.zeros(g)
        trivial = SCFSolution(
            V=zero,
            spectrum=lin,
            density=zero,
            j_history=(0.0,),
            iterations=1,
            residual=0.0,
            converged=True,
            tau_final=TAU_INIT,
        )
        raise ConditionViolated(
            f"no occupied state: e1 >= eps_S = {p.eps_S} for the linear "
            "Hamiltonian; the system is trivial (V = 0)",
            e1=None,
            eps_S=p.eps_S,
            trivial_solution=trivial,
        )

    writer = _TraceWriter(trace_path) if trace_path is not None else None
    try:
        if V_init is None:
            V = GridFunction.zeros(g)
            spec = lin
        else:
            if V_init.grid.n != g.n or V_init.grid.dx != g.dx:
                V = GridFunction.from_callable(g, lambda x: np.interp(x, V_init.x, V_init.values))
            else:
                V = V_init
            spec = spectrum_below(assemble_operator(g, p, V), p.eps_S, tol=p.tol_eig, refine=False)

        j_cur = _energy(V, spec.values, f)
        j_history = [j_cur]
        tau = TAU_INIT
        streak = 0
        prev_update = 0.0
        density = assemble_density(spec, f)

        for it in range(1, max_iter + 1):
            v_pic = poisson_solve_density(g, density)
            residual = float(np.max(np.abs(V.values - v_pic.values)))
            if writer:
                writer.row(it, tau, residual, j_cur)
            if residual <= tol and prev_update <= tol:
                return SCFSolution(
                    V=V,
                    spectrum=spec,
                    density=density,
                    j_history=tuple(j_history),
                    iterations=it,
                    residual=residual,
                    converged=True,
                    tau_final=tau,
                )
            v_new = GridFunction((1.0 - tau) * V.values + tau * v_pic.values, g)
            spec_new = spectrum_below(
                assemble_operator(g, p, v_new), p.eps_S, tol=p.tol_eig, refine=False
            )
            j_new = _energy(v_new, spec_new.values, f)
            if j_new > j_cur + j_slack(j_cur):
                # The Picard direction strictly decreases J for small tau,
                # so persistent increase down to TAU_MIN is a breakdown.
                if tau <= TAU_MIN:
                    raise NoConvergence(
                        f"damping exhausted at tau={tau:g} with J still increasing"
                    )
                tau = 0.5 * tau
                streak = 0
                continue
            prev_update = float(np.max(np.abs(v_new.values - V.values)))
            V, spec, j_cur = v_new, spec_new, j_new
            density = assemble_density(spec, f)
            j_history.append(j_cur)
            streak += 1
            if streak >= 3:
                tau = min(TAU_CAP, tau * TAU_GROW)
                streak = 0

        raise NoConvergence(
            f"SCF did not reach tol_scf={tol:g} within {max_iter} iterations "
            f"(last residual {residual:.3e})"
        )
    finally:
        if writer:
            writer.close()
