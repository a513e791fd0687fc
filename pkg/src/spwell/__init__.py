"""spwell: 1D stationary Schrodinger-Poisson solver with a squeezing well.

Solves the self-consistent system on (0, L) for finite well radius h,
computes the explicit h -> 0 limit (the scalar theta, the tent potential
and the concentrated limit measure), and provides a harness that
demonstrates the convergence of the finite-h solutions to that limit.
"""

from .agmon import DecayReport, agmon_distance, verify_decay, weight_function
from .eigen import EigenSet, eigenvalues_below, eigenvector, spectrum_below, sturm_count
from .errors import (
    AtomOutOfDomain,
    BracketError,
    ConditionViolated,
    ConfigError,
    DimensionMismatch,
    EmptyWindow,
    NegativeSource,
    NoConvergence,
    SPWellError,
)
from .harness import (
    DEFAULT_SWEEP,
    ConvergenceReport,
    SingleRunResult,
    SweepRow,
    emit,
    metric_holder,
    metric_sup,
    run_single,
    run_sweep,
    weakstar_pairing,
)
from .limit import (
    LimitPotential,
    LimitSolution,
    ReferenceSpectrum,
    compute_limit,
    limit_measure,
    limit_potential,
    occupied_sum,
    reference_spectrum,
    solve_theta,
    theta_residual,
)
from .model import (
    Grid,
    GridFunction,
    PartitionFunction,
    SystemParams,
    TridiagOperator,
    WellPotential,
    assemble_operator,
    build_grid,
    load_params,
    partition_antiderivative,
    partition_eval,
    well_eval,
    well_rescaled,
)
from .poisson import Measure, green_kernel, poisson_solve_density, poisson_solve_measure
from .scf import SCFSolution, assemble_density, energy_functional, scf_solve

__version__ = "0.1.0"
