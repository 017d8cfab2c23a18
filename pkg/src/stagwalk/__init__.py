"""Simulation and analysis toolkit for staggered (coinless) quantum walks.

The package follows one physical model through three independent computational
paths and cross-checks them against each other:

* direct evolution of site amplitudes on a finite lattice (`stagwalk.lattice`),
* evolution in the staggered Fourier basis, momentum by momentum
  (`stagwalk.momentum`),
* closed-form / quadrature asymptotics for the moments of the walker position
  (`stagwalk.moments`).

Coined-walk baselines for comparison live in `stagwalk.coined`, parameter
optimization for maximal spreading in `stagwalk.optimize`, and a command-line
harness in `stagwalk.cli`.
"""

from .lattice import (
    Tessellation1D,
    Tessellation2D,
    LatticeState,
    InitialCondition,
    BoundaryError,
    build_reflection,
    step,
    evolve,
    probability_distribution,
)
from .momentum import (
    BandEdgeError,
    reduced_operator_1d,
    reduced_operator_2d,
    eigensystem_1d,
    eigensystem_2d,
    dispersion_derivative_1d,
    staggered_momenta,
    staggered_components,
    staggered_synthesis,
    evolve_momentum,
)
from .moments import (
    QuadratureError,
    QuadratureSettings,
    MomentReport,
    empirical_moment,
    moment_report,
    odd_moment_coefficient_1d,
    even_moment_coefficient_1d,
    variance_coefficient_1d,
    variance_coefficient_grid,
    variance_surface_1d,
    variance_branches_1d,
    closed_form_variance_1d,
    first_moment_coefficients_2d,
    second_moment_coefficients_2d,
    msd_coefficient_2d,
)
from .coined import (
    CoinedState,
    hadamard_step,
    hadamard_walk,
    hadamard_moment_coefficients,
    grover_step,
    grover_walk,
    grover_moment_coefficients,
    D1,
    D2,
)
from .optimize import (
    ManifoldParameterization,
    SweepResult,
    SpreadOptimum,
    LocusReport,
    canonical_cell,
    make_manifold,
    sweep_objective,
    refine_local,
    verify_optimum_locus,
)

__version__ = "0.1.0"
