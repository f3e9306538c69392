"""Numerical laboratory for weighted-entropy contraction of viscous shocks
in a 1-D hyperbolic-parabolic chemotaxis system."""

from .functionals import (
    B_delta,
    D,
    FunctionalReport,
    G_delta,
    I_bad,
    I_good,
    R_eps_delta,
    R_main,
    State,
    Y,
    decompositions,
    eta_rel,
    eta_unweighted,
    eta_weighted,
    evaluate_report,
    expansion_functionals,
    phi_of_n,
    pi_rel,
    reference_arrays,
    truncate,
)
from .grid import Grid, GridField, d2dx2, ddx_central, ddx_upwind, ddx_upwind_biased, integrate
from .poincare import R_poincare, W_from_state, sample_W, scan_delta_star
from .shift import ShiftState, advance, phi_eps, xdot
from .solver import (
    PerturbationSpec,
    RunResult,
    SolverConfig,
    StabilityError,
    initial_state,
    reconstruct_concentration,
    run,
    step,
)
from .wave import (
    DomainError,
    EndStates,
    WaveParams,
    derive_end_state,
    make_wave_params,
    profile_n,
    profile_n_prime,
    profile_n_second,
    profile_q,
    weight_a,
    weight_a_prime,
    xi_of_y,
    y_of_xi,
)

__version__ = "0.1.0"
