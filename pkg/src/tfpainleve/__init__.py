"""Numerics for the Thomas-Fermi limit of PT-symmetric Gross-Pitaevskii ground
states and the coupled Painleve-II boundary layer."""

__version__ = "0.1.0"

from .config import SolverConfig, load_config
from .coupled import (
    ChiProfile,
    CoupledState,
    chi_from_nu,
    conjecture_bound_ratio,
    decay_fit,
    equation_residuals,
    iterate_coupled,
    reconstruct_physical,
    solve_nu_given_chi,
    weighted_norms,
)
from .numerics import Grid, Profile
from .painleve import HMProfile, compute_w0, solve_hastings_mcleod
from .tf_limit import (
    PsiTable,
    TFSolution,
    build_tf_solution,
    detect_eta0,
    integrate_psi,
    tf_direct_xi_ode,
    tf_general_potential,
)
